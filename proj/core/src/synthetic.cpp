#include "xtalsst/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "xtalsst/errors.hpp"
#include "xtalsst/parallel.hpp"

namespace xtal {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSigma = 0.25;          // bump width in lattice periods
constexpr double kCutoff = 8.0 * kSigma; // bump truncation radius

// Cell average of one truncated bump: Gaussian mass within the cutoff over
// the cell volume. Subtracting it makes the pattern exactly mean-free.
double pattern_mean(const Mat3& basis) {
  const double t = kCutoff / kSigma;
  const double mass_frac =
      std::erf(t / std::sqrt(2.0)) - std::sqrt(2.0 / kPi) * t * std::exp(-0.5 * t * t);
  const double full = std::pow(2.0 * kPi * kSigma * kSigma, 1.5);
  return full * mass_frac / std::abs(basis.determinant());
}

// Integer site offsets around the rounded lattice coordinate that can carry
// a bump within the cutoff of any point in the rounding cell. Each entry
// pairs the integer offset with its lattice vector.
std::vector<std::pair<Index3, Vec3>> site_offsets(const Mat3& basis) {
  const double margin = basis.norm() * std::sqrt(3.0) / 2.0;  // Frobenius bounds the 2-norm
  const double reach = kCutoff + margin;
  std::vector<std::pair<Index3, Vec3>> offsets;
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j)
      for (int k = -5; k <= 5; ++k) {
        const Vec3 d = basis * Vec3(i, j, k);
        if (d.norm() <= reach) offsets.push_back({{i, j, k}, d});
      }
  return offsets;
}

struct PatternKernel {
  Mat3 basis;
  Mat3 inv;
  std::vector<std::pair<Index3, Vec3>> offsets;
  double mean;

  explicit PatternKernel(const Mat3& b)
      : basis(b), inv(b.inverse()), offsets(site_offsets(b)), mean(pattern_mean(b)) {}

  // Sum of bumps at sites basis*m near z, skipping sites in `skip`.
  double eval(const Vec3& z, const std::vector<Index3>* skip = nullptr) const {
    const Vec3 u = inv * z;
    const Index3 m0{static_cast<int>(std::lround(u[0])), static_cast<int>(std::lround(u[1])),
                    static_cast<int>(std::lround(u[2]))};
    const Vec3 d0 = z - basis * Vec3(m0[0], m0[1], m0[2]);
    double sum = 0.0;
    for (const auto& [o, vo] : offsets) {
      const double d2 = (d0 - vo).squaredNorm();
      if (d2 > kCutoff * kCutoff) continue;
      if (skip) {
        const Index3 m{m0[0] + o[0], m0[1] + o[1], m0[2] + o[2]};
        if (std::find(skip->begin(), skip->end(), m) != skip->end()) continue;
      }
      sum += std::exp(-d2 / (2.0 * kSigma * kSigma));
    }
    return sum - mean;
  }
};

double bump(double d2) {
  return d2 > kCutoff * kCutoff ? 0.0 : std::exp(-d2 / (2.0 * kSigma * kSigma));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

int reference_direction_count(LatticeType lattice) {
  return lattice == LatticeType::Cubic ? 3 : 4;
}

Mat3 lattice_basis(LatticeType lattice, double axial_ratio) {
  Mat3 v = Mat3::Identity();
  if (lattice == LatticeType::Hexagonal) {
    if (!(axial_ratio > 0.0)) throw ValidationError("axial ratio must be positive");
    v.col(1) = Vec3(0.5, std::sqrt(3.0) / 2.0, 0.0);
    v.col(2) = Vec3(0.0, 0.0, axial_ratio);
  }
  return v;
}

std::vector<Vec3> reference_wavevectors(LatticeType lattice, double N, double axial_ratio) {
  if (!(N > 0.0)) throw ValidationError("reciprocal parameter N must be positive");
  if (lattice == LatticeType::Cubic)
    return {N * Vec3::UnitX(), N * Vec3::UnitY(), N * Vec3::UnitZ()};
  const Mat3 recip = lattice_basis(lattice, axial_ratio).inverse();
  const Vec3 b1 = recip.row(0), b2 = recip.row(1), b3 = recip.row(2);
  return {N * b1, N * b2, N * (b1 + b2), N * b3};
}

double lattice_pattern(const Vec3& z, const Mat3& basis) {
  if (std::abs(basis.determinant()) < 1e-12)
    throw ValidationError("lattice basis is singular");
  return PatternKernel(basis).eval(z);
}

Vec3 grain_reference_map(const GrainSpec& grain, const Vec3& x) {
  Vec3 y = x;
  if (grain.warp) {
    const auto& w = *grain.warp;
    y += w.amplitude * std::sin(2.0 * kPi * (w.wavevector.dot(x) + w.phase)) * w.direction;
  }
  return rotation_from_euler(grain.rotation) * (y - grain.seed);
}

Mat3 grain_reference_jacobian(const GrainSpec& grain, const Vec3& x) {
  Mat3 j = Mat3::Identity();
  if (grain.warp) {
    const auto& w = *grain.warp;
    j += 2.0 * kPi * w.amplitude * std::cos(2.0 * kPi * (w.wavevector.dot(x) + w.phase)) *
         (w.direction * w.wavevector.transpose());
  }
  return rotation_from_euler(grain.rotation) * j;
}

namespace {

void validate_spec(const PolycrystalSpec& spec) {
  const int lmin = std::min({spec.dims[0], spec.dims[1], spec.dims[2]});
  if (spec.dims[0] <= 0 || spec.dims[1] <= 0 || spec.dims[2] <= 0)
    throw ValidationError("dims must be positive");
  if (!(spec.N >= 4.0) || !(spec.N <= lmin / 4.0))
    throw ValidationError("N must satisfy 4 <= N <= L/4");
  if (spec.grains.empty()) throw ValidationError("at least one grain required");
  for (std::size_t i = 0; i < spec.grains.size(); ++i) {
    const auto& g = spec.grains[i];
    if (!std::isfinite(g.rotation.alpha) || !std::isfinite(g.rotation.beta) ||
        !std::isfinite(g.rotation.gamma))
      throw ValidationError("rotation angles must be finite");
    for (std::size_t j = i + 1; j < spec.grains.size(); ++j)
      if ((g.seed - spec.grains[j].seed).norm() < 1e-12)
        throw ValidationError("grain seeds must be distinct");
    if (g.warp) {
      // Diffeomorphism check: sampled Jacobian determinants stay positive.
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
          for (int c = 0; c < 5; ++c) {
            const Vec3 x(a / 5.0, b / 5.0, c / 5.0);
            if (grain_reference_jacobian(g, x).determinant() <= 0.0)
              throw ValidationError("grain warp is not orientation-preserving");
          }
    }
  }
  const int n_grains = static_cast<int>(spec.grains.size());
  for (const auto& v : spec.vacancies)
    if (v.grain < 0 || v.grain >= n_grains) throw ValidationError("vacancy grain out of range");
  for (const auto& hp : spec.half_planes) {
    if (hp.grain < 0 || hp.grain >= n_grains)
      throw ValidationError("half-plane grain out of range");
    if (hp.normal_axis < 0 || hp.normal_axis > 2 || hp.extend_axis < 0 || hp.extend_axis > 2 ||
        hp.normal_axis == hp.extend_axis)
      throw ValidationError("half-plane axes must be distinct and in 0..2");
    if (hp.from > hp.to) throw ValidationError("half-plane range is empty");
  }
  if (!(spec.noise_variance >= 0.0) || !std::isfinite(spec.noise_variance))
    throw ValidationError("noise variance must be finite and nonnegative");
}

// Periodic squared distance on the unit cube.
double periodic_dist2(const Vec3& x, const Vec3& seed) {
  double d2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    double d = x[c] - seed[c];
    d -= std::round(d);
    d2 += d * d;
  }
  return d2;
}

}  // namespace

std::pair<ScalarVolume, GroundTruth> generate_polycrystal(const PolycrystalSpec& spec) {
  validate_spec(spec);
  const int L1 = spec.dims[0], L2 = spec.dims[1], L3 = spec.dims[2];
  const std::size_t total = static_cast<std::size_t>(L1) * L2 * L3;
  const Mat3 basis = lattice_basis(spec.lattice, spec.axial_ratio);
  const PatternKernel kernel(basis);
  const int n_grains = static_cast<int>(spec.grains.size());

  // Per-grain defect bookkeeping in lattice coordinates.
  std::vector<std::vector<Index3>> vacancies(n_grains);
  for (const auto& v : spec.vacancies) vacancies[v.grain].push_back(v.site);
  std::vector<std::vector<HalfPlaneSpec>> planes(n_grains);
  for (const auto& hp : spec.half_planes) planes[hp.grain].push_back(hp);

  ScalarVolume vol(L1, L2, L3);
  GroundTruth truth;
  truth.dims = spec.dims;
  truth.grain_id.assign(total, 0);
  truth.G.assign(total, Mat3::Identity());
  truth.mask.assign(total, 0);

  parallel_for(static_cast<std::int64_t>(total), 1, [&](std::int64_t idx) {
    const int i = static_cast<int>(idx / (static_cast<std::size_t>(L2) * L3));
    const int j = static_cast<int>((idx / L3) % L2);
    const int k = static_cast<int>(idx % L3);
    const Vec3 x(static_cast<double>(i) / L1, static_cast<double>(j) / L2,
                 static_cast<double>(k) / L3);

    int g = 0;
    double best = periodic_dist2(x, spec.grains[0].seed);
    for (int t = 1; t < n_grains; ++t) {
      const double d2 = periodic_dist2(x, spec.grains[t].seed);
      if (d2 < best) { best = d2; g = t; }
    }
    truth.grain_id[idx] = g;
    truth.G[idx] = grain_reference_jacobian(spec.grains[g], x);

    const Vec3 z = spec.N * grain_reference_map(spec.grains[g], x);
    const auto* skip = vacancies[g].empty() ? nullptr : &vacancies[g];
    double s = kernel.eval(z, skip);

    // Extra atoms of inserted strips: lattice coordinates u with
    // u[na] = offset, u[ea] in [from, to], u[la] any integer.
    const Vec3 u = kernel.inv * z;
    for (const auto& hp : planes[g]) {
      const int na = hp.normal_axis, ea = hp.extend_axis;
      const int la = 3 - na - ea;
      if (std::abs(u[na] - hp.offset) > kCutoff * 2.0) continue;
      const int ea0 = static_cast<int>(std::lround(u[ea]));
      const int la0 = static_cast<int>(std::lround(u[la]));
      for (int de = -4; de <= 4; ++de) {
        const int ue = ea0 + de;
        if (ue < hp.from || ue > hp.to) continue;
        for (int dl = -4; dl <= 4; ++dl) {
          Vec3 site;
          site[na] = hp.offset;
          site[ea] = ue;
          site[la] = la0 + dl;
          s += bump((z - basis * site).squaredNorm());
        }
      }
    }

    vol.data[idx] = spec.amplitude * s + spec.trend;

    // Defect neighborhoods in lattice coordinates.
    for (const auto& site : vacancies[g]) {
      const Vec3 d = u - Vec3(site[0], site[1], site[2]);
      if (d.norm() <= 1.5) truth.mask[idx] = 1;
    }
    for (const auto& hp : planes[g]) {
      const int na = hp.normal_axis, ea = hp.extend_axis;
      const double dn = u[na] - hp.offset;
      const double de = std::max({hp.from - u[ea], u[ea] - hp.to, 0.0});
      if (std::sqrt(dn * dn + de * de) <= 2.0) truth.mask[idx] = 1;
    }
  });

  // Grain boundaries: any 6-neighbor with a different grain id.
  parallel_for(static_cast<std::int64_t>(total), 1, [&](std::int64_t idx) {
    const int i = static_cast<int>(idx / (static_cast<std::size_t>(L2) * L3));
    const int j = static_cast<int>((idx / L3) % L2);
    const int k = static_cast<int>(idx % L3);
    const std::int32_t id = truth.grain_id[idx];
    const int ip = (i + 1) % L1, im = (i + L1 - 1) % L1;
    const int jp = (j + 1) % L2, jm = (j + L2 - 1) % L2;
    const int kp = (k + 1) % L3, km = (k + L3 - 1) % L3;
    if (truth.grain_id[vol.offset(ip, j, k)] != id ||
        truth.grain_id[vol.offset(im, j, k)] != id ||
        truth.grain_id[vol.offset(i, jp, k)] != id ||
        truth.grain_id[vol.offset(i, jm, k)] != id ||
        truth.grain_id[vol.offset(i, j, kp)] != id ||
        truth.grain_id[vol.offset(i, j, km)] != id)
      truth.mask[idx] = 1;
  });

  return {std::move(vol), std::move(truth)};
}

ScalarVolume add_gaussian_noise(const ScalarVolume& vol, double variance, std::uint64_t seed) {
  validate_volume(vol);
  if (!(variance >= 0.0) || !std::isfinite(variance))
    throw ValidationError("noise variance must be finite and nonnegative");
  ScalarVolume out = vol;
  if (variance == 0.0) return out;

  const double sigma = std::sqrt(variance);
  const std::size_t total = vol.size();
  constexpr std::size_t kBlock = 4096;
  const std::size_t n_blocks = (total + kBlock - 1) / kBlock;

  // One standardized engine per fixed-size block: the stream depends only on
  // (seed, block), never on the thread count.
  parallel_for(static_cast<std::int64_t>(n_blocks), 1, [&](std::int64_t b) {
    std::uint64_t state = seed ^ (0xA0761D6478BD642Full * (static_cast<std::uint64_t>(b) + 1));
    std::mt19937_64 engine(splitmix64(state));
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(total, lo + kBlock);
    for (std::size_t i = lo; i < hi; i += 2) {
      // Box-Muller on open-interval uniforms.
      const double u1 =
          (static_cast<double>(engine() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
      const double u2 =
          (static_cast<double>(engine() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
      const double r = std::sqrt(-2.0 * std::log(u1));
      out.data[i] += sigma * r * std::cos(2.0 * kPi * u2);
      if (i + 1 < hi) out.data[i + 1] += sigma * r * std::sin(2.0 * kPi * u2);
    }
  });
  return out;
}

}  // namespace xtal
