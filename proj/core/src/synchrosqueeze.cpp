#include "xtalsst/synchrosqueeze.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "xtalsst/errors.hpp"
#include "xtalsst/parallel.hpp"

namespace xtal {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

double SphericalGrid::dpsi() const { return kPi / n_psi; }
double SphericalGrid::dtheta() const { return kPi / n_theta; }

SphericalGrid make_spherical_grid(double r1, double r2, double dv, int n_psi, int n_theta) {
  if (!(r1 > 0.0) || !(r2 > r1)) throw ValidationError("spherical grid needs 0 < r1 < r2");
  if (!(dv > 0.0)) throw ValidationError("radial step must be positive");
  if (n_psi < 2 || n_theta < 2) throw ValidationError("angular grids need at least 2 bins");
  SphericalGrid g;
  g.r1 = r1;
  g.r2 = r2;
  g.dv = dv;
  g.n_psi = n_psi;
  g.n_theta = n_theta;
  g.v_min = static_cast<int>(std::ceil(r1 / dv - 1e-9));
  g.v_max = static_cast<int>(std::floor(r2 / dv + 1e-9));
  if (g.v_min > g.v_max) throw ValidationError("no radial bin centers inside the band");
  return g;
}

Vec3 fold_wavevector(const Vec3& v) {
  if (v[1] != 0.0) return v[1] > 0.0 ? v : Vec3(-v);
  if (v[2] != 0.0) return v[2] > 0.0 ? v : Vec3(-v);
  return v[0] >= 0.0 ? v : Vec3(-v);
}

Vec3 to_spherical(const Vec3& folded) {
  const double r = folded.norm();
  if (r == 0.0) return Vec3::Zero();
  const double theta = std::acos(std::clamp(folded[2] / r, -1.0, 1.0));
  const double psi = std::atan2(folded[1], folded[0]);
  return Vec3(r, psi, theta);
}

Vec3 to_cartesian(const Vec3& sph) {
  const double v = sph[0], psi = sph[1], theta = sph[2];
  return Vec3(v * std::sin(theta) * std::cos(psi), v * std::sin(theta) * std::sin(psi),
              v * std::cos(theta));
}

std::uint32_t bin_key(const SphericalGrid& grid, const Vec3& v) {
  const Vec3 sph = to_spherical(fold_wavevector(v));
  const int iv = static_cast<int>(std::lround(sph[0] / grid.dv));
  if (iv < grid.v_min || iv > grid.v_max) return kInvalidBin;
  int ipsi = static_cast<int>(std::lround(sph[1] / grid.dpsi()));
  int itheta = static_cast<int>(std::lround(sph[2] / grid.dtheta()));
  itheta = std::clamp(itheta, 0, grid.n_theta);
  if (ipsi == grid.n_psi) {  // azimuth pi is the antipode of azimuth 0
    ipsi = 0;
    itheta = grid.n_theta - itheta;
  }
  return (static_cast<std::uint32_t>(iv - grid.v_min) * grid.n_psi +
          static_cast<std::uint32_t>(ipsi)) *
             (grid.n_theta + 1) +
         static_cast<std::uint32_t>(itheta);
}

Vec3 bin_center_spherical(const SphericalGrid& grid, std::uint32_t key) {
  const std::uint32_t itheta = key % (grid.n_theta + 1);
  const std::uint32_t rest = key / (grid.n_theta + 1);
  const std::uint32_t ipsi = rest % grid.n_psi;
  const std::uint32_t iv = rest / grid.n_psi;
  return Vec3((grid.v_min + static_cast<int>(iv)) * grid.dv, ipsi * grid.dpsi(),
              itheta * grid.dtheta());
}

WavevectorField local_wavevectors(const CoefficientField& coeffs, double eps_rel) {
  if (!coeffs.has_gradients)
    throw ValidationError("coefficient field was built without gradients");
  if (!(eps_rel > 0.0 && eps_rel < 1.0)) throw ValidationError("eps_rel must be in (0, 1)");

  const std::size_t block = coeffs.block();
  double max2 = 0.0;
  for (const auto& c : coeffs.w) max2 = std::max(max2, std::norm(c));
  if (max2 <= 0.0) throw AnalysisError("all coefficients vanish; nothing to retain");

  WavevectorField field;
  field.lb = coeffs.lb;
  field.max_abs_coeff = std::sqrt(max2);
  field.threshold = eps_rel * field.max_abs_coeff;
  const double thr2 = field.threshold * field.threshold;

  for (std::size_t t = 0; t < coeffs.atom_count; ++t) {
    const auto* w = coeffs.w_of(t);
    const auto* gx = coeffs.grad_of(t, 0);
    const auto* gy = coeffs.grad_of(t, 1);
    const auto* gz = coeffs.grad_of(t, 2);
    for (std::size_t b = 0; b < block; ++b) {
      const double w2 = std::norm(w[b]);
      if (w2 < thr2) continue;
      const std::complex<double> cw = std::conj(w[b]);
      const double denom = 2.0 * kPi * w2;
      field.entries.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(b),
                               Vec3(std::imag(gx[b] * cw) / denom, std::imag(gy[b] * cw) / denom,
                                    std::imag(gz[b] * cw) / denom),
                               w2});
    }
  }
  if (field.entries.empty())
    throw AnalysisError("no coefficients above the retention threshold; lower eps_rel");
  return field;
}

double SqueezeTensor::energy_at(std::size_t b) const {
  double sum = 0.0;
  for (const auto& [key, e] : cells[b]) sum += e;
  return sum;
}

namespace {

SqueezeTensor freeze(std::vector<std::unordered_map<std::uint32_t, double>>& maps,
                     const SphericalGrid& grid, int lb) {
  SqueezeTensor tensor;
  tensor.grid = grid;
  tensor.lb = lb;
  tensor.cells.resize(maps.size());
  double total = 0.0;
  for (std::size_t b = 0; b < maps.size(); ++b) {
    auto& cells = tensor.cells[b];
    cells.assign(maps[b].begin(), maps[b].end());
    std::sort(cells.begin(), cells.end());
    for (const auto& [key, e] : cells) total += e;
    maps[b].clear();
  }
  tensor.total_energy = total;
  return tensor;
}

}  // namespace

SqueezeTensor squeeze(const WavevectorField& field, const SphericalGrid& grid) {
  const std::size_t block = static_cast<std::size_t>(field.lb) * field.lb * field.lb;
  std::vector<std::unordered_map<std::uint32_t, double>> maps(block);
  for (const auto& e : field.entries) {
    const std::uint32_t key = bin_key(grid, e.v);
    if (key == kInvalidBin) continue;
    maps[e.b][key] += e.weight;
  }
  return freeze(maps, grid, field.lb);
}

SqueezeSummary squeeze_volume(const SpectralVolume& spec, const WavePacketAtlas& atlas,
                              double eps_rel, const SphericalGrid& grid, int threads,
                              const RetainedVisitor& visitor) {
  if (spec.dims[0] != atlas.L || spec.dims[1] != atlas.L || spec.dims[2] != atlas.L)
    throw ValidationError("spectrum dims do not match the atlas grid");
  if (!(eps_rel > 0.0 && eps_rel < 1.0)) throw ValidationError("eps_rel must be in (0, 1)");
  threads = std::max(1, threads);

  const int lb = atlas.lb;
  const std::size_t block = static_cast<std::size_t>(lb) * lb * lb;
  std::vector<std::complex<double>> w(block);
  std::vector<std::complex<double>> grad(3 * block);

  // Pass one: global coefficient maximum (a max-reduction is order-free).
  double max2 = 0.0;
  for (const auto& atom : atlas.atoms) {
    transform_atom(spec, atlas, atom, w.data(), nullptr);
    for (std::size_t b = 0; b < block; ++b) max2 = std::max(max2, std::norm(w[b]));
  }
  if (max2 <= 0.0) throw AnalysisError("all coefficients vanish; nothing to retain");

  SqueezeSummary out;
  out.max_abs_coeff = std::sqrt(max2);
  const double thr2 = eps_rel * eps_rel * max2;

  // Pass two: atoms stay in order; each spatial index owns its bin map, so
  // the accumulation order per cell is the atom order regardless of threads.
  std::vector<std::unordered_map<std::uint32_t, double>> maps(block);
  std::vector<double> retained(block, 0.0), binned(block, 0.0);
  std::vector<std::size_t> counts(block, 0);
  for (std::uint32_t t = 0; t < atlas.atoms.size(); ++t) {
    transform_atom(spec, atlas, atlas.atoms[t], w.data(), grad.data());
    auto process = [&](std::int64_t b) {
      const double w2 = std::norm(w[b]);
      if (w2 < thr2) return;
      const std::complex<double> cw = std::conj(w[b]);
      const double denom = 2.0 * kPi * w2;
      const Vec3 v(std::imag(grad[b] * cw) / denom, std::imag(grad[block + b] * cw) / denom,
                   std::imag(grad[2 * block + b] * cw) / denom);
      counts[b] += 1;
      retained[b] += w2;
      if (visitor) visitor(t, static_cast<std::uint32_t>(b), v, w2);
      const std::uint32_t key = bin_key(grid, v);
      if (key == kInvalidBin) return;
      binned[b] += w2;
      maps[b][key] += w2;
    };
    if (visitor || threads == 1) {
      for (std::int64_t b = 0; b < static_cast<std::int64_t>(block); ++b) process(b);
    } else {
      parallel_for(static_cast<std::int64_t>(block), threads, process);
    }
  }

  for (std::size_t b = 0; b < block; ++b) {
    out.retained_count += counts[b];
    out.retained_energy += retained[b];
    out.binned_energy += binned[b];
  }
  if (out.retained_count == 0)
    throw AnalysisError("no coefficients above the retention threshold; lower eps_rel");
  out.tensor = freeze(maps, grid, lb);
  return out;
}

}  // namespace xtal
