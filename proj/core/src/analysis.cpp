#include "xtalsst/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "xtalsst/errors.hpp"
#include "xtalsst/parallel.hpp"
#include "xtalsst/spectrum.hpp"
#include "xtalsst/wavepacket.hpp"

namespace xtal {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinAlign = 0.7;  // |cos| below this counts as unmatched

double antipodal_dist(const Vec3& u, const Vec3& c) {
  return std::min((u - c).norm(), (u + c).norm());
}

// Representative of {u, -u} closer to c.
Vec3 aligned_to(const Vec3& u, const Vec3& c) {
  return (u + c).squaredNorm() < (u - c).squaredNorm() ? Vec3(-u) : u;
}

double cell_energy(const SparseCells& cells, std::uint32_t key) {
  auto it = std::lower_bound(cells.begin(), cells.end(), key,
                             [](const auto& cell, std::uint32_t k) { return cell.first < k; });
  return (it != cells.end() && it->first == key) ? it->second : 0.0;
}

}  // namespace

std::vector<PeakBall> find_peak_balls(const SparseCells& cells, const SphericalGrid& grid,
                                      int K, double delta) {
  if (K < 1) throw ValidationError("need at least one peak ball");
  if (!(delta > 0.0)) throw ValidationError("ball radius must be positive");

  std::vector<Vec3> cart(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    cart[i] = to_cartesian(bin_center_spherical(grid, cells[i].first));

  std::vector<PeakBall> balls;
  std::vector<bool> suppressed(cells.size(), false);
  for (int round = 0; round < K; ++round) {
    std::size_t peak = cells.size();
    double best = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!suppressed[i] && cells[i].second > best) {
        best = cells[i].second;
        peak = i;
      }
    }
    if (peak == cells.size()) break;

    // Refine: energy centroid of the neighborhood around the raw peak.
    Vec3 centroid = Vec3::Zero();
    double weight = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (suppressed[i] || antipodal_dist(cart[i], cart[peak]) > delta) continue;
      centroid += cells[i].second * aligned_to(cart[i], cart[peak]);
      weight += cells[i].second;
    }
    centroid /= weight;

    PeakBall ball;
    ball.center_cart = fold_wavevector(centroid);
    ball.center_sph = to_spherical(ball.center_cart);
    ball.radius = delta;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (suppressed[i] || antipodal_dist(cart[i], ball.center_cart) > delta) continue;
      suppressed[i] = true;
      ball.members.push_back(cells[i].first);
      ball.energy += cells[i].second;
    }
    if (ball.members.empty()) {
      // The centroid drifted off the peak; claim just the peak cell.
      suppressed[peak] = true;
      ball.members.push_back(cells[peak].first);
      ball.energy = cells[peak].second;
      ball.center_cart = fold_wavevector(cart[peak]);
      ball.center_sph = to_spherical(ball.center_cart);
    }
    balls.push_back(std::move(ball));
  }

  std::stable_sort(balls.begin(), balls.end(),
                   [](const PeakBall& a, const PeakBall& b) { return a.energy > b.energy; });
  if (static_cast<int>(balls.size()) < K)
    for (auto& b : balls) b.degenerate = true;
  return balls;
}

double defect_mass(const SparseCells& cells, const std::vector<PeakBall>& balls) {
  double total = 0.0;
  for (const auto& [key, e] : cells) total += e;
  if (total <= 0.0) return 0.0;
  double captured = 0.0;
  for (const auto& b : balls) captured += b.energy;
  return captured / total;
}

std::vector<std::uint8_t> threshold_defects(const std::vector<double>& mass, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("eta must be in [0, 1]");
  std::vector<std::uint8_t> mask(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) mask[i] = mass[i] < eta ? 1 : 0;
  return mask;
}

WavevectorMatch estimate_local_wavevectors(const SparseCells& cells,
                                           const std::vector<PeakBall>& balls,
                                           const SphericalGrid& grid,
                                           const std::vector<Vec3>& refs) {
  WavevectorMatch match;
  match.nu.assign(refs.size(), Vec3::Zero());
  match.align.assign(refs.size(), 0.0);

  std::vector<Vec3> centroids;
  centroids.reserve(balls.size());
  for (const auto& ball : balls) {
    Vec3 c = Vec3::Zero();
    double w = 0.0;
    for (std::uint32_t key : ball.members) {
      const double e = cell_energy(cells, key);
      c += e * aligned_to(to_cartesian(bin_center_spherical(grid, key)), ball.center_cart);
      w += e;
    }
    centroids.push_back(w > 0.0 ? Vec3(c / w) : ball.center_cart);
  }

  std::vector<bool> ball_used(centroids.size(), false), ref_used(refs.size(), false);
  std::size_t assigned = 0;
  const std::size_t rounds = std::min(centroids.size(), refs.size());
  for (std::size_t round = 0; round < rounds; ++round) {
    double best = -1.0;
    std::size_t bi = 0, rj = 0;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      if (ball_used[i] || centroids[i].norm() == 0.0) continue;
      for (std::size_t j = 0; j < refs.size(); ++j) {
        if (ref_used[j]) continue;
        const double a =
            std::abs(centroids[i].dot(refs[j])) / (centroids[i].norm() * refs[j].norm());
        if (a > best) {
          best = a;
          bi = i;
          rj = j;
        }
      }
    }
    if (best < 0.0) break;
    ball_used[bi] = true;
    ref_used[rj] = true;
    match.nu[rj] = centroids[bi].dot(refs[rj]) < 0.0 ? Vec3(-centroids[bi]) : centroids[bi];
    match.align[rj] = best;
    ++assigned;
  }

  match.complete = assigned == refs.size() &&
                   std::all_of(match.align.begin(), match.align.end(),
                               [](double a) { return a >= kMinAlign; });
  return match;
}

Mat3 fit_inverse_gradient(const std::vector<Vec3>& nu, const std::vector<Vec3>& refs,
                          double N, double* residual) {
  if (nu.size() != refs.size()) throw ValidationError("wavevector/reference count mismatch");
  if (refs.size() < 3) throw ValidationError("need at least three reference directions");
  if (!(N > 0.0)) throw ValidationError("lattice wavenumber must be positive");

  Mat3 A = Mat3::Zero(), B = Mat3::Zero();
  for (std::size_t j = 0; j < refs.size(); ++j) {
    const Vec3 r = N * refs[j];
    A += nu[j] * r.transpose();
    B += r * r.transpose();
  }
  Eigen::FullPivLU<Mat3> lu(B);
  if (!lu.isInvertible()) throw AnalysisError("reference directions do not span 3-space");
  const Mat3 M = lu.solve(A.transpose()).transpose();

  if (residual) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < refs.size(); ++j) {
      num += (nu[j] - M * (N * refs[j])).squaredNorm();
      den += nu[j].squaredNorm();
    }
    *residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
  }
  return M;
}

PolarFactors polar_decompose(const Mat3& G) {
  Eigen::JacobiSVD<Mat3> svd(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 W = svd.matrixU();
  Vec3 s = svd.singularValues();
  const Mat3 V = svd.matrixV();
  if ((W * V.transpose()).determinant() < 0.0) {
    W.col(2) *= -1.0;
    s[2] *= -1.0;
  }
  PolarFactors out;
  out.R = W * V.transpose();
  out.U = V * s.asDiagonal() * V.transpose();
  out.ok = svd.singularValues()[2] > 1e-12 * svd.singularValues()[0];
  return out;
}

EulerAngles euler_angles(const Mat3& R) {
  if ((R.transpose() * R - Mat3::Identity()).norm() > 1e-6 || R.determinant() < 0.0)
    throw ValidationError("matrix is not a proper rotation");
  EulerAngles e;
  e.beta = std::asin(std::clamp(R(0, 2), -1.0, 1.0));
  if (std::abs(std::cos(e.beta)) < 1e-8) {
    // Gimbal: only alpha -+ gamma is determined; report it all as alpha.
    e.gamma = 0.0;
    e.alpha = R(0, 2) > 0.0 ? std::atan2(R(1, 0), R(1, 1)) : std::atan2(-R(1, 0), R(1, 1));
  } else {
    e.gamma = std::atan2(-R(0, 1), R(0, 0));
    e.alpha = std::atan2(-R(1, 2), R(2, 2));
  }
  return e;
}

namespace {

// Energy-weighted mean |xi| over the annulus, straight off the 3D spectrum.
// Unlike the radial profile this reaches past L/2 into the grid corners.
double annulus_wavenumber(const SpectralVolume& spec, double r1, double r2) {
  double num = 0.0, den = 0.0;
  const auto [n1, n2, n3] = spec.dims;
  std::size_t idx = 0;
  for (int k1 = 0; k1 < n1; ++k1)
    for (int k2 = 0; k2 < n2; ++k2)
      for (int k3 = 0; k3 < n3; ++k3, ++idx) {
        const double x1 = signed_freq(k1, n1), x2 = signed_freq(k2, n2),
                     x3 = signed_freq(k3, n3);
        const double r = std::sqrt(x1 * x1 + x2 * x2 + x3 * x3);
        if (r < r1 || r > r2 || r == 0.0) continue;
        const double e = std::norm(spec.data[idx]);
        num += e * r;
        den += e;
      }
  if (den <= 0.0) throw AnalysisError("band has zero spectral mass");
  return num / den;
}

}  // namespace

DeformationField analyze_volume(const ScalarVolume& vol, const AnalysisConfig& config) {
  validate_volume(vol);
  if (!vol.is_cube()) throw ValidationError("analysis needs a cubic volume");
  if (!(config.eta >= 0.0 && config.eta <= 1.0)) throw ValidationError("eta must be in [0, 1]");
  if (!(config.delta_cells > 0.0)) throw ValidationError("delta_cells must be positive");
  const int threads = std::max(1, config.threads);

  const SpectralVolume spec = forward_fourier(vol);
  Band band;
  if (config.band) {
    const auto [r1, r2] = *config.band;
    if (!(r1 > 0.0) || !(r2 > r1)) throw ValidationError("band override needs 0 < r1 < r2");
    band.r1 = r1;
    band.r2 = r2;
    band.N = annulus_wavenumber(spec, r1, r2);
  } else {
    band = dominant_band(radial_power_spectrum(spec, 1.0));
  }

  const WavePacketAtlas atlas =
      build_atlas(vol.dims[0], band, config.s, config.c_w, config.lb_override);
  const SphericalGrid grid =
      make_spherical_grid(band.r1, band.r2, config.dv, config.n_psi, config.n_theta);
  const std::vector<Vec3> refs = reference_wavevectors(config.lattice, 1.0, config.axial_ratio);

  // The band radius tracks |N * b1|; divide out |b1| to get the lattice N.
  const double lattice_N =
      config.lattice == LatticeType::Hexagonal ? band.N / (2.0 / std::sqrt(3.0)) : band.N;
  {
    Mat3 B = Mat3::Zero();
    for (const Vec3& r : refs) B += (lattice_N * r) * (lattice_N * r).transpose();
    if (!Eigen::FullPivLU<Mat3>(B).isInvertible())
      throw AnalysisError("reference directions do not span 3-space");
  }

  const SqueezeSummary summary =
      squeeze_volume(spec, atlas, config.eps_rel, grid, threads, nullptr);
  const SqueezeTensor& tensor = summary.tensor;

  const int lb = atlas.lb;
  const std::size_t block = static_cast<std::size_t>(lb) * lb * lb;
  const int k_ref = reference_direction_count(config.lattice);
  const double delta =
      config.delta_cells *
      std::max({grid.dv, band.N * grid.dpsi(), band.N * grid.dtheta()});

  DeformationField field;
  field.dims = {lb, lb, lb};
  field.k_ref = k_ref;
  field.mass.assign(block, 0.0);
  field.defect.assign(block, 1);
  field.nu.assign(block * k_ref, Vec3::Zero());
  field.G.assign(block, Mat3::Identity());
  field.R.assign(block, Mat3::Identity());
  field.U.assign(block, Mat3::Identity());
  field.angles.assign(block, EulerAngles{});
  field.band = band;
  field.lattice_N = lattice_N;
  field.atom_count = atlas.atoms.size();
  field.energy_residual =
      (summary.retained_energy - summary.binned_energy) / summary.retained_energy;

  parallel_for(static_cast<std::int64_t>(block), threads, [&](std::int64_t b) {
    const SparseCells& cells = tensor.cells[b];
    const auto balls = find_peak_balls(cells, grid, k_ref, delta);
    field.mass[b] = defect_mass(cells, balls);
    if (field.mass[b] < config.eta) return;

    const auto match = estimate_local_wavevectors(cells, balls, grid, refs);
    for (int j = 0; j < k_ref; ++j) field.nu[b * k_ref + j] = match.nu[j];
    if (!match.complete) return;

    const Mat3 fit = fit_inverse_gradient(match.nu, refs, lattice_N);
    // The fit maps reference directions through the transposed Jacobian;
    // transpose back so G rows are the deformation gradient's rows.
    const Mat3 G = fit.transpose();
    const PolarFactors polar = polar_decompose(G);
    if (!polar.ok) return;
    field.G[b] = G;
    field.R[b] = polar.R;
    field.U[b] = polar.U;
    field.angles[b] = euler_angles(polar.R);
    field.defect[b] = 0;
  });

  std::size_t defects = 0;
  for (const auto d : field.defect) defects += d;
  field.defect_fraction = static_cast<double>(defects) / static_cast<double>(block);
  return field;
}

namespace {

template <typename T>
std::vector<T> upsample_impl(const std::vector<T>& field, const Index3& from, const Index3& to) {
  for (int a = 0; a < 3; ++a)
    if (from[a] <= 0 || to[a] <= 0) throw ValidationError("upsample dims must be positive");
  if (field.size() != static_cast<std::size_t>(from[0]) * from[1] * from[2])
    throw ValidationError("field length does not match its dims");

  std::array<std::vector<int>, 3> map;
  for (int a = 0; a < 3; ++a) {
    map[a].resize(to[a]);
    for (int i = 0; i < to[a]; ++i)
      map[a][i] = static_cast<int>(std::llround(static_cast<double>(i) * from[a] / to[a])) %
                  from[a];
  }
  std::vector<T> out(static_cast<std::size_t>(to[0]) * to[1] * to[2]);
  std::size_t idx = 0;
  for (int i1 = 0; i1 < to[0]; ++i1)
    for (int i2 = 0; i2 < to[1]; ++i2)
      for (int i3 = 0; i3 < to[2]; ++i3, ++idx)
        out[idx] = field[(static_cast<std::size_t>(map[0][i1]) * from[1] + map[1][i2]) * from[2] +
                         map[2][i3]];
  return out;
}

}  // namespace

std::vector<double> upsample_nearest(const std::vector<double>& field, const Index3& from,
                                     const Index3& to) {
  return upsample_impl(field, from, to);
}

std::vector<std::uint8_t> upsample_nearest(const std::vector<std::uint8_t>& field,
                                           const Index3& from, const Index3& to) {
  return upsample_impl(field, from, to);
}

}  // namespace xtal
