#include "macrodimer/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "macrodimer/error.hpp"
#include "macrodimer/parallel.hpp"

namespace macrodimer {

namespace {

using Solver = Eigen::SelfAdjointEigenSolver<ComplexMatrix>;

ProductBasis sector_basis(const SectorLabel& sector) {
  ProductBasis basis = build_basis(2, sector.p_excitations);
  if (sector.total_twice_jz) return basis.with_total_jz(*sector.total_twice_jz);
  return basis;
}

// Eigenvector of the sector Hamiltonian at separation r that best matches `guess`.
struct TrackedPoint {
  double energy = 0.0;
  ComplexVector psi;
  double slope = 0.0;  // dE/dR
};

TrackedPoint track_on_axis(const InteractionModel& model, double r, const ComplexVector& guess) {
  const Geometry g = Geometry::pair_on_axis(r);
  Solver es(model.hamiltonian(g));
  const Eigen::VectorXd overlaps = (es.eigenvectors().adjoint() * guess).cwiseAbs2();
  Eigen::Index k = 0;
  overlaps.maxCoeff(&k);
  TrackedPoint p;
  p.energy = es.eigenvalues()[k];
  p.psi = es.eigenvectors().col(k);
  const std::complex<double> ph = p.psi.dot(guess);
  if (std::abs(ph) > 0) p.psi *= ph / std::abs(ph);
  p.slope = model.dipole_dipole_gradient(g, p.psi)[1].z();
  return p;
}

ComplexVector embed(const ProductBasis& from, const ProductBasis& to, const ComplexVector& v) {
  ComplexVector out = ComplexVector::Zero(to.dimension());
  for (int i = 0; i < from.dimension(); ++i) {
    const int j = to.index_of(from.state(i));
    if (j < 0) throw InvalidArgument("sector state missing from the target basis");
    out[j] = v[i];
  }
  return out;
}

}  // namespace

std::vector<double> linear_grid(double r_min, double r_max, int points) {
  if (points < 2 || !(r_max > r_min)) throw InvalidArgument("grid needs at least two ascending points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = r_min + (r_max - r_min) * i / (points - 1);
  return g;
}

std::vector<double> default_well_grid(const PhysicalConfig& config) {
  const double r0 = config.r0();
  return linear_grid(0.8 * r0, 12.0 * r0, 2241);
}

BOSurface bo_surface(const PhysicalConfig& config, const std::vector<double>& r_grid, const SectorLabel& sector,
                     int threads) {
  if (r_grid.size() < 2) throw InvalidArgument("separation grid needs at least two points");
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (!(r_grid[i] > r_grid[i - 1])) throw InvalidArgument("separation grid must be strictly ascending");
  if (r_grid.front() < 0.5 * config.r0())
    throw InvalidArgument("separation grid probes R < 0.5 r0, outside the model's validity");

  auto model = std::make_shared<const InteractionModel>(config, sector_basis(sector));
  const int dim = model->dimension();
  const std::size_t n = r_grid.size();

  BOSurface s;
  s.r_grid = r_grid;
  s.sector = sector;
  s.basis = model->basis_ptr();
  s.energies.resize(static_cast<Eigen::Index>(n), dim);
  s.vectors.resize(n);
  std::vector<Eigen::VectorXd> values(n);

  parallel_for(n, threads, [&](std::size_t i) {
    Solver es(model->hamiltonian(Geometry::pair_on_axis(r_grid[i])));
    values[i] = es.eigenvalues();
    s.vectors[i] = es.eigenvectors();
  });

  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::vector<std::pair<double, std::pair<int, int>>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (!values[i].allFinite()) throw Error("non-finite eigenvalue at R = " + std::to_string(r_grid[i]));
    if (i == 0) {
      s.energies.row(0) = values[0].transpose();
      for (int k = 0; k < dim; ++k) {
        ComplexVector v = s.vectors[0].col(k);
        fix_phase(v);
        s.vectors[0].col(k) = v;
      }
      continue;
    }
    const Eigen::MatrixXd ov = (s.vectors[i - 1].adjoint() * s.vectors[i]).cwiseAbs2();
    candidates.clear();
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) candidates.push_back({ov(a, b), {a, b}});
    std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    std::vector<char> used_prev(static_cast<std::size_t>(dim), 0), used_now(static_cast<std::size_t>(dim), 0);
    int assigned = 0;
    for (const auto& [w, ab] : candidates) {
      const auto [a, b] = ab;
      if (used_prev[static_cast<std::size_t>(a)] || used_now[static_cast<std::size_t>(b)]) continue;
      if (w <= 0.5) {
        std::ostringstream msg;
        msg << "eigenvector tracking lost between R = " << r_grid[i - 1] << " and " << r_grid[i]
            << " um (overlap " << w << "); refine the grid";
        throw GridTooCoarse(msg.str());
      }
      s.min_overlap = std::min(s.min_overlap, w);
      perm[static_cast<std::size_t>(a)] = b;
      used_prev[static_cast<std::size_t>(a)] = used_now[static_cast<std::size_t>(b)] = 1;
      if (++assigned == dim) break;
    }
    ComplexMatrix sorted(dim, dim);
    for (int a = 0; a < dim; ++a) {
      const int b = perm[static_cast<std::size_t>(a)];
      s.energies(static_cast<Eigen::Index>(i), a) = values[i][b];
      ComplexVector v = s.vectors[i].col(b);
      const std::complex<double> ph = v.dot(s.vectors[i - 1].col(a));
      if (std::abs(ph) > 0) v *= ph / std::abs(ph);
      sorted.col(a) = v;
    }
    s.vectors[i] = std::move(sorted);
  }
  return s;
}

std::vector<BOSurface> bo_surfaces(const PhysicalConfig& config, const std::vector<double>& r_grid, int threads) {
  std::vector<BOSurface> out;
  for (int m : build_basis(2, 1).total_jz_sectors()) out.push_back(bo_surface(config, r_grid, {1, m}, threads));
  return out;
}

std::optional<WellDescriptor> find_well(const BOSurface& surface, const PhysicalConfig& config) {
  const auto& r = surface.r_grid;
  const Eigen::Index n = static_cast<Eigen::Index>(r.size());
  if (n < 3) return std::nullopt;

  std::optional<WellDescriptor> best;
  Eigen::Index best_i = 0;
  for (int k = 0; k < surface.branch_count(); ++k) {
    const Eigen::VectorXd e = surface.energies.col(k);
    const double asymptote = e[n - 1];
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      if (!(e[i] < e[i - 1] && e[i] <= e[i + 1])) continue;
      double barrier = e[i];
      for (Eigen::Index j = i + 1; j < n; ++j) {
        barrier = std::max(barrier, e[j]);
        if (j + 1 < n && e[j] > e[j + 1]) break;  // first outward local maximum
      }
      const double depth = std::min(barrier, asymptote) - e[i];
      if (depth <= 0) continue;
      if (!best || depth > best->depth) {
        best = WellDescriptor{};
        best->branch_id = k;
        best->depth = depth;
        best->barrier = std::min(barrier, asymptote);
        best->energy_min = e[i];
        best->r_p = r[static_cast<std::size_t>(i)];
        best_i = i;
      }
    }
  }
  if (!best) return std::nullopt;

  // three-point parabolic refinement
  const Eigen::VectorXd e = surface.energies.col(best->branch_id);
  const double x0 = r[static_cast<std::size_t>(best_i - 1)], x1 = r[static_cast<std::size_t>(best_i)],
               x2 = r[static_cast<std::size_t>(best_i + 1)];
  const double y0 = e[best_i - 1], y1 = e[best_i], y2 = e[best_i + 1];
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
  double rp = (a > 0) ? std::clamp(-b / (2 * a), x0, x2) : x1;

  // Newton polish on the Hellmann-Feynman slope
  const InteractionModel model(config, *surface.basis);
  ComplexVector guess = surface.vectors[static_cast<std::size_t>(best_i)].col(best->branch_id);
  const double h = 1e-4;
  for (int it = 0; it < 50; ++it) {
    const TrackedPoint c = track_on_axis(model, rp, guess);
    const TrackedPoint p = track_on_axis(model, rp + h, c.psi);
    const TrackedPoint m = track_on_axis(model, rp - h, c.psi);
    guess = c.psi;
    const double curv = (p.slope - m.slope) / (2 * h);
    if (!(curv > 0)) break;
    const double step = std::clamp(-c.slope / curv, x0 - rp, x2 - rp);
    rp += step;
    if (std::abs(step) < 1e-13) break;
  }
  const TrackedPoint c = track_on_axis(model, rp, guess);
  const double h2 = 5e-3;
  const TrackedPoint p = track_on_axis(model, rp + h2, c.psi);
  const TrackedPoint m = track_on_axis(model, rp - h2, c.psi);
  const double v2 = (p.energy - 2 * c.energy + m.energy) / (h2 * h2);
  const double mu = config.reduced_mass();

  best->r_p = rp;
  best->energy_min = c.energy;
  best->depth = best->barrier - c.energy;
  best->omega_vib = v2 > 0 ? std::sqrt(v2 / mu) : 0.0;
  best->omega_rot = 1.0 / (mu * rp * rp);
  best->sector = surface.sector;
  return best;
}

std::optional<WellDescriptor> locate_well(const PhysicalConfig& config, int threads) {
  std::optional<WellDescriptor> best;
  for (const BOSurface& s : bo_surfaces(config, default_well_grid(config), threads)) {
    auto w = find_well(s, config);
    if (w && (!best || w->depth > best->depth + 1e-9 * std::abs(config.delta))) best = w;
  }
  return best;
}

void fix_phase(ComplexVector& v) {
  if (v.size() == 0) return;
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  const std::complex<double> c = v[k];
  if (std::abs(c) > 0) v *= std::conj(c) / std::abs(c);
}

ContinuationResult continue_eigenvector(const std::function<ComplexMatrix(double)>& hamiltonian,
                                        const ComplexVector& psi0, int initial_steps, double min_step) {
  const double max_step = 1.0 / std::max(1, initial_steps);
  ContinuationResult res;
  res.psi = psi0.normalized();
  double s = 0.0;
  double h = max_step;
  Solver es;
  while (s < 1.0) {
    const double target = std::min(1.0, s + h);
    es.compute(hamiltonian(target));
    const Eigen::VectorXd& w = es.eigenvalues();
    const ComplexVector c = es.eigenvectors().adjoint() * res.psi;
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    double best_weight = -1.0;
    Eigen::Index best_lo = 0, best_hi = 0;
    for (Eigen::Index lo = 0; lo < w.size();) {
      Eigen::Index hi = lo + 1;
      while (hi < w.size() && w[hi] - w[hi - 1] < 1e-9 * scale) ++hi;
      const double weight = c.segment(lo, hi - lo).squaredNorm();
      if (weight > best_weight) {
        best_weight = weight;
        best_lo = lo;
        best_hi = hi;
      }
      lo = hi;
    }
    if (best_weight > 0.9) {
      const auto len = best_hi - best_lo;
      ComplexVector next = es.eigenvectors().middleCols(best_lo, len) * c.segment(best_lo, len);
      next.normalize();
      res.psi = next;
      res.energy = w.segment(best_lo, len).mean();
      res.min_overlap = std::min(res.min_overlap, best_weight);
      ++res.steps;
      s = target;
      h = std::min(max_step, 2 * h);
    } else {
      h *= 0.5;
      if (h < min_step) {
        std::ostringstream msg;
        msg << "bound state lost at homotopy parameter " << s << " (best overlap " << best_weight << ")";
        throw ContinuationLost(msg.str());
      }
    }
  }
  fix_phase(res.psi);
  return res;
}

BoundStateTracker::BoundStateTracker(const PhysicalConfig& config, int threads) {
  auto w = locate_well(config, threads);
  if (!w) throw ContinuationLost("no bound well found for this configuration");
  well_ = *w;
  model_ = std::make_shared<const InteractionModel>(config, build_basis(2, 1));
  init_reference();
}

BoundStateTracker::BoundStateTracker(const PhysicalConfig& config, const WellDescriptor& well) : well_(well) {
  model_ = std::make_shared<const InteractionModel>(config, build_basis(2, 1));
  init_reference();
}

void BoundStateTracker::init_reference() {
  const InteractionModel sector(model_->config(), sector_basis(well_.sector));
  const Geometry g = Geometry::pair_on_axis(well_.r_p);
  Solver es_sector(sector.hamiltonian(g));
  Eigen::Index k = 0;
  (es_sector.eigenvalues().array() - well_.energy_min).abs().minCoeff(&k);
  const ComplexVector seed = embed(sector.basis(), model_->basis(), es_sector.eigenvectors().col(k));

  const ComplexMatrix h = model_->hamiltonian(g);
  const ContinuationResult r = continue_eigenvector([&](double) { return h; }, seed);
  reference_.energy = r.energy;
  reference_.psi = r.psi;
  reference_.basis = model_->basis_ptr();
  reference_.geometry = g;
}

BoundState BoundStateTracker::solve(const Geometry& geometry, const BoundState* from,
                                    const AppliedField* field) const {
  if (geometry.size() != 2) throw InvalidArgument("bound state needs a two-atom geometry");
  geometry.validate();
  if (field != nullptr && field->alpha != 0.0 && from == nullptr)
    return solve_with_field(solve(geometry), *field);
  const BoundState& start = from ? *from : reference_;
  const Vec3 ca = 0.5 * (start.geometry.positions[0] + start.geometry.positions[1]);
  const Vec3 cb = 0.5 * (geometry.positions[0] + geometry.positions[1]);
  const Vec3 ra = start.geometry.positions[1] - start.geometry.positions[0];
  const Vec3 rb = geometry.positions[1] - geometry.positions[0];
  const double la = ra.norm(), lb = rb.norm();
  const Vec3 na = ra / la, nb = rb / lb;
  const double theta = std::acos(std::clamp(na.dot(nb), -1.0, 1.0));
  Vec3 axis = na.cross(nb);
  if (axis.norm() < 1e-12) axis = na.unitOrthogonal();
  axis.normalize();

  auto geometry_at = [&](double s) {
    const Vec3 c = (1 - s) * ca + s * cb;
    const Vec3 n = Eigen::AngleAxisd(s * theta, axis) * na;
    const Vec3 rel = ((1 - s) * la + s * lb) * n;
    return Geometry{{c - 0.5 * rel, c + 0.5 * rel}};
  };
  const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(lb - la) / 0.01, theta / 0.02))));
  const ContinuationResult r = continue_eigenvector(
      [&](double s) {
        return s >= 1.0 ? model_->hamiltonian(geometry, field) : model_->hamiltonian(geometry_at(s), field);
      },
      start.psi, steps);
  return BoundState{r.energy, r.psi, model_->basis_ptr(), geometry};
}

BoundState BoundStateTracker::solve_with_field(const BoundState& base, const AppliedField& field) const {
  const ComplexMatrix h0 = model_->hamiltonian(base.geometry);
  const Eigen::VectorXd u = model_->applied_diagonal(base.geometry, field);
  const ContinuationResult r = continue_eigenvector(
      [&](double s) {
        ComplexMatrix h = h0;
        h.diagonal() += (s * u).cast<std::complex<double>>();
        return h;
      },
      base.psi, 16);
  return BoundState{r.energy, r.psi, model_->basis_ptr(), base.geometry};
}

BoundState bound_state(const PhysicalConfig& config, const Geometry& geometry) {
  return BoundStateTracker(config).solve(geometry);
}

}  // namespace macrodimer
