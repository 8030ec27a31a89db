#include "smbm/bo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "smbm/error.hpp"
#include "smbm/random.hpp"

namespace smbm::bo {

void DesignSpace::validate() const {
  if (axes.empty()) throw InvalidParameter("design space needs at least one axis");
  for (const Axis& a : axes) {
    if (!std::isfinite(a.low) || !std::isfinite(a.high) || !(a.low < a.high)) {
      throw InvalidParameter("axis '" + a.name + "' needs finite bounds with low < high");
    }
  }
}

bool DesignSpace::contains(std::span<const double> x) const {
  if (x.size() != dims()) return false;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (!(x[d] >= axes[d].low && x[d] <= axes[d].high)) return false;
  }
  return true;
}

std::vector<double> DesignSpace::to_unit(std::span<const double> x) const {
  if (x.size() != dims()) throw DimensionMismatch("point dimension does not match design space");
  std::vector<double> u(dims());
  for (std::size_t d = 0; d < dims(); ++d) u[d] = (x[d] - axes[d].low) / (axes[d].high - axes[d].low);
  return u;
}

std::vector<double> DesignSpace::from_unit(std::span<const double> u) const {
  if (u.size() != dims()) throw DimensionMismatch("point dimension does not match design space");
  std::vector<double> x(dims());
  for (std::size_t d = 0; d < dims(); ++d) {
    const double t = std::clamp(u[d], 0.0, 1.0);
    x[d] = t == 1.0 ? axes[d].high : axes[d].low + t * (axes[d].high - axes[d].low);
  }
  return x;
}

void AcquisitionSpec::validate() const {
  if (!std::isfinite(margin)) throw InvalidParameter("acquisition margin must be finite");
  if (kind == AcquisitionKind::ucb && !(kappa > 0.0 && std::isfinite(kappa))) {
    throw InvalidParameter("UCB confidence multiplier must be > 0");
  }
}

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double acquisition(const AcquisitionSpec& spec, double mean, double variance, double best_y) {
  const double sigma = std::sqrt(std::max(variance, 0.0));
  const double improvement = best_y - spec.margin - mean;
  switch (spec.kind) {
    case AcquisitionKind::ucb:
      return -(mean - spec.kappa * sigma);
    case AcquisitionKind::pi:
      if (sigma == 0.0) return improvement > 0.0 ? 1.0 : (improvement < 0.0 ? 0.0 : 0.5);
      return normal_cdf(improvement / sigma);
    case AcquisitionKind::ei:
    default: {
      if (sigma == 0.0) return std::max(improvement, 0.0);
      const double z = improvement / sigma;
      return std::max(0.0, sigma * (z * normal_cdf(z) + normal_pdf(z)));
    }
  }
}

gp::Dataset to_unit(const gp::Dataset& data, const DesignSpace& space) {
  gp::Dataset out;
  out.reserve(data.size());
  for (const auto& o : data) out.push_back({space.to_unit(o.x), o.y, o.y_se});
  return out;
}

Surrogate::Surrogate(const gp::Dataset& data, const DesignSpace& space, gp::KernelKind kind, gp::Hyperparams hp)
    : space_(space), posterior_((space.validate(), to_unit(data, space)), kind, hp), best_y_(hp.mean) {
  if (!data.empty()) {
    best_y_ = std::numeric_limits<double>::infinity();
    for (const auto& o : data) best_y_ = std::min(best_y_, o.y);
  }
}

gp::Prediction Surrogate::predict(std::span<const double> x) const { return posterior_.predict(space_.to_unit(x)); }

std::vector<std::vector<double>> unit_grid(std::size_t dims, std::size_t points) {
  if (dims == 0) throw InvalidParameter("grid needs at least one dimension");
  if (points < 2) throw InvalidParameter("grid needs at least two points per axis");
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) total *= points;
  std::vector<std::vector<double>> grid(total, std::vector<double>(dims));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t d = 0; d < dims; ++d) {
      grid[idx][d] = double(rem % points) / double(points - 1);
      rem /= points;
    }
  }
  return grid;
}

std::vector<double> next_point(const Surrogate& model, const AcquisitionSpec& spec, std::size_t grid_points) {
  spec.validate();
  const std::size_t dims = model.space().dims();
  const double best = model.best_y();
  auto score = [&](std::span<const double> u) {
    const gp::Prediction p = model.predict_unit(u);
    return acquisition(spec, p.mean, p.variance, best);
  };

  const auto grid = unit_grid(dims, grid_points);
  std::size_t arg = 0;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = score(grid[i]);
    if (v > top) {
      top = v;
      arg = i;
    }
  }

  std::vector<double> u = grid[arg];
  double step = 0.5 / double(grid_points - 1);
  const double min_step = 1e-4 / double(grid_points - 1);
  while (step >= min_step) {
    bool moved = false;
    for (std::size_t d = 0; d < dims; ++d) {
      for (double sign : {-1.0, 1.0}) {
        std::vector<double> trial = u;
        trial[d] = std::clamp(u[d] + sign * step, 0.0, 1.0);
        if (trial[d] == u[d]) continue;
        const double v = score(trial);
        if (v > top) {
          top = v;
          u = std::move(trial);
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return model.space().from_unit(u);
}

double avg_uncertainty(const Surrogate& model, std::size_t grid_points) {
  const auto grid = unit_grid(model.space().dims(), grid_points);
  double sum = 0.0;
  for (const auto& u : grid) sum += std::sqrt(model.predict_unit(u).variance);
  return sum / double(grid.size());
}

std::vector<MapRow> posterior_map(const Surrogate& model, std::size_t grid_points) {
  const auto grid = unit_grid(model.space().dims(), grid_points);
  std::vector<MapRow> rows;
  rows.reserve(grid.size());
  for (const auto& u : grid) {
    const gp::Prediction p = model.predict_unit(u);
    rows.push_back({model.space().from_unit(u), p.mean, std::sqrt(p.variance)});
  }
  return rows;
}

std::vector<std::vector<double>> latin_hypercube(const DesignSpace& space, std::size_t n, std::uint64_t seed) {
  space.validate();
  Rng rng = derive_stream(seed, 0, 0x4c4853);
  const std::size_t dims = space.dims();
  std::vector<std::vector<double>> unit(n, std::vector<double>(dims));
  std::vector<std::size_t> perm(n);
  for (std::size_t d = 0; d < dims; ++d) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      const auto j = std::min(i - 1, static_cast<std::size_t>(uniform01(rng) * double(i)));
      std::swap(perm[i - 1], perm[j]);
    }
    for (std::size_t i = 0; i < n; ++i) unit[i][d] = (double(perm[i]) + uniform01(rng)) / double(n);
  }
  std::vector<std::vector<double>> points;
  points.reserve(n);
  for (const auto& u : unit) points.push_back(space.from_unit(u));
  return points;
}

namespace {

gp::Hyperparams fit(const gp::Dataset& data, const DesignSpace& space, const BoConfig& config, std::uint64_t seed,
                    const std::optional<gp::Hyperparams>& warm) {
  gp::FitOptions options;
  options.starts = config.fit_starts;
  options.seed = seed;
  options.warm_start = warm;
  return gp::gp_fit(to_unit(data, space), config.kernel, options).hp;
}

}  // namespace

BoResult bo_loop(const Objective& objective, const DesignSpace& space, const BoConfig& config,
                 std::uint64_t master_seed) {
  space.validate();
  config.acquisition.validate();
  if (config.n_init < space.dims() + 3) {
    throw InvalidParameter("initial design needs at least D + 3 = " + std::to_string(space.dims() + 3) +
                           " points for hyperparameter fitting");
  }

  BoResult result;
  double best = std::numeric_limits<double>::infinity();
  auto evaluate = [&](const std::vector<double>& x, long step) -> bool {
    const std::size_t index = result.data.size();
    Evaluation e;
    try {
      e = objective(x, index);
      if (!std::isfinite(e.y)) throw DomainError("objective returned a non-finite value");
    } catch (const std::exception& ex) {
      result.aborted = true;
      result.failed_index = index;
      result.failure = ex.what();
      return false;
    }
    result.data.push_back({x, e.y, e.y_se});
    best = std::min(best, e.y);
    BoStep row;
    row.step = step;
    row.x = x;
    row.y = e.y;
    row.y_se = e.y_se;
    row.best_so_far = best;
    result.steps.push_back(std::move(row));
    return true;
  };

  const auto initial = latin_hypercube(space, config.n_init, master_seed);
  for (std::size_t i = 0; i < initial.size(); ++i) {
    if (!evaluate(initial[i], long(i) + 1 - long(config.n_init))) return result;
  }

  result.hp = fit(result.data, space, config, derive_seed(master_seed, 0, 0x6670), std::nullopt);
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const gp::Dataset prefix(result.data.begin(), result.data.begin() + long(i) + 1);
    result.steps[i].avg_uncertainty =
        avg_uncertainty(Surrogate(prefix, space, config.kernel, result.hp), config.grid_points);
    result.steps[i].hp = result.hp;
  }

  for (std::size_t s = 1; s <= config.n_steps; ++s) {
    const Surrogate model(result.data, space, config.kernel, result.hp);
    const auto x = next_point(model, config.acquisition, config.grid_points);
    if (!evaluate(x, long(s))) return result;
    try {
      result.hp = fit(result.data, space, config, derive_seed(master_seed, s, 0x6670), result.hp);
    } catch (const FitFailure& ex) {
      throw FitFailure("step " + std::to_string(s) + ": " + ex.what());
    }
    BoStep& row = result.steps.back();
    row.hp = result.hp;
    row.avg_uncertainty = avg_uncertainty(Surrogate(result.data, space, config.kernel, result.hp), config.grid_points);
  }
  return result;
}

double convergence_error(std::span<const double> values, std::size_t n, std::size_t m) {
  if (n == 0 || !(n < m) || m > values.size()) {
    throw InvalidParameter("convergence error needs 0 < n < m <= trace length");
  }
  const double o_n = *std::min_element(values.begin(), values.begin() + long(n));
  const double o_m = *std::min_element(values.begin(), values.begin() + long(m));
  if (o_m == 0.0) throw DomainError("convergence error is undefined when the best value is 0");
  return std::abs(o_n - o_m) / std::abs(o_m);
}

}  // namespace smbm::bo
