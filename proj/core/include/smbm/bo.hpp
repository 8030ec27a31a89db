#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smbm/gp.hpp"

namespace smbm::bo {

struct Axis {
  std::string name;
  double low = 0.0;
  double high = 1.0;
};

struct DesignSpace {
  std::vector<Axis> axes;

  std::size_t dims() const noexcept { return axes.size(); }
  void validate() const;
  bool contains(std::span<const double> x) const;
  std::vector<double> to_unit(std::span<const double> x) const;
  std::vector<double> from_unit(std::span<const double> u) const;
};

enum class AcquisitionKind { ei, pi, ucb };

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::ei;
  double margin = 0.0;  // delta, EI and PI
  double kappa = 2.0;   // UCB

  void validate() const;
};

// Minimization convention, larger is better.
double acquisition(const AcquisitionSpec& spec, double mean, double variance, double best_y);

// Surrogate over a design space. The GP sees inputs rescaled to the unit
// cube, so length scales are fractions of each axis range.
class Surrogate {
 public:
  Surrogate(const gp::Dataset& data, const DesignSpace& space, gp::KernelKind kind, gp::Hyperparams hp);

  gp::Prediction predict(std::span<const double> x) const;
  gp::Prediction predict_unit(std::span<const double> u) const { return posterior_.predict(u); }
  // Lowest observed y, or the prior mean with no data.
  double best_y() const noexcept { return best_y_; }
  const DesignSpace& space() const noexcept { return space_; }

 private:
  DesignSpace space_;
  gp::Posterior posterior_;
  double best_y_;
};

gp::Dataset to_unit(const gp::Dataset& data, const DesignSpace& space);

// Grid with `points` values per axis, first axis varying fastest.
std::vector<std::vector<double>> unit_grid(std::size_t dims, std::size_t points);

// Grid argmax (first index wins ties) followed by a pattern-search polish
// that only accepts strict improvements. Returns physical coordinates.
std::vector<double> next_point(const Surrogate& model, const AcquisitionSpec& spec, std::size_t grid_points = 101);

// Mean posterior standard deviation over the grid.
double avg_uncertainty(const Surrogate& model, std::size_t grid_points = 101);

struct MapRow {
  std::vector<double> x;
  double mean = 0.0;
  double sd = 0.0;
};
std::vector<MapRow> posterior_map(const Surrogate& model, std::size_t grid_points = 101);

struct Evaluation {
  double y = 0.0;
  double y_se = 0.0;
};

// Called with the physical point and the 0-based evaluation index.
using Objective = std::function<Evaluation(std::span<const double> x, std::size_t index)>;

struct BoConfig {
  std::size_t n_init = 5;
  std::size_t n_steps = 25;
  gp::KernelKind kernel = gp::KernelKind::matern52;
  AcquisitionSpec acquisition;
  std::size_t grid_points = 101;
  int fit_starts = 8;
};

struct BoStep {
  // Initial-design rows are numbered 1 - n_init .. 0, acquisition steps 1..n_steps.
  long step = 0;
  std::vector<double> x;
  double y = 0.0;
  double y_se = 0.0;
  double best_so_far = 0.0;
  double avg_uncertainty = 0.0;
  gp::Hyperparams hp;
};

struct BoResult {
  gp::Dataset data;  // physical coordinates, evaluation order
  std::vector<BoStep> steps;
  gp::Hyperparams hp;  // last fit
  bool aborted = false;
  std::size_t failed_index = 0;
  std::string failure;
};

std::vector<std::vector<double>> latin_hypercube(const DesignSpace& space, std::size_t n, std::uint64_t seed);

// Initial rows report the uncertainty of their data prefix under the fit on
// the whole initial design; each later row uses the refit after that step.
BoResult bo_loop(const Objective& objective, const DesignSpace& space, const BoConfig& config,
                 std::uint64_t master_seed);

// |o_min(n) - o_min(m)| / o_min(m), where o_min(k) is the lowest value among
// the first k entries of `values`.
double convergence_error(std::span<const double> values, std::size_t n, std::size_t m);

}  // namespace smbm::bo
