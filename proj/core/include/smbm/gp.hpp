#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace smbm::gp {

enum class KernelKind { ard_se, matern52 };

// D length scales, signal variance (amplitude), observation-noise variance
// and constant prior mean: D + 3 numbers.
struct Hyperparams {
  std::vector<double> length_scales;
  double amplitude = 1.0;
  double noise = 0.0;
  double mean = 0.0;

  std::size_t dims() const noexcept { return length_scales.size(); }
  void validate() const;
};

struct Observation {
  std::vector<double> x;
  double y = 0.0;
  double y_se = 0.0;  // reported standard error of y, informational
};

using Dataset = std::vector<Observation>;

// ARD-SE:      a * exp(-r^2 / 2)
// Matern-5/2:  a * (1 + sqrt5 r + 5 r^2 / 3) * exp(-sqrt5 r)
// with r^2 = sum_d (x_d - x'_d)^2 / l_d^2.
double kernel_eval(KernelKind kind, const Hyperparams& hp, std::span<const double> x, std::span<const double> x2);

// Gram matrix of the training inputs (no noise or jitter added).
Eigen::MatrixXd gram(KernelKind kind, const Hyperparams& hp, const Dataset& data);

// Diagonal jitter added before every factorization, relative to amplitude.
inline constexpr double kJitter = 1e-8;

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // latent function variance, >= 0
};

// Conditioned GP with a cached Cholesky factor. An empty dataset gives the prior.
class Posterior {
 public:
  Posterior(const Dataset& data, KernelKind kind, Hyperparams hp);

  Prediction predict(std::span<const double> x) const;
  double log_marginal_likelihood() const noexcept { return lml_; }
  const Hyperparams& hyperparams() const noexcept { return hp_; }

 private:
  Eigen::MatrixXd inputs_;  // n x D
  KernelKind kind_;
  Hyperparams hp_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

Prediction gp_predict(const Dataset& data, KernelKind kind, const Hyperparams& hp, std::span<const double> x);

double log_marginal_likelihood(const Dataset& data, KernelKind kind, const Hyperparams& hp);

struct FitOptions {
  int starts = 8;
  std::uint64_t seed = 0;
  int max_iterations = 200;
  // Starting noise variance; <= 0 derives it from the reported y_se.
  double initial_noise = -1.0;
  // Replaces the second initialization when set (e.g. the previous fit).
  std::optional<Hyperparams> warm_start;
};

struct FitResult {
  Hyperparams hp;
  double log_likelihood = 0.0;
  std::vector<double> start_log_likelihoods;  // at each initialization
};

// Multi-start quasi-Newton ascent of the log marginal likelihood over log
// length scales, log amplitude and log noise; the constant mean is profiled
// out in closed form at every evaluation. Needs at least D + 3 points.
FitResult gp_fit(const Dataset& data, KernelKind kind, const FitOptions& options = {});

}  // namespace smbm::gp
