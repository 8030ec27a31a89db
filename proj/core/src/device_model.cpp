#include "smbm/device_model.hpp"

#include <algorithm>
#include <numbers>
#include <cmath>
#include <string>

#include "smbm/error.hpp"

namespace smbm {

namespace {

// Natural-log argument clamp that keeps exp() finite.
constexpr double kExpClamp = 700.0;
constexpr double kProbClamp = 1e-6;

double clamp_exponent(double x) { return std::clamp(x, -kExpClamp, kExpClamp); }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidParameter(std::string(what) + " must be finite");
}

}  // namespace

void NeuronParams::validate() const {
  require_finite(v0_mean, "v0_mean");
  if (!(t_v > 0.0) || !std::isfinite(t_v)) throw InvalidParameter("t_v must be finite and > 0");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw InvalidParameter("t0 must be finite and > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be finite and >= 0");
}

void FetModel::validate() const {
  require_finite(t_v0, "t_v0");
  require_finite(z_prime, "z_prime");
  require_finite(v_t, "v_t");
  if (!(t_v0 > 0.0)) throw InvalidParameter("t_v0 must be > 0");
  if (!(z_prime > 0.0)) throw InvalidParameter("z_prime must be > 0");
}

void DoubleExpParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("alpha must be finite and > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidParameter("beta must be finite and > 0");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw InvalidParameter("t0 must be finite and > 0");
}

double logistic(double x) noexcept {
  x = clamp_exponent(x);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double set_probability(const NeuronParams& params, double v_bias) {
  params.validate();
  require_finite(v_bias, "v_bias");
  return logistic((v_bias - params.v0_mean) / params.t_v);
}

double double_exp_probability(const DoubleExpParams& p, double v_bias) {
  p.validate();
  require_finite(v_bias, "v_bias");
  // alpha t0 exp(beta v) evaluated in log space.
  const double log_rate = clamp_exponent(std::log(p.alpha * p.t0) + p.beta * v_bias);
  return -std::expm1(-std::exp(log_rate));
}

SigmoidParams asymptotic_sigmoid_params(const DoubleExpParams& p) {
  if (!(p.alpha * p.t0 > 0.0)) throw InvalidParameter("alpha * t0 must be > 0");
  p.validate();
  // x = alpha t0 exp(beta v) = exp(beta (v - v0)) and x / (1 + x) is the logistic.
  return SigmoidParams{-std::log(p.alpha * p.t0) / p.beta, 1.0 / p.beta};
}

double fet_resistance(double z, double v_g, double v_t) {
  require_finite(z, "z");
  require_finite(v_g, "v_g");
  require_finite(v_t, "v_t");
  if (!(v_g > v_t)) {
    throw DomainError("FET resistance model requires v_g > v_t (got v_g=" + std::to_string(v_g) +
                      ", v_t=" + std::to_string(v_t) + ")");
  }
  return z / (v_g - v_t);
}

double effective_temperature(const FetModel& fet, double v_g) {
  fet.validate();
  return fet.t_v0 * (1.0 + fet_resistance(fet.z_prime, v_g, fet.v_t));
}

double gate_for_temperature(const FetModel& fet, double t_v_target) {
  fet.validate();
  require_finite(t_v_target, "t_v_target");
  if (!(t_v_target > fet.t_v0)) {
    throw DomainError("target temperature " + std::to_string(t_v_target) +
                      " V is not above the device floor t_v0 = " + std::to_string(fet.t_v0) + " V");
  }
  return fet.v_t + fet.z_prime * fet.t_v0 / (t_v_target - fet.t_v0);
}

double smeared_set_probability(const NeuronParams& params, double v_bias) {
  params.validate();
  require_finite(v_bias, "v_bias");
  if (params.gamma == 0.0) return logistic((v_bias - params.v0_mean) / params.t_v);
  // Simpson's rule over V0 = v0_mean + gamma z, z in [-8, 8].
  constexpr int kIntervals = 800;
  constexpr double kSpan = 8.0;
  const double h = 2.0 * kSpan / kIntervals;
  double sum = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double z = -kSpan + i * h;
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    sum += w * density * logistic((v_bias - params.v0_mean - params.gamma * z) / params.t_v);
  }
  return std::clamp(sum * h / 3.0, 0.0, 1.0);
}

bool sample_neuron(const NeuronParams& params, double v_bias, Rng& rng) {
  params.validate();
  require_finite(v_bias, "v_bias");
  const double v0 = params.gamma > 0.0 ? params.v0_mean + params.gamma * standard_normal(rng) : params.v0_mean;
  const double p = logistic((v_bias - v0) / params.t_v);
  return uniform01(rng) < p;
}

namespace {

double bias_at(const std::vector<ProbabilityPoint>& sorted, double level) {
  // Linear interpolation of the first crossing of `level`.
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto& a = sorted[i - 1];
    const auto& b = sorted[i];
    if ((a.probability - level) * (b.probability - level) <= 0.0 && a.probability != b.probability) {
      return a.v_bias + (level - a.probability) * (b.v_bias - a.v_bias) / (b.probability - a.probability);
    }
  }
  return level < 0.5 ? sorted.front().v_bias : sorted.back().v_bias;
}

double sum_squares(std::span<const ProbabilityPoint> data, double v0, double t_v) {
  double ss = 0.0;
  for (const auto& d : data) {
    const double r = logistic((d.v_bias - v0) / t_v) - d.probability;
    ss += r * r;
  }
  return ss;
}

}  // namespace

SigmoidFit fit_sigmoid(std::span<const ProbabilityPoint> data) {
  if (data.size() < 3) throw FitFailure("sigmoid fit needs at least 3 points");
  std::vector<ProbabilityPoint> pts(data.begin(), data.end());
  for (auto& p : pts) {
    if (!std::isfinite(p.v_bias) || !std::isfinite(p.probability) || p.probability < 0.0 || p.probability > 1.0) {
      throw FitFailure("fit data must be finite with probabilities in [0, 1]");
    }
    p.probability = std::clamp(p.probability, kProbClamp, 1.0 - kProbClamp);
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.v_bias < b.v_bias; });
  const double span = pts.back().v_bias - pts.front().v_bias;
  if (!(span > 0.0)) throw FitFailure("sigmoid fit needs at least two distinct bias values");
  const bool flat = std::all_of(pts.begin(), pts.end(),
                                [&](const auto& p) { return p.probability == pts.front().probability; });
  if (flat) throw FitFailure("sigmoid fit data show no transition (all probabilities equal)");

  double v0 = bias_at(pts, 0.5);
  double t_v = (bias_at(pts, 0.75) - bias_at(pts, 0.25)) / 2.2;
  if (!(t_v > 0.0)) t_v = span / 4.0;

  // Optimize over (v0, log t_v) so the width stays positive.
  double log_t = std::log(t_v);
  double cost = sum_squares(pts, v0, t_v);
  SigmoidFit fit;
  fit.initial_residual = cost;
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  for (; iter < 500 && !converged; ++iter) {
    double jtj00 = 0, jtj01 = 0, jtj11 = 0, g0 = 0, g1 = 0;
    const double t = std::exp(log_t);
    for (const auto& d : pts) {
      const double z = (d.v_bias - v0) / t;
      const double s = logistic(z);
      const double ds = s * (1.0 - s);
      const double r = s - d.probability;
      const double j0 = -ds / t;  // d s / d v0
      const double j1 = -ds * z;  // d s / d log t
      jtj00 += j0 * j0;
      jtj01 += j0 * j1;
      jtj11 += j1 * j1;
      g0 += j0 * r;
      g1 += j1 * r;
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 30 && !stepped; ++attempt) {
      const double a00 = jtj00 * (1.0 + lambda) + 1e-300, a11 = jtj11 * (1.0 + lambda) + 1e-300;
      const double det = a00 * a11 - jtj01 * jtj01;
      const double d0 = -(a11 * g0 - jtj01 * g1) / det;
      const double d1 = -(a00 * g1 - jtj01 * g0) / det;
      const double trial = std::isfinite(d0) && std::isfinite(d1)
                               ? sum_squares(pts, v0 + d0, std::exp(log_t + d1))
                               : INFINITY;
      if (trial <= cost) {
        converged = std::abs(d0) <= 1e-15 * (1.0 + std::abs(v0)) && std::abs(d1) <= 1e-15;
        v0 += d0;
        log_t += d1;
        cost = trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        stepped = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!stepped) converged = true;  // no downhill step left at any damping
  }

  const double t_fit = std::exp(log_t);
  if (!std::isfinite(v0) || !std::isfinite(t_fit) || !(t_fit > 0.0) || t_fit > 1e6 * span) {
    throw FitFailure("sigmoid fit did not identify a finite transition width");
  }
  fit.v0 = v0;
  fit.t_v = t_fit;
  fit.residual = cost;
  fit.iterations = iter;
  return fit;
}

}  // namespace smbm
