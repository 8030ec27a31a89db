#pragma once

#include <span>
#include <vector>

#include "smbm/random.hpp"

namespace smbm {

// Sigmoid SET-probability parameters of one stochastic memristor neuron.
// v0_mean is the 50% bias point, gamma the std of V0 across samplings and
// t_v the effective "temperature" (volts). t0 is the sampling window.
struct NeuronParams {
  double v0_mean = 0.93;
  double gamma = 0.0;
  double t_v = 0.1;
  double t0 = 0.3;

  void validate() const;
};

// Series FET model: R_FET = Z / (V_g - V_T) above threshold, and the
// effective temperature T_V = T_V0 * (1 + Z' / (V_g - V_T)), Z' = Z / R_M.
struct FetModel {
  double t_v0 = 0.05;
  double z_prime = 10.0;
  double v_t = -18.0;

  void validate() const;
};

// Microscopic hopping model P = 1 - exp(-alpha * t0 * exp(beta * V)).
struct DoubleExpParams {
  double alpha = 1.0;
  double beta = 10.0;
  double t0 = 0.3;

  void validate() const;
};

struct SigmoidParams {
  double v0 = 0.0;
  double t_v = 0.0;
};

double logistic(double x) noexcept;

// 1 / (1 + exp(-(v_bias - v0_mean) / t_v)); gamma is ignored.
double set_probability(const NeuronParams& params, double v_bias);

// Saturates to 1 when the inner exponential overflows.
double double_exp_probability(const DoubleExpParams& p, double v_bias);

// Small-bias sigmoid limit of the double exponential: t_v = 1/beta,
// v0 = -ln(alpha t0) / beta, where alpha t0 exp(beta v) = 1.
SigmoidParams asymptotic_sigmoid_params(const DoubleExpParams& p);

// Z / (v_g - v_t); throws DomainError at or below threshold.
double fet_resistance(double z, double v_g, double v_t);

double effective_temperature(const FetModel& fet, double v_g);

// Inverse of effective_temperature. Throws DomainError when the target is at
// or below t_v0, which no gate voltage can reach.
double gate_for_temperature(const FetModel& fet, double t_v_target);

// SET probability averaged over V0 ~ N(v0_mean, gamma) by quadrature; the
// expected outcome of sample_neuron.
double smeared_set_probability(const NeuronParams& params, double v_bias);

// Draws V0 ~ N(v0_mean, gamma), then a Bernoulli with the resulting sigmoid.
bool sample_neuron(const NeuronParams& params, double v_bias, Rng& rng);

struct ProbabilityPoint {
  double v_bias = 0.0;
  double probability = 0.0;
};

struct SigmoidFit {
  double v0 = 0.0;
  double t_v = 0.0;
  double residual = 0.0;          // sum of squared probability residuals
  double initial_residual = 0.0;  // at the starting guess
  int iterations = 0;
};

// Damped least-squares (Levenberg-Marquardt) fit of the sigmoid. Requires at
// least 3 points and 2 distinct biases; throws FitFailure otherwise or when
// the data do not identify a finite transition width.
SigmoidFit fit_sigmoid(std::span<const ProbabilityPoint> data);

}  // namespace smbm
