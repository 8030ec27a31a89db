#include "smbm/annealer.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "smbm/error.hpp"
#include "smbm/parallel.hpp"

namespace smbm {

void CoolingSchedule::validate() const {
  if (!(t0 >= 0.0) || !std::isfinite(t0)) throw InvalidParameter("initial temperature must be finite and >= 0");
  if (!(alpha_t > 0.0)) throw InvalidParameter("cooling exponent alpha_t must be > 0");
}

double CoolingSchedule::temperature(std::size_t generation) const {
  if (generation == 0 || t0 == 0.0) return t0;
  // log1p keeps the per-generation factor accurate for large alpha_t.
  const double log_factor = std::log1p(-std::pow(10.0, -alpha_t));
  return t0 * std::exp(static_cast<double>(generation) * log_factor);
}

double cooling_temperature(const CoolingSchedule& sched, std::size_t generation) {
  sched.validate();
  return sched.temperature(generation);
}

void NoiseModel::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be finite and >= 0");
  if (!(xi_cb >= 0.0) || !std::isfinite(xi_cb)) throw InvalidParameter("xi_cb must be finite and >= 0");
}

void SaaConfig::validate() const {
  if (burn_in < 1 || avg_window < 1 || n_chains < 1) {
    throw InvalidParameter("SAA burn_in, avg_window and n_chains must all be >= 1");
  }
}

double update_probability(double gap, double temperature) {
  if (temperature < 0.0 || std::isnan(temperature)) throw InvalidParameter("temperature must be >= 0");
  if (temperature == 0.0) {
    if (gap > 0.0) return 1.0;
    if (gap < 0.0) return 0.0;
    return 0.5;
  }
  const double x = gap / temperature;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Network perturb_weights(const Network& net, double xi_cb, Rng& rng) {
  if (!(xi_cb >= 0.0)) throw InvalidParameter("xi_cb must be >= 0");
  if (xi_cb == 0.0) return net;
  Eigen::MatrixXd w = net.weights();
  Eigen::VectorXd b = net.bias();
  const Eigen::Index n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double scaled = w(i, k) * (1.0 + xi_cb * standard_normal(rng));
      w(i, k) = scaled;
      w(k, i) = scaled;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) b(i) *= 1.0 + xi_cb * standard_normal(rng);
  return Network(std::move(w), std::move(b));
}

SpinState random_state(std::size_t n, Rng& rng) {
  SpinState s(n);
  for (auto& v : s) v = static_cast<std::uint8_t>(rng() >> 63);
  return s;
}

Chain::Chain(const Network& dynamics, SpinState initial, double gain)
    : Chain(dynamics, dynamics, std::move(initial), gain) {}

Chain::Chain(const Network& dynamics, const Network& nominal, SpinState initial, double gain)
    : dynamics_(&dynamics), nominal_(&nominal), gain_(gain), state_(std::move(initial)) {
  if (nominal.size() != dynamics.size()) throw DimensionMismatch("dynamics and nominal networks differ in size");
  if (!(gain > 0.0) || !std::isfinite(gain)) throw InvalidParameter("amplifier gain must be finite and > 0");
  if (state_.size() != dynamics.size()) throw DimensionMismatch("initial state does not match network size");
  for (auto v : state_) {
    if (v > 1) throw InvalidParameter("spin state entries must be 0 or 1");
  }
  field_ = local_fields(dynamics, state_);
  if (nominal_ != dynamics_) nominal_field_ = local_fields(nominal, state_);
  order_.resize(state_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

double Chain::energy() const {
  const Eigen::VectorXd& h = nominal_ == dynamics_ ? field_ : nominal_field_;
  const Eigen::VectorXd& bias = nominal_->bias();
  double acc = 0.0;
  for (std::size_t k = 0; k < state_.size(); ++k) {
    if (state_[k]) acc += h(Eigen::Index(k)) + bias(Eigen::Index(k));
  }
  return -0.5 * acc;
}

void Chain::shuffle_order(Rng& rng) {
  // Fisher-Yates with explicit draws so the permutation is library independent.
  for (std::size_t i = order_.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(order_[i - 1], order_[j < i ? j : i - 1]);
  }
}

void Chain::update(std::size_t k, double temperature, double gamma, Rng& rng) {
  double gap = gain_ * field_(Eigen::Index(k));
  if (gamma > 0.0) gap += gamma * standard_normal(rng);
  const double p = update_probability(gap, temperature);
  const std::uint8_t next = uniform01(rng) < p ? 1 : 0;
  if (next != state_[k]) flip(k);
}

void Chain::flip(std::size_t k) {
  const double sign = state_[k] ? -1.0 : 1.0;
  state_[k] ^= 1u;
  field_.noalias() += sign * dynamics_->weights().col(Eigen::Index(k));
  if (nominal_ != dynamics_) nominal_field_.noalias() += sign * nominal_->weights().col(Eigen::Index(k));
}

void Chain::sweep(double temperature, double gamma, Rng& rng) {
  shuffle_order(rng);
  for (std::size_t k : order_) update(k, temperature, gamma, rng);
}

SpinState sweep(const Network& net, std::span<const std::uint8_t> s, double temperature,
                const NoiseModel& noise, Rng& rng) {
  noise.validate();
  if (temperature < 0.0) throw InvalidParameter("temperature must be >= 0");
  Chain chain(net, SpinState(s.begin(), s.end()));
  chain.sweep(temperature, noise.gamma, rng);
  return chain.state();
}

std::vector<double> anneal(const AnnealTarget& target, const CoolingSchedule& sched,
                           const NoiseModel& noise, std::size_t n_generations, Rng& rng,
                           const std::optional<SpinState>& initial, SpinState* final_state) {
  sched.validate();
  noise.validate();
  const Network& nominal = target.network;
  SpinState start = initial ? *initial : random_state(nominal.size(), rng);
  if (start.size() != nominal.size()) throw DimensionMismatch("initial state does not match network size");

  const Network hardware = perturb_weights(nominal, noise.xi_cb, rng);
  Chain chain(hardware, nominal, std::move(start), target.amplifier_gain);

  std::vector<double> trace;
  trace.reserve(n_generations);
  for (std::size_t g = 0; g < n_generations; ++g) {
    chain.sweep(sched.temperature(g), noise.gamma, rng);
    trace.push_back(chain.energy() + target.cost_offset);
  }
  if (final_state) *final_state = chain.state();
  return trace;
}

SaaEstimate expected_cost(const AnnealTarget& target, const DesignPoint& point, const SaaConfig& saa,
                          std::uint64_t master_seed, unsigned threads,
                          const std::optional<SpinState>& shared_initial) {
  saa.validate();
  point.schedule.validate();
  point.noise.validate();

  SaaEstimate est;
  est.chain_averages.assign(saa.n_chains, 0.0);
  const std::size_t total = saa.burn_in + saa.avg_window;
  parallel_for(saa.n_chains, threads, [&](std::size_t c) {
    Rng rng = derive_stream(master_seed, c);
    const auto trace = anneal(target, point.schedule, point.noise, total, rng, shared_initial);
    double sum = 0.0;
    for (std::size_t g = saa.burn_in; g < total; ++g) sum += trace[g];
    est.chain_averages[c] = sum / static_cast<double>(saa.avg_window);
  });

  const double n = static_cast<double>(saa.n_chains);
  est.mean = std::accumulate(est.chain_averages.begin(), est.chain_averages.end(), 0.0) / n;
  if (saa.n_chains > 1) {
    double ss = 0.0;
    for (double a : est.chain_averages) ss += (a - est.mean) * (a - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

std::vector<double> cost_distribution(const AnnealTarget& target, const DesignPoint& point,
                                      const SaaConfig& saa, std::uint64_t master_seed,
                                      unsigned threads) {
  return expected_cost(target, point, saa, master_seed, threads).chain_averages;
}

}  // namespace smbm
