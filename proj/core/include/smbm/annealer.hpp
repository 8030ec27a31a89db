#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "smbm/network.hpp"
#include "smbm/random.hpp"

namespace smbm {

// Exponential cooling T_i = T0 * (1 - 10^-alpha)^i. Larger alpha cools more
// slowly; alpha = +inf holds the temperature at T0 for every generation.
struct CoolingSchedule {
  double t0 = 0.5;
  double alpha_t = 3.0;

  void validate() const;
  double temperature(std::size_t generation) const;
};

double cooling_temperature(const CoolingSchedule& sched, std::size_t generation);

// Hardware stochasticity: gamma is the std of the neuron threshold V0 (volts),
// xi_cb the relative std of crossbar conductances.
struct NoiseModel {
  double gamma = 0.0;
  double xi_cb = 0.0;

  void validate() const;
};

// Sample-average-approximation budget per design point.
struct SaaConfig {
  std::size_t burn_in = 2000;
  std::size_t avg_window = 3000;
  std::size_t n_chains = 100;

  void validate() const;
};

// Probability that a neuron with flip gap `gap` ends in state 1. At zero
// temperature this is the step function with 1/2 at gap == 0.
double update_probability(double gap, double temperature);

// One hardware instance: every weight W_ik (i < k) and bias I_i becomes
// value * (1 + zeta), zeta ~ N(0, xi_cb), mirrored to stay symmetric.
Network perturb_weights(const Network& net, double xi_cb, Rng& rng);

// Uniformly random binary state.
SpinState random_state(std::size_t n, Rng& rng);

// One generation on a fresh copy of `s`: n single-neuron updates in a random
// permutation order, each using gap + eta with eta ~ N(0, gamma).
SpinState sweep(const Network& net, std::span<const std::uint8_t> s, double temperature,
                const NoiseModel& noise, Rng& rng);

// Stateful single chain with incrementally maintained local fields. The
// dynamics network may differ from the cost network (crossbar noise), in
// which case costs are evaluated against the nominal one.
class Chain {
 public:
  Chain(const Network& dynamics, SpinState initial, double gain = 1.0);
  Chain(const Network& dynamics, const Network& nominal, SpinState initial, double gain = 1.0);

  const SpinState& state() const noexcept { return state_; }

  // Energy of the current state under the nominal network.
  double energy() const;

  // Runs one generation. `on_update`, if set, receives the nominal energy
  // after every single-neuron update (used by property tests).
  void sweep(double temperature, double gamma, Rng& rng);

  template <typename Observer>
  void sweep_observed(double temperature, double gamma, Rng& rng, Observer&& on_update) {
    shuffle_order(rng);
    for (std::size_t k : order_) {
      update(k, temperature, gamma, rng);
      on_update(energy());
    }
  }

 private:
  void shuffle_order(Rng& rng);
  void update(std::size_t k, double temperature, double gamma, Rng& rng);
  void flip(std::size_t k);

  const Network* dynamics_;
  const Network* nominal_;
  double gain_;
  SpinState state_;
  Eigen::VectorXd field_;          // dynamics network, W s + I
  Eigen::VectorXd nominal_field_;  // empty when nominal == dynamics
  std::vector<std::size_t> order_;
};

// What the annealer minimizes: a network plus a constant that turns its
// energy into the reported cost (e.g. the timetable penalty floor).
// `amplifier_gain` maps the crossbar output (the flip gap) onto the neuron
// bias, so the device sees gain * gap + eta against temperature T.
struct AnnealTarget {
  Network network;
  double cost_offset = 0.0;
  double amplifier_gain = 1.0;
};

// Cooling schedule plus device/crossbar noise: one point of a design space.
struct DesignPoint {
  NoiseModel noise;
  CoolingSchedule schedule;
};

// Perturbs the weights once, then runs n_generations sweeps at the scheduled
// temperatures. Returns the cost after each generation. The initial state is
// drawn uniformly from `rng` unless supplied. `final_state`, if given,
// receives the last state.
std::vector<double> anneal(const AnnealTarget& target, const CoolingSchedule& sched,
                           const NoiseModel& noise, std::size_t n_generations, Rng& rng,
                           const std::optional<SpinState>& initial = std::nullopt,
                           SpinState* final_state = nullptr);

struct SaaEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> chain_averages;  // indexed by chain
};

// Sample-average approximation of the expected cost at `point`. Chain c uses
// the stream derived from (master_seed, c) for its initial state, crossbar
// draw and dynamics, so the result does not depend on `threads`.
SaaEstimate expected_cost(const AnnealTarget& target, const DesignPoint& point, const SaaConfig& saa,
                          std::uint64_t master_seed, unsigned threads = 1,
                          const std::optional<SpinState>& shared_initial = std::nullopt);

// Per-chain averaged costs (the histogram data behind expected_cost).
std::vector<double> cost_distribution(const AnnealTarget& target, const DesignPoint& point,
                                      const SaaConfig& saa, std::uint64_t master_seed,
                                      unsigned threads = 1);

}  // namespace smbm
