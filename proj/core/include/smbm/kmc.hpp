#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "smbm/random.hpp"

namespace smbm::kmc {

enum class Site : std::uint8_t { empty = 0, ion = 1, atom = 2 };

struct LatticeDims {
  std::size_t nx = 10;
  std::size_t ny = 10;
  std::size_t nz = 8;
  double spacing_nm = 0.5;

  void validate() const;
  std::size_t cells() const noexcept { return nx * ny * nz; }
};

// Switching layer between the active (top, z = nz-1) and inert (bottom,
// z = 0) electrodes. Ions enter at the top plane, hop, and are reduced to
// atoms next to the bottom electrode or an existing atom. Every atom is
// therefore connected to the bottom plane; the device is SET once an atom
// path reaches the top plane.
class Lattice {
 public:
  explicit Lattice(const LatticeDims& dims);

  const LatticeDims& dims() const noexcept { return dims_; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return (z * dims_.ny + y) * dims_.nx + x;
  }
  std::size_t z_of(std::size_t cell) const noexcept { return cell / (dims_.nx * dims_.ny); }

  Site at(std::size_t cell) const { return sites_[cell]; }
  void set(std::size_t cell, Site s);

  std::size_t ions() const noexcept { return ions_; }
  std::size_t atoms() const noexcept { return atoms_; }

  // Number of atom layers grown from the bottom electrode (max z + 1).
  std::size_t filament_height() const noexcept { return height_; }

  // 6-connected atom path from the bottom plane to the top plane.
  bool bridged() const;

  // In-bounds 6-neighbours of `cell`, as (neighbour, dz) pairs.
  template <typename Fn>
  void for_each_neighbour(std::size_t cell, Fn&& fn) const;

 private:
  LatticeDims dims_;
  std::vector<Site> sites_;
  std::size_t ions_ = 0;
  std::size_t atoms_ = 0;
  std::size_t height_ = 0;
};

template <typename Fn>
void Lattice::for_each_neighbour(std::size_t cell, Fn&& fn) const {
  const std::size_t plane = dims_.nx * dims_.ny;
  const std::size_t z = cell / plane;
  const std::size_t y = (cell % plane) / dims_.nx;
  const std::size_t x = cell % dims_.nx;
  if (x > 0) fn(cell - 1, 0);
  if (x + 1 < dims_.nx) fn(cell + 1, 0);
  if (y > 0) fn(cell - dims_.nx, 0);
  if (y + 1 < dims_.ny) fn(cell + dims_.nx, 0);
  if (z > 0) fn(cell - plane, -1);
  if (z + 1 < dims_.nz) fn(cell + plane, +1);
}

// Arrhenius rates with field-lowered barriers (energies in eV, d in nm,
// fields in V/nm). `divider` is the fraction of the applied bias that drops
// across the switching layer, R_M / (R_M + R_FET).
struct KmcParams {
  double r0 = 1e13;
  double e_b_gen = 1.0;
  double e_b_hop = 0.9;
  double e_b_rec = 0.8;
  double d = 0.5;
  double kT = 0.02585;
  double divider = 1.0;

  void validate() const;
};

// Bias fraction across the memristor when in series with the gated WSe2
// layer: 1 / (1 + z_prime / (v_g - v_t)).
double series_divider(double z_prime, double v_g, double v_t);

// r0 exp(-(barrier - d * field) / kT), exponent clamped to [-700, 600] so rates
// stay finite for any sensible r0.
double event_rate(const KmcParams& params, double barrier, double field);

enum class EventKind : std::uint8_t { generate, hop, reduce };

struct Event {
  EventKind kind;
  std::size_t from;  // site acted on (target cell for generation)
  std::size_t to;    // destination for hops, == from otherwise
  double rate;
};

// Vertical field in the not-yet-bridged gap: v_bias * divider / gap length.
double gap_field(const Lattice& lattice, const KmcParams& params, double v_bias);

// All enabled events and their rates for the current lattice at `v_bias`.
std::vector<Event> enumerate_events(const Lattice& lattice, const KmcParams& params, double v_bias);

struct Selection {
  std::size_t index = 0;
  double dt = 0.0;
  double total_rate = 0.0;
  bool stalled = false;  // no event has a positive rate
};

// Waiting time ~ Exp(R_tot) from one draw, event chosen with probability
// rate / R_tot from a second draw.
Selection select_event(std::span<const Event> events, Rng& rng);

void apply_event(Lattice& lattice, const Event& event);

struct StepResult {
  Event event{};
  double dt = 0.0;
  bool stalled = false;
};

// Enumerate, select and apply one event.
StepResult kmc_step(Lattice& lattice, const KmcParams& params, double v_bias, Rng& rng);

struct KmcOutcome {
  bool did_set = false;
  double set_time = 0.0;     // fixed-bias runs
  double set_voltage = 0.0;  // ramp runs
  std::size_t trajectory_length = 0;
};

// Constant bias until the filament bridges or t_max elapses.
KmcOutcome simulate_set_fixed_bias(const LatticeDims& dims, const KmcParams& params, double v_bias,
                                   double t_max, Rng& rng);

// Bias rising at ramp_rate (V/s) from zero until bridging or v_max. Rates are
// held constant between events, with the bias advanced by at most
// `max_bias_step` volts before they are re-evaluated.
KmcOutcome simulate_set_ramp(const LatticeDims& dims, const KmcParams& params, double ramp_rate,
                             double v_max, Rng& rng, double max_bias_step = 2e-3);

// Fraction of n_samples independent fixed-bias runs that set within t0.
// Sample s uses the stream (seed, s), so sweeps over v_bias or t0 with one
// seed share random numbers.
double set_probability_kmc(const LatticeDims& dims, const KmcParams& params, double v_bias, double t0,
                           std::size_t n_samples, std::uint64_t seed, unsigned threads = 1);

// Set voltages of n_samples independent ramps (NaN where no SET occurred).
std::vector<double> ramp_set_voltages(const LatticeDims& dims, const KmcParams& params, double ramp_rate,
                                      double v_max, std::size_t n_samples, std::uint64_t seed,
                                      unsigned threads = 1);

struct RampProtocol {
  double ramp_rate = 1.0;  // V/s
  double v_max = 3.0;
};

struct CalibrationTarget {
  double mean = 0.93;
  double std = 0.18;
};

struct CalibrationResult {
  KmcParams params;
  double mean = 0.0;
  double std = 0.0;
  double loss = 0.0;
  std::size_t evaluations = 0;
};

// Coordinate search over (log r0, E_b_hop, d) with E_b_gen = E_b_hop + 0.1 and
// E_b_rec = E_b_hop - 0.1, minimizing the squared deviation of the ramp V_SET
// mean and std from the target (both in units of the target mean) plus a
// penalty on ramps that never set.
CalibrationResult calibrate_ramp(const LatticeDims& dims, const KmcParams& start, const RampProtocol& ramp,
                                 const CalibrationTarget& target, std::size_t n_samples,
                                 std::uint64_t seed, int rounds = 4, unsigned threads = 1);

// Parameters produced by calibrate_ramp for the default lattice and ramp
// against V_SET mean 0.93 V / std 0.18 V.
KmcParams calibrated_params();

}  // namespace smbm::kmc
