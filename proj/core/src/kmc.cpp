#include "smbm/kmc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "smbm/error.hpp"
#include "smbm/parallel.hpp"

namespace smbm::kmc {

void LatticeDims::validate() const {
  if (nx < 1 || ny < 1) throw InvalidParameter("lattice nx and ny must be >= 1");
  if (nz < 2) throw InvalidParameter("lattice nz must be >= 2 (two electrode planes)");
  if (!(spacing_nm > 0.0) || !std::isfinite(spacing_nm)) throw InvalidParameter("lattice spacing must be > 0");
  if (cells() > (std::size_t{1} << 24)) throw InvalidParameter("lattice too large");
}

Lattice::Lattice(const LatticeDims& dims) : dims_(dims) {
  dims_.validate();
  sites_.assign(dims_.cells(), Site::empty);
}

void Lattice::set(std::size_t cell, Site s) {
  const Site old = sites_[cell];
  if (old == s) return;
  if (old == Site::ion) --ions_;
  if (old == Site::atom) --atoms_;
  if (s == Site::ion) ++ions_;
  if (s == Site::atom) {
    ++atoms_;
    height_ = std::max(height_, z_of(cell) + 1);
  }
  sites_[cell] = s;
  if (old == Site::atom && z_of(cell) + 1 == height_) {
    height_ = 0;
    for (std::size_t c = 0; c < sites_.size(); ++c) {
      if (sites_[c] == Site::atom) height_ = std::max(height_, z_of(c) + 1);
    }
  }
}

bool Lattice::bridged() const {
  const std::size_t plane = dims_.nx * dims_.ny;
  std::vector<std::uint8_t> seen(sites_.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t c = 0; c < plane; ++c) {
    if (sites_[c] == Site::atom) {
      seen[c] = 1;
      stack.push_back(c);
    }
  }
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    if (z_of(c) + 1 == dims_.nz) return true;
    for_each_neighbour(c, [&](std::size_t nb, int) {
      if (!seen[nb] && sites_[nb] == Site::atom) {
        seen[nb] = 1;
        stack.push_back(nb);
      }
    });
  }
  return false;
}

void KmcParams::validate() const {
  if (!(r0 >= 0.0) || !std::isfinite(r0)) throw InvalidParameter("r0 must be finite and >= 0");
  if (!(kT > 0.0) || !std::isfinite(kT)) throw InvalidParameter("kT must be finite and > 0");
  if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidParameter("hopping distance d must be finite and >= 0");
  if (!std::isfinite(e_b_gen) || !std::isfinite(e_b_hop) || !std::isfinite(e_b_rec)) {
    throw InvalidParameter("barriers must be finite");
  }
  if (!(divider > 0.0) || divider > 1.0) throw InvalidParameter("bias divider must be in (0, 1]");
}

double series_divider(double z_prime, double v_g, double v_t) {
  if (!(v_g > v_t)) throw DomainError("series divider requires v_g > v_t");
  return 1.0 / (1.0 + z_prime / (v_g - v_t));
}

double event_rate(const KmcParams& params, double barrier, double field) {
  const double exponent = std::clamp(-(barrier - params.d * field) / params.kT, -700.0, 600.0);
  return params.r0 * std::exp(exponent);
}

double gap_field(const Lattice& lattice, const KmcParams& params, double v_bias) {
  const auto& dims = lattice.dims();
  const std::size_t remaining = dims.nz - std::min(lattice.filament_height(), dims.nz - 1);
  return v_bias * params.divider / (static_cast<double>(remaining) * dims.spacing_nm);
}

std::vector<Event> enumerate_events(const Lattice& lattice, const KmcParams& params, double v_bias) {
  const auto& dims = lattice.dims();
  const double field = gap_field(lattice, params, v_bias);
  // Field points from the active top electrode towards the bottom one, so a
  // downward hop gains d * field and an upward hop loses it.
  const double r_gen = event_rate(params, params.e_b_gen, field);
  const double r_down = event_rate(params, params.e_b_hop, field);
  const double r_side = event_rate(params, params.e_b_hop, 0.0);
  const double r_up = event_rate(params, params.e_b_hop, -field);
  const double r_rec = event_rate(params, params.e_b_rec, field);

  std::vector<Event> events;
  const std::size_t plane = dims.nx * dims.ny;
  const std::size_t top = (dims.nz - 1) * plane;
  for (std::size_t c = top; c < top + plane; ++c) {
    if (lattice.at(c) == Site::empty) events.push_back({EventKind::generate, c, c, r_gen});
  }
  for (std::size_t c = 0; c < dims.cells(); ++c) {
    if (lattice.at(c) != Site::ion) continue;
    bool reducible = lattice.z_of(c) == 0;
    lattice.for_each_neighbour(c, [&](std::size_t nb, int dz) {
      const Site s = lattice.at(nb);
      if (s == Site::atom) reducible = true;
      if (s != Site::empty) return;
      const double r = dz < 0 ? r_down : (dz > 0 ? r_up : r_side);
      events.push_back({EventKind::hop, c, nb, r});
    });
    if (reducible) events.push_back({EventKind::reduce, c, c, r_rec});
  }
  return events;
}

Selection select_event(std::span<const Event> events, Rng& rng) {
  Selection sel;
  double total = 0.0;
  for (const auto& e : events) total += e.rate;
  sel.total_rate = total;
  if (!(total > 0.0) || !std::isfinite(total)) {
    sel.stalled = !(total > 0.0);
    if (sel.stalled) return sel;
  }
  const double u_time = 1.0 - uniform01(rng);  // (0, 1]
  sel.dt = -std::log(u_time) / total;
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  sel.index = events.size() - 1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    acc += events[i].rate;
    if (target < acc) {
      sel.index = i;
      break;
    }
  }
  // Guard against rounding landing on a zero-rate tail entry.
  while (sel.index > 0 && events[sel.index].rate == 0.0) --sel.index;
  return sel;
}

void apply_event(Lattice& lattice, const Event& event) {
  switch (event.kind) {
    case EventKind::generate:
      lattice.set(event.from, Site::ion);
      break;
    case EventKind::hop:
      lattice.set(event.from, Site::empty);
      lattice.set(event.to, Site::ion);
      break;
    case EventKind::reduce:
      lattice.set(event.from, Site::atom);
      break;
  }
}

StepResult kmc_step(Lattice& lattice, const KmcParams& params, double v_bias, Rng& rng) {
  const auto events = enumerate_events(lattice, params, v_bias);
  const Selection sel = select_event(events, rng);
  StepResult out;
  if (sel.stalled) {
    out.stalled = true;
    return out;
  }
  out.event = events[sel.index];
  out.dt = sel.dt;
  apply_event(lattice, out.event);
  return out;
}

KmcOutcome simulate_set_fixed_bias(const LatticeDims& dims, const KmcParams& params, double v_bias,
                                   double t_max, Rng& rng) {
  params.validate();
  if (!(t_max > 0.0)) throw InvalidParameter("t_max must be > 0");
  Lattice lattice(dims);
  KmcOutcome out;
  double t = 0.0;
  for (;;) {
    const StepResult step = kmc_step(lattice, params, v_bias, rng);
    if (step.stalled) return out;
    t += step.dt;
    if (t > t_max) return out;
    ++out.trajectory_length;
    if (step.event.kind == EventKind::reduce && lattice.bridged()) {
      out.did_set = true;
      out.set_time = t;
      return out;
    }
  }
}

KmcOutcome simulate_set_ramp(const LatticeDims& dims, const KmcParams& params, double ramp_rate,
                             double v_max, Rng& rng, double max_bias_step) {
  params.validate();
  if (!(ramp_rate > 0.0)) throw InvalidParameter("ramp_rate must be > 0");
  if (!(max_bias_step > 0.0)) throw InvalidParameter("max_bias_step must be > 0");
  Lattice lattice(dims);
  KmcOutcome out;
  double t = 0.0;
  const double t_end = v_max / ramp_rate;
  const double max_dt = max_bias_step / ramp_rate;
  while (t < t_end) {
    const double v = ramp_rate * t;
    const auto events = enumerate_events(lattice, params, v);
    const Selection sel = select_event(events, rng);
    // Rates are only valid while the bias stays within max_bias_step; past
    // that, the pending event is discarded (memoryless) and rates refreshed.
    if (sel.stalled || sel.dt > max_dt) {
      t += max_dt;
      continue;
    }
    t += sel.dt;
    if (t >= t_end) break;
    apply_event(lattice, events[sel.index]);
    ++out.trajectory_length;
    if (events[sel.index].kind == EventKind::reduce && lattice.bridged()) {
      out.did_set = true;
      out.set_time = t;
      out.set_voltage = ramp_rate * t;
      return out;
    }
  }
  return out;
}

double set_probability_kmc(const LatticeDims& dims, const KmcParams& params, double v_bias, double t0,
                           std::size_t n_samples, std::uint64_t seed, unsigned threads) {
  if (n_samples < 1) throw InvalidParameter("n_samples must be >= 1");
  std::vector<std::uint8_t> set(n_samples, 0);
  parallel_for(n_samples, threads, [&](std::size_t s) {
    Rng rng = derive_stream(seed, s);
    set[s] = simulate_set_fixed_bias(dims, params, v_bias, t0, rng).did_set ? 1 : 0;
  });
  const auto hits = std::accumulate(set.begin(), set.end(), std::size_t{0});
  return static_cast<double>(hits) / static_cast<double>(n_samples);
}

std::vector<double> ramp_set_voltages(const LatticeDims& dims, const KmcParams& params, double ramp_rate,
                                      double v_max, std::size_t n_samples, std::uint64_t seed,
                                      unsigned threads) {
  std::vector<double> v(n_samples, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n_samples, threads, [&](std::size_t s) {
    Rng rng = derive_stream(seed, s);
    const auto out = simulate_set_ramp(dims, params, ramp_rate, v_max, rng);
    if (out.did_set) v[s] = out.set_voltage;
  });
  return v;
}

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
  std::size_t missing = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) {
      ++m.missing;
      continue;
    }
    m.mean += x;
    ++n;
  }
  if (n == 0) return m;
  m.mean /= static_cast<double>(n);
  for (double x : v) {
    if (!std::isnan(x)) m.std += (x - m.mean) * (x - m.mean);
  }
  m.std = n > 1 ? std::sqrt(m.std / static_cast<double>(n - 1)) : 0.0;
  return m;
}

KmcParams with_coordinates(KmcParams p, double log10_r0, double e_hop, double d) {
  p.r0 = std::pow(10.0, log10_r0);
  p.e_b_hop = e_hop;
  p.e_b_gen = e_hop + 0.1;
  p.e_b_rec = e_hop - 0.1;
  p.d = d;
  return p;
}

}  // namespace

CalibrationResult calibrate_ramp(const LatticeDims& dims, const KmcParams& start, const RampProtocol& ramp,
                                 const CalibrationTarget& target, std::size_t n_samples,
                                 std::uint64_t seed, int rounds, unsigned threads) {
  start.validate();
  std::array<double, 3> x{std::log10(start.r0), start.e_b_hop, start.d};
  std::array<double, 3> step{0.5, 0.01, 0.02};
  std::size_t evaluations = 0;

  auto evaluate = [&](const std::array<double, 3>& c) {
    CalibrationResult r;
    r.loss = std::numeric_limits<double>::infinity();
    if (c[2] <= 0.0) return r;
    r.params = with_coordinates(start, c[0], c[1], c[2]);
    const auto v = ramp_set_voltages(dims, r.params, ramp.ramp_rate, ramp.v_max, n_samples, seed, threads);
    const Moments m = moments(v);
    r.mean = m.mean;
    r.std = m.std;
    const double miss = static_cast<double>(m.missing) / static_cast<double>(n_samples);
    const double em = (m.mean - target.mean) / target.mean;
    const double es = (m.std - target.std) / target.mean;
    r.loss = em * em + es * es + 10.0 * miss;
    ++evaluations;
    return r;
  };

  CalibrationResult best = evaluate(x);
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t axis = 0; axis < 3; ++axis) {
      for (double dir : {-1.0, 1.0}) {
        for (;;) {
          auto trial_x = x;
          trial_x[axis] += dir * step[axis];
          CalibrationResult trial = evaluate(trial_x);
          if (!(trial.loss < best.loss)) break;
          best = trial;
          x = trial_x;
        }
      }
    }
    for (double& s : step) s *= 0.5;
  }
  best.evaluations = evaluations;
  return best;
}

KmcParams calibrated_params() {
  // calibrate_ramp from (1e13, 0.69 eV, 0.05 nm), 200 ramps per evaluation,
  // seed 2024, 3 rounds: 20 evaluations, V_SET 0.950 +- 0.116 V.
  KmcParams p;
  p.r0 = 1e13;
  p.e_b_hop = 0.69;
  p.e_b_gen = 0.79;
  p.e_b_rec = 0.59;
  p.d = 0.07;
  return p;
}

}  // namespace smbm::kmc
