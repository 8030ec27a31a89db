#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "smbm/error.hpp"
#include "smbm/kmc.hpp"

using namespace smbm;
using namespace smbm::kmc;

namespace {

// Kolmogorov-Smirnov distance of `xs` from Exponential(rate).
double ks_exponential(std::vector<double> xs, double rate) {
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * xs[i]);
    d = std::max({d, std::abs(double(i + 1) / n - f), std::abs(f - double(i) / n)});
  }
  return d;
}

}  // namespace

TEST_SUITE("kmc") {
  TEST_CASE("event_rate examples") {
    KmcParams p;
    p.r0 = 1e13;
    p.d = 0.2;
    CHECK(event_rate(p, 0.8, 0.8 / 0.2) == doctest::Approx(1e13));
    CHECK(event_rate(p, p.kT, 0.0) == doctest::Approx(1e13 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(event_rate(p, 1.0, 1.0) > event_rate(p, 1.0, 0.5));
    CHECK(event_rate(p, 0.5, 0.0) > event_rate(p, 1.0, 0.0));
    CHECK(std::isfinite(event_rate(p, -1e6, 0.0)));
  }

  TEST_CASE("series divider") {
    CHECK(series_divider(10.0, -8.0, -18.0) == doctest::Approx(0.5));
    CHECK(series_divider(10.0, 1e12, -18.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(series_divider(10.0, -18.0, -18.0), DomainError);
  }

  TEST_CASE("single event: always chosen, mean waiting time 1/r") {
    const std::vector<Event> events{{EventKind::hop, 0, 1, 250.0}};
    Rng rng = derive_stream(1, 0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const Selection s = select_event(events, rng);
      REQUIRE(s.index == 0);
      sum += s.dt;
    }
    CHECK(std::abs(sum / n * 250.0 - 1.0) < 0.02);
  }

  TEST_CASE("selection is proportional to rate") {
    const std::vector<Event> events{{EventKind::hop, 0, 1, 2.0}, {EventKind::hop, 0, 2, 6.0}};
    Rng rng = derive_stream(2, 0);
    const int n = 100000;
    int second = 0;
    for (int i = 0; i < n; ++i) second += select_event(events, rng).index == 1;
    CHECK(std::abs(second / double(n) - 0.75) < 0.01);
  }

  TEST_CASE("zero total rate stalls") {
    const std::vector<Event> events{{EventKind::hop, 0, 1, 0.0}};
    Rng rng = derive_stream(3, 0);
    CHECK(select_event(events, rng).stalled);
    CHECK(select_event(std::vector<Event>{}, rng).stalled);
  }

  TEST_CASE("waiting times on a frozen lattice are exponential") {
    const LatticeDims dims{4, 4, 4, 0.5};
    Lattice lattice(dims);
    KmcParams p = calibrated_params();
    Rng setup = derive_stream(4, 0);
    for (int i = 0; i < 30; ++i) kmc_step(lattice, p, 1.0, setup);
    const auto events = enumerate_events(lattice, p, 1.0);
    double total = 0.0;
    for (const auto& e : events) total += e.rate;
    REQUIRE(total > 0.0);

    Rng rng = derive_stream(4, 1);
    std::vector<double> dts;
    for (int i = 0; i < 10000; ++i) dts.push_back(select_event(events, rng).dt);
    // 1% critical value of the one-sample KS statistic.
    CHECK(ks_exponential(dts, total) < 1.628 / std::sqrt(10000.0));
  }

  TEST_CASE("occupancy bookkeeping") {
    const LatticeDims dims{5, 5, 6, 0.5};
    Lattice lattice(dims);
    const KmcParams p = calibrated_params();
    Rng rng = derive_stream(5, 0);
    std::size_t gens = 0, hops = 0, reds = 0;
    for (int step = 0; step < 3000 && !lattice.bridged(); ++step) {
      const std::size_t ions = lattice.ions(), atoms = lattice.atoms();
      const StepResult r = kmc_step(lattice, p, 1.2, rng);
      REQUIRE_FALSE(r.stalled);
      const long change = long(lattice.ions() + lattice.atoms()) - long(ions + atoms);
      switch (r.event.kind) {
        case EventKind::generate:
          CHECK(change == 1);
          CHECK(lattice.ions() == ions + 1);
          ++gens;
          break;
        case EventKind::hop:
          CHECK(change == 0);
          CHECK(lattice.ions() == ions);
          ++hops;
          break;
        case EventKind::reduce:
          CHECK(change == 0);
          CHECK(lattice.atoms() == atoms + 1);
          ++reds;
          break;
      }
      std::size_t ion_count = 0, atom_count = 0;
      for (std::size_t c = 0; c < dims.cells(); ++c) {
        ion_count += lattice.at(c) == Site::ion;
        atom_count += lattice.at(c) == Site::atom;
      }
      REQUIRE(ion_count == lattice.ions());
      REQUIRE(atom_count == lattice.atoms());
    }
    CHECK(gens > 0);
    CHECK(hops > 0);
    CHECK(reds > 0);
  }

  TEST_CASE("bridging") {
    Lattice lattice(LatticeDims{3, 3, 4, 0.5});
    CHECK_FALSE(lattice.bridged());
    for (std::size_t z = 0; z < 3; ++z) lattice.set(lattice.index(1, 1, z), Site::atom);
    CHECK_FALSE(lattice.bridged());
    CHECK(lattice.filament_height() == 3);
    lattice.set(lattice.index(1, 2, 3), Site::atom);
    CHECK_FALSE(lattice.bridged());
    lattice.set(lattice.index(1, 1, 3), Site::atom);
    CHECK(lattice.bridged());
  }

  TEST_CASE("trajectories are reproducible") {
    const LatticeDims dims;
    const KmcParams p = calibrated_params();
    Rng a = derive_stream(6, 0), b = derive_stream(6, 0);
    const auto x = simulate_set_ramp(dims, p, 1.0, 3.0, a);
    const auto y = simulate_set_ramp(dims, p, 1.0, 3.0, b);
    CHECK(x.did_set == y.did_set);
    CHECK(x.set_voltage == y.set_voltage);
    CHECK(x.trajectory_length == y.trajectory_length);
    CHECK(set_probability_kmc(dims, p, 0.7, 1.0, 40, 9, 1) == set_probability_kmc(dims, p, 0.7, 1.0, 40, 9, 3));
  }

  TEST_CASE("frozen and fast limits") {
    const LatticeDims dims;
    KmcParams frozen = calibrated_params();
    frozen.kT = 1e-4;
    CHECK(set_probability_kmc(dims, frozen, 0.0, 1e6, 20, 1) == 0.0);

    KmcParams fast = calibrated_params();
    CHECK(set_probability_kmc(dims, fast, 3.0, 1e3, 20, 1) == 1.0);
  }

  TEST_CASE("set probability grows with bias and window") {
    const LatticeDims dims;
    const KmcParams p = calibrated_params();
    const double lo = set_probability_kmc(dims, p, 0.5, 1.0, 200, 21);
    const double mid = set_probability_kmc(dims, p, 0.6, 1.0, 200, 21);
    const double hi = set_probability_kmc(dims, p, 0.7, 1.0, 200, 21);
    CHECK(lo <= mid);
    CHECK(mid <= hi);
    CHECK(set_probability_kmc(dims, p, 0.6, 0.3, 200, 21) <= set_probability_kmc(dims, p, 0.6, 3.0, 200, 21));
  }

  TEST_CASE("invalid input") {
    CHECK_THROWS_AS(Lattice(LatticeDims{4, 4, 1, 0.5}), InvalidParameter);
    KmcParams p;
    p.kT = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    Rng rng = derive_stream(1, 0);
    CHECK_THROWS_AS(simulate_set_ramp(LatticeDims{}, KmcParams{}, 0.0, 3.0, rng), InvalidParameter);
  }
}
