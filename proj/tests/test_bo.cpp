#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "doctest.h"
#include "smbm/bo.hpp"
#include "smbm/error.hpp"
#include "smbm/random.hpp"

using namespace smbm;
using namespace smbm::bo;

namespace {

const DesignSpace kSquare{{{"a", 0.0, 1.0}, {"b", 0.0, 1.0}}};

double bowl(std::span<const double> x) {
  return (x[0] - 0.3) * (x[0] - 0.3) + 2.0 * (x[1] - 0.7) * (x[1] - 0.7);
}

Objective noisy_bowl(std::uint64_t seed) {
  return [seed](std::span<const double> x, std::size_t index) {
    Rng rng = derive_stream(seed, index);
    return Evaluation{bowl(x) + 0.01 * standard_normal(rng), 0.01};
  };
}

double score_unit(const Surrogate& model, const AcquisitionSpec& spec, std::span<const double> u) {
  const gp::Prediction p = model.predict_unit(u);
  return acquisition(spec, p.mean, p.variance, model.best_y());
}

double mean_pairwise_distance(const std::vector<std::vector<double>>& pts) {
  double sum = 0;
  int count = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      sum += std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
      ++count;
    }
  return sum / count;
}

}  // namespace

TEST_SUITE("bo") {
  TEST_CASE("acquisition closed forms") {
    const double sigma = 0.7;
    const AcquisitionSpec ei{AcquisitionKind::ei, 0.0, 2.0};
    CHECK(std::abs(acquisition(ei, 1.0, sigma * sigma, 1.0) - sigma / std::sqrt(2.0 * std::numbers::pi)) < 1e-10);
    const AcquisitionSpec ei_margin{AcquisitionKind::ei, 0.25, 2.0};
    CHECK(std::abs(acquisition(ei_margin, 0.75, sigma * sigma, 1.0) - sigma / std::sqrt(2.0 * std::numbers::pi)) < 1e-10);
    const AcquisitionSpec pi{AcquisitionKind::pi, 0.1, 2.0};
    CHECK(std::abs(acquisition(pi, 0.9, 0.3, 1.0) - 0.5) < 1e-10);
    const AcquisitionSpec ucb{AcquisitionKind::ucb, 0.0, 2.0};
    CHECK(std::abs(acquisition(ucb, 1.5, 0.25, 0.0) - (-(1.5 - 2.0 * 0.5))) < 1e-10);

    CHECK(acquisition(ei, 100.0, 1.0, 0.0) < 1e-100);
    CHECK(acquisition(pi, 100.0, 1.0, 0.0) < 1e-100);
    CHECK(acquisition(ei, 0.4, 0.0, 1.0) == doctest::Approx(0.6));
    CHECK(acquisition(ei, 1.4, 0.0, 1.0) == 0.0);
    CHECK(acquisition(pi, 0.4, 0.0, 1.0) == 1.0);
    CHECK(acquisition(pi, 1.0, 0.0, 1.1) == 0.5);
    CHECK(acquisition(pi, 1.4, 0.0, 1.0) == 0.0);
    Rng rng = derive_stream(1, 0);
    for (int i = 0; i < 1000; ++i) {
      const double m = 4.0 * standard_normal(rng), v = std::abs(standard_normal(rng)), b = standard_normal(rng);
      CHECK(acquisition(ei, m, v, b) >= 0.0);
    }
    CHECK_THROWS_AS(AcquisitionSpec({AcquisitionKind::ucb, 0.0, 0.0}).validate(), InvalidParameter);
  }

  TEST_CASE("design space mapping") {
    const DesignSpace s{{{"g", 0.0, 1.0}, {"alpha", 2.0, 4.0}}};
    const std::vector<double> x{0.25, 3.5};
    const auto u = s.to_unit(x);
    CHECK(u[0] == 0.25);
    CHECK(u[1] == 0.75);
    CHECK(s.from_unit(u) == x);
    CHECK(s.contains(x));
    CHECK_FALSE(s.contains(std::vector<double>{0.25, 4.5}));
    CHECK_THROWS_AS(DesignSpace({{{"bad", 1.0, 1.0}}}).validate(), InvalidParameter);
    CHECK_THROWS_AS(DesignSpace{}.validate(), InvalidParameter);
  }

  TEST_CASE("unit grid order") {
    const auto g = unit_grid(2, 3);
    REQUIRE(g.size() == 9);
    CHECK(g[0] == std::vector<double>{0.0, 0.0});
    CHECK(g[1] == std::vector<double>{0.5, 0.0});
    CHECK(g[3] == std::vector<double>{0.0, 0.5});
    CHECK(g[8] == std::vector<double>{1.0, 1.0});
  }

  TEST_CASE("flat acquisition picks the lowest grid index") {
    const gp::Hyperparams hp{{0.2, 0.2}, 1.0, 0.0, 0.0};
    const DesignSpace s{{{"g", 0.0, 1.0}, {"alpha", 2.0, 4.0}}};
    const Surrogate prior(gp::Dataset{}, s, gp::KernelKind::matern52, hp);
    for (AcquisitionKind kind : {AcquisitionKind::ei, AcquisitionKind::pi, AcquisitionKind::ucb}) {
      const auto x = next_point(prior, {kind, 0.0, 2.0}, 21);
      CHECK(x == std::vector<double>{0.0, 2.0});
    }
  }

  TEST_CASE("observed minimum is not resampled") {
    const DesignSpace line{{{"x", -1.0, 1.0}}};
    gp::Dataset data;
    for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) data.push_back({{x}, x * x, 0.0});
    const Surrogate model(data, line, gp::KernelKind::matern52, gp::Hyperparams{{0.3}, 0.5, 0.0, 0.3});
    const AcquisitionSpec ei{AcquisitionKind::ei, 0.0, 2.0};
    const auto x = next_point(model, ei, 101);
    CHECK(std::abs(x[0]) > 1e-3);
    // Only the jitter-level variance is left at an interpolated point.
    const gp::Prediction at = model.predict(data[2].x);
    CHECK(acquisition(ei, at.mean, at.variance, model.best_y()) < 1e-3 * score_unit(model, ei, line.to_unit(x)));
  }

  TEST_CASE("next point attains the grid maximum") {
    Rng rng = derive_stream(3, 0);
    for (int trial = 0; trial < 6; ++trial) {
      gp::Dataset data;
      for (int i = 0; i < 8; ++i) {
        std::vector<double> x{uniform01(rng), uniform01(rng)};
        data.push_back({x, bowl(x) + 0.05 * standard_normal(rng), 0.05});
      }
      const gp::Hyperparams hp{{0.3, 0.4}, 0.2, 0.0025, 0.3};
      const Surrogate model(data, kSquare, gp::KernelKind::matern52, hp);
      for (AcquisitionKind kind : {AcquisitionKind::ei, AcquisitionKind::pi, AcquisitionKind::ucb}) {
        const AcquisitionSpec spec{kind, 0.0, 2.0};
        const auto x = next_point(model, spec, 41);
        CHECK(kSquare.contains(x));
        double grid_max = -1e300;
        for (const auto& u : unit_grid(2, 41)) grid_max = std::max(grid_max, score_unit(model, spec, u));
        CHECK(score_unit(model, spec, kSquare.to_unit(x)) >= grid_max);
        CHECK(next_point(model, spec, 41) == x);
      }
    }
  }

  TEST_CASE("next point is invariant to shifting y") {
    Rng rng = derive_stream(4, 0);
    gp::Dataset data, shifted;
    for (int i = 0; i < 7; ++i) {
      std::vector<double> x{uniform01(rng), uniform01(rng)};
      const double y = bowl(x);
      data.push_back({x, y, 0.0});
      shifted.push_back({x, y + 8.0, 0.0});
    }
    const gp::Hyperparams hp{{0.3, 0.3}, 0.3, 1e-4, 0.2};
    gp::Hyperparams hp_shift = hp;
    hp_shift.mean += 8.0;
    for (AcquisitionKind kind : {AcquisitionKind::ei, AcquisitionKind::pi, AcquisitionKind::ucb}) {
      const AcquisitionSpec spec{kind, 0.0, 2.0};
      const auto a = next_point(Surrogate(data, kSquare, gp::KernelKind::ard_se, hp), spec, 51);
      const auto b = next_point(Surrogate(shifted, kSquare, gp::KernelKind::ard_se, hp_shift), spec, 51);
      CHECK(std::abs(a[0] - b[0]) < 1e-6);
      CHECK(std::abs(a[1] - b[1]) < 1e-6);
    }
  }

  TEST_CASE("average uncertainty") {
    const gp::Hyperparams hp{{0.2, 0.2}, 2.25, 0.0, 0.0};
    const Surrogate prior(gp::Dataset{}, kSquare, gp::KernelKind::ard_se, hp);
    CHECK(avg_uncertainty(prior, 11) == doctest::Approx(1.5));

    Rng rng = derive_stream(5, 0);
    gp::Dataset data;
    double last = avg_uncertainty(prior, 21);
    for (int i = 0; i < 12; ++i) {
      data.push_back({{uniform01(rng), uniform01(rng)}, uniform01(rng), 0.0});
      const double now = avg_uncertainty(Surrogate(data, kSquare, gp::KernelKind::ard_se, hp), 21);
      CHECK(now <= last + 1e-12);
      last = now;
    }
    const auto map = posterior_map(Surrogate(data, kSquare, gp::KernelKind::ard_se, hp), 11);
    CHECK(map.size() == 121);
    for (const auto& row : map) CHECK(row.sd >= 0.0);
  }

  TEST_CASE("latin hypercube stratifies every axis") {
    const DesignSpace s{{{"g", 0.0, 1.0}, {"alpha", 2.0, 4.0}, {"c", -5.0, 5.0}}};
    const auto pts = latin_hypercube(s, 10, 77);
    REQUIRE(pts.size() == 10);
    for (std::size_t d = 0; d < 3; ++d) {
      std::set<int> strata;
      for (const auto& p : pts) {
        CHECK(s.contains(p));
        strata.insert(int(s.to_unit(p)[d] * 10.0));
      }
      CHECK(strata.size() == 10);
    }
    CHECK(latin_hypercube(s, 10, 77) == pts);
    CHECK(latin_hypercube(s, 10, 78) != pts);
  }

  TEST_CASE("loop without steps returns the initial design") {
    BoConfig cfg;
    cfg.n_init = 6;
    cfg.n_steps = 0;
    cfg.grid_points = 21;
    const BoResult r = bo_loop(noisy_bowl(1), kSquare, cfg, 9);
    CHECK(r.data.size() == 6);
    CHECK_FALSE(r.aborted);
    const auto design = latin_hypercube(kSquare, 6, 9);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(r.data[i].x == design[i]);
      CHECK(r.steps[i].step == long(i) - 5);
    }
  }

  TEST_CASE("loop bookkeeping and determinism") {
    BoConfig cfg;
    cfg.n_init = 5;
    cfg.n_steps = 6;
    cfg.grid_points = 31;
    const BoResult a = bo_loop(noisy_bowl(2), kSquare, cfg, 4);
    const BoResult b = bo_loop(noisy_bowl(2), kSquare, cfg, 4);
    REQUIRE(a.data.size() == 11);
    REQUIRE(a.steps.size() == 11);
    double best = 1e300;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
      best = std::min(best, a.data[i].y);
      CHECK(a.steps[i].best_so_far == best);
      CHECK(a.steps[i].x == b.steps[i].x);
      CHECK(a.steps[i].avg_uncertainty == b.steps[i].avg_uncertainty);
      CHECK(a.steps[i].avg_uncertainty > 0.0);
      CHECK(kSquare.contains(a.steps[i].x));
    }
    CHECK(a.steps.back().step == 6);
  }

  TEST_CASE("objective failure keeps the partial dataset") {
    BoConfig cfg;
    cfg.n_init = 5;
    cfg.n_steps = 5;
    cfg.grid_points = 21;
    auto inner = noisy_bowl(3);
    const Objective failing = [&](std::span<const double> x, std::size_t index) {
      if (index == 7) throw std::runtime_error("simulated failure");
      return inner(x, index);
    };
    const BoResult r = bo_loop(failing, kSquare, cfg, 5);
    CHECK(r.aborted);
    CHECK(r.failed_index == 7);
    CHECK(r.data.size() == 7);
    CHECK(r.failure == "simulated failure");

    const Objective nan_objective = [](std::span<const double>, std::size_t) {
      return Evaluation{std::nan(""), 0.0};
    };
    const BoResult n = bo_loop(nan_objective, kSquare, cfg, 5);
    CHECK(n.aborted);
    CHECK(n.data.empty());

    cfg.n_init = 4;
    CHECK_THROWS_AS(bo_loop(inner, kSquare, cfg, 5), InvalidParameter);
  }

  TEST_CASE("larger margin spreads the acquired points") {
    std::vector<double> spread;
    for (double margin : {-3.0, 0.0, 3.0}) {
      double total = 0.0;
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        BoConfig cfg;
        cfg.n_init = 5;
        cfg.n_steps = 10;
        cfg.grid_points = 31;
        cfg.acquisition.margin = margin;
        const BoResult r = bo_loop(noisy_bowl(seed), kSquare, cfg, 100 + seed);
        std::vector<std::vector<double>> acquired;
        for (const auto& s : r.steps)
          if (s.step > 0) acquired.push_back(s.x);
        total += mean_pairwise_distance(acquired);
      }
      spread.push_back(total / 4.0);
    }
    CHECK(spread[0] < spread[1]);
    CHECK(spread[1] < spread[2]);
  }

  TEST_CASE("convergence error") {
    const std::vector<double> trace{12.0, 10.0, 10.5, 9.9, 11.0};
    CHECK(convergence_error(trace, 2, 4) == doctest::Approx(0.1 / 9.9));
    CHECK(convergence_error(trace, 2, 4) == doctest::Approx(0.0101).epsilon(1e-2));
    CHECK(convergence_error(trace, 4, 5) == 0.0);
    CHECK_THROWS_AS(convergence_error(trace, 3, 3), InvalidParameter);
    CHECK_THROWS_AS(convergence_error(trace, 0, 3), InvalidParameter);
    CHECK_THROWS_AS(convergence_error(trace, 2, 6), InvalidParameter);
    const std::vector<double> zero{1.0, 0.0};
    CHECK_THROWS_AS(convergence_error(zero, 1, 2), DomainError);
  }
}
