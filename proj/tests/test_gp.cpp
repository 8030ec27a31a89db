#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "smbm/error.hpp"
#include "smbm/gp.hpp"
#include "smbm/random.hpp"

using namespace smbm;
using namespace smbm::gp;

namespace {

Dataset random_inputs(std::size_t n, std::size_t dims, Rng& rng) {
  Dataset data(n);
  for (auto& obs : data) {
    obs.x.resize(dims);
    for (auto& v : obs.x) v = uniform01(rng);
  }
  return data;
}

// Draws y from the GP prior with hyperparameters hp at the inputs of `data`.
void draw_from_prior(Dataset& data, KernelKind kind, const Hyperparams& hp, Rng& rng) {
  Eigen::MatrixXd k = gram(kind, hp, data);
  k.diagonal().array() += hp.noise + 1e-10 * hp.amplitude;
  const Eigen::MatrixXd l = k.llt().matrixL();
  Eigen::VectorXd z(k.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = standard_normal(rng);
  const Eigen::VectorXd y = l * z;
  for (std::size_t i = 0; i < data.size(); ++i) data[i].y = hp.mean + y(Eigen::Index(i));
}

}  // namespace

TEST_SUITE("gp") {
  TEST_CASE("kernel values") {
    const Hyperparams hp{{1.0}, 1.0, 0.0, 0.0};
    const std::vector<double> a{0.0}, b{std::sqrt(2.0)};
    CHECK(kernel_eval(KernelKind::ard_se, hp, a, b) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    const Hyperparams hp2{{0.3, 2.0}, 1.7, 0.0, 0.0};
    const std::vector<double> x{0.2, -1.0};
    CHECK(kernel_eval(KernelKind::ard_se, hp2, x, x) == 1.7);
    CHECK(kernel_eval(KernelKind::matern52, hp2, x, x) == 1.7);
    const std::vector<double> far{1e3, 1e3};
    CHECK(kernel_eval(KernelKind::matern52, hp2, x, far) < 1e-100);
    // Matern-5/2 at r = 1.
    const Hyperparams unit{{1.0}, 1.0, 0.0, 0.0};
    const std::vector<double> one{1.0};
    const double s5 = std::sqrt(5.0);
    CHECK(kernel_eval(KernelKind::matern52, unit, a, one) ==
          doctest::Approx((1.0 + s5 + 5.0 / 3.0) * std::exp(-s5)).epsilon(1e-15));
    const std::vector<double> y{0.5, 0.1};
    CHECK(kernel_eval(KernelKind::ard_se, hp2, x, y) == kernel_eval(KernelKind::ard_se, hp2, y, x));
    CHECK_THROWS_AS(kernel_eval(KernelKind::ard_se, Hyperparams{{0.0}, 1.0, 0.0, 0.0}, a, a), InvalidParameter);
  }

  TEST_CASE("Gram matrices are PSD to jitter level") {
    Rng rng = derive_stream(1, 0);
    for (KernelKind kind : {KernelKind::ard_se, KernelKind::matern52}) {
      for (int trial = 0; trial < 20; ++trial) {
        const Dataset data = random_inputs(5 + std::size_t(uniform01(rng) * 46), 2, rng);
        const Hyperparams hp{{0.05 + 2.0 * uniform01(rng), 0.05 + 2.0 * uniform01(rng)}, 0.1 + 3.0 * uniform01(rng), 0.0, 0.0};
        const Eigen::MatrixXd k = gram(kind, hp, data);
        CHECK((k - k.transpose()).norm() == 0.0);
        const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff();
        CHECK(min_eig >= -1e-8 * hp.amplitude);
      }
    }
  }

  TEST_CASE("noiseless posterior interpolates") {
    Rng rng = derive_stream(2, 0);
    Dataset data = random_inputs(12, 2, rng);
    for (auto& obs : data) obs.y = std::sin(3.0 * obs.x[0]) + obs.x[1] * obs.x[1];
    const Hyperparams hp{{0.4, 0.6}, 1.0, 0.0, 0.2};
    for (KernelKind kind : {KernelKind::ard_se, KernelKind::matern52}) {
      const Posterior post(data, kind, hp);
      for (const auto& obs : data) {
        const Prediction p = post.predict(obs.x);
        CHECK(std::abs(p.mean - obs.y) < 1e-6);
        CHECK(p.variance < 1e-6);
        CHECK(p.variance >= 0.0);
      }
    }
  }

  TEST_CASE("single point and prior reversion") {
    const Dataset data{{{0.3}, 1.5, 0.0}};
    const Hyperparams hp{{0.2}, 2.0, 0.0, -0.5};
    const Posterior post(data, KernelKind::matern52, hp);
    const Prediction at = post.predict(data[0].x);
    CHECK(at.mean == doctest::Approx(1.5).epsilon(1e-7));
    CHECK(at.variance < 1e-7);
    const Prediction far = post.predict(std::vector<double>{100.0});
    CHECK(far.mean == doctest::Approx(-0.5));
    CHECK(far.variance == doctest::Approx(2.0));

    const Posterior prior(Dataset{}, KernelKind::ard_se, hp);
    const Prediction p0 = prior.predict(std::vector<double>{0.7});
    CHECK(p0.mean == -0.5);
    CHECK(p0.variance == 2.0);
  }

  TEST_CASE("posterior variance is non-negative everywhere") {
    Rng rng = derive_stream(3, 0);
    Dataset data = random_inputs(30, 2, rng);
    for (auto& obs : data) obs.y = uniform01(rng);
    // Near-duplicate inputs stress the subtraction amp - k'K^-1k.
    data.push_back({{data[0].x[0] + 1e-9, data[0].x[1]}, data[0].y, 0.0});
    const Hyperparams hp{{0.8, 0.8}, 1.0, 1e-12, 0.0};
    const Posterior post(data, KernelKind::ard_se, hp);
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j) {
        const std::vector<double> x{i / 40.0, j / 40.0};
        CHECK(post.predict(x).variance >= 0.0);
      }
  }

  TEST_CASE("fit is at least as likely as the generating hyperparameters") {
    Rng rng = derive_stream(4, 0);
    for (KernelKind kind : {KernelKind::ard_se, KernelKind::matern52}) {
      Dataset data = random_inputs(25, 2, rng);
      const Hyperparams truth{{0.3, 0.5}, 1.5, 1e-4, 0.7};
      draw_from_prior(data, kind, truth, rng);
      const FitResult fit = gp_fit(data, kind, {8, 11});
      CHECK(fit.log_likelihood >= log_marginal_likelihood(data, kind, truth) - 1e-9);
      CHECK(fit.log_likelihood == doctest::Approx(log_marginal_likelihood(data, kind, fit.hp)).epsilon(1e-9));
      for (double start : fit.start_log_likelihoods) CHECK(fit.log_likelihood >= start - 1e-9);
      CHECK(fit.start_log_likelihoods.size() == 8);
    }
  }

  TEST_CASE("constant data") {
    Rng rng = derive_stream(5, 0);
    Dataset data = random_inputs(8, 2, rng);
    for (auto& obs : data) obs.y = 3.25;
    const FitResult fit = gp_fit(data, KernelKind::matern52);
    CHECK(fit.hp.mean == doctest::Approx(3.25).epsilon(1e-9));
    CHECK(fit.hp.amplitude < 1e-6);
  }

  TEST_CASE("sine data") {
    const double period = 1.0;
    Dataset data;
    for (int i = 0; i < 15; ++i) {
      const double x = 2.0 * i / 14.0;
      data.push_back({{x}, std::sin(2.0 * std::numbers::pi * x / period), 0.0});
    }
    const FitResult fit = gp_fit(data, KernelKind::ard_se, {8, 3});
    CHECK(fit.hp.length_scales[0] >= period / 10.0);
    CHECK(fit.hp.length_scales[0] <= period);

    const Posterior post(data, KernelKind::ard_se, fit.hp);
    double err_gp = 0, err_mean = 0;
    double ybar = 0;
    for (const auto& obs : data) ybar += obs.y / double(data.size());
    for (int i = 0; i < 200; ++i) {
      const double x = 2.0 * (i + 0.5) / 200.0;
      const double truth = std::sin(2.0 * std::numbers::pi * x / period);
      const double m = post.predict(std::vector<double>{x}).mean;
      err_gp += (m - truth) * (m - truth);
      err_mean += (ybar - truth) * (ybar - truth);
    }
    CHECK(err_gp < 0.05 * err_mean);
  }

  TEST_CASE("leave-one-out beats the constant predictor") {
    Rng rng = derive_stream(6, 0);
    Dataset data = random_inputs(10, 2, rng);
    for (auto& obs : data) obs.y = std::exp(-2.0 * ((obs.x[0] - 0.4) * (obs.x[0] - 0.4) + (obs.x[1] - 0.6) * (obs.x[1] - 0.6)));
    double se_gp = 0, se_const = 0;
    for (std::size_t out = 0; out < data.size(); ++out) {
      Dataset rest;
      double mean = 0;
      for (std::size_t i = 0; i < data.size(); ++i)
        if (i != out) {
          rest.push_back(data[i]);
          mean += data[i].y / double(data.size() - 1);
        }
      const FitResult fit = gp_fit(rest, KernelKind::matern52, {8, out});
      const double m = gp_predict(rest, KernelKind::matern52, fit.hp, data[out].x).mean;
      se_gp += (m - data[out].y) * (m - data[out].y);
      se_const += (mean - data[out].y) * (mean - data[out].y);
    }
    CHECK(se_gp < se_const);
  }

  TEST_CASE("fit is deterministic and needs D + 3 points") {
    Rng rng = derive_stream(7, 0);
    Dataset data = random_inputs(12, 2, rng);
    for (auto& obs : data) obs.y = obs.x[0] - 2.0 * obs.x[1] + 0.01 * standard_normal(rng);
    const FitResult a = gp_fit(data, KernelKind::matern52, {8, 5});
    const FitResult b = gp_fit(data, KernelKind::matern52, {8, 5});
    CHECK(a.hp.length_scales == b.hp.length_scales);
    CHECK(a.hp.amplitude == b.hp.amplitude);
    CHECK(a.hp.noise == b.hp.noise);
    CHECK(a.log_likelihood == b.log_likelihood);

    Dataset few(data.begin(), data.begin() + 4);
    CHECK_THROWS_AS(gp_fit(few, KernelKind::matern52), FitFailure);
    CHECK_THROWS_AS(gp_fit(Dataset{}, KernelKind::matern52), FitFailure);
  }

  TEST_CASE("mismatched dimensions") {
    const Dataset data{{{0.1, 0.2}, 1.0, 0.0}};
    CHECK_THROWS_AS(Posterior(data, KernelKind::ard_se, Hyperparams{{1.0}, 1.0, 0.0, 0.0}), DimensionMismatch);
    const Posterior post(data, KernelKind::ard_se, Hyperparams{{1.0, 1.0}, 1.0, 0.0, 0.0});
    CHECK_THROWS_AS(post.predict(std::vector<double>{0.1}), DimensionMismatch);
  }
}
