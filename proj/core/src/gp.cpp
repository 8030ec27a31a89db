#include "smbm/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "smbm/error.hpp"
#include "smbm/random.hpp"

namespace smbm::gp {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;

double scaled_sq_dist(const Hyperparams& hp, std::span<const double> x, std::span<const double> x2) {
  double r2 = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double z = (x[d] - x2[d]) / hp.length_scales[d];
    r2 += z * z;
  }
  return r2;
}

double kernel_from_r2(KernelKind kind, double amplitude, double r2) {
  if (kind == KernelKind::ard_se) return amplitude * std::exp(-0.5 * r2);
  const double r = std::sqrt(r2);
  return amplitude * (1.0 + kSqrt5 * r + 5.0 * r2 / 3.0) * std::exp(-kSqrt5 * r);
}

Eigen::MatrixXd to_matrix(const Dataset& data, std::size_t dims) {
  Eigen::MatrixXd x(Eigen::Index(data.size()), Eigen::Index(dims));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].x.size() != dims) throw DimensionMismatch("observation dimension does not match hyperparameters");
    for (std::size_t d = 0; d < dims; ++d) x(Eigen::Index(i), Eigen::Index(d)) = data[i].x[d];
  }
  return x;
}

std::span<const double> row_span(const Eigen::MatrixXd& m, Eigen::Index row, std::vector<double>& buf) {
  buf.resize(std::size_t(m.cols()));
  for (Eigen::Index d = 0; d < m.cols(); ++d) buf[std::size_t(d)] = m(row, d);
  return buf;
}

}  // namespace

void Hyperparams::validate() const {
  if (length_scales.empty()) throw InvalidParameter("at least one length scale is required");
  for (double l : length_scales) {
    if (!(l > 0.0) || !std::isfinite(l)) throw InvalidParameter("length scales must be finite and > 0");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw InvalidParameter("amplitude must be finite and > 0");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidParameter("noise must be finite and >= 0");
  if (!std::isfinite(mean)) throw InvalidParameter("mean must be finite");
}

double kernel_eval(KernelKind kind, const Hyperparams& hp, std::span<const double> x, std::span<const double> x2) {
  hp.validate();
  if (x.size() != hp.dims() || x2.size() != hp.dims()) throw DimensionMismatch("kernel input dimension mismatch");
  return kernel_from_r2(kind, hp.amplitude, scaled_sq_dist(hp, x, x2));
}

Eigen::MatrixXd gram(KernelKind kind, const Hyperparams& hp, const Dataset& data) {
  hp.validate();
  const Eigen::MatrixXd x = to_matrix(data, hp.dims());
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  std::vector<double> a, b;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_from_r2(kind, hp.amplitude, scaled_sq_dist(hp, row_span(x, i, a), row_span(x, j, b)));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Posterior::Posterior(const Dataset& data, KernelKind kind, Hyperparams hp) : kind_(kind), hp_(std::move(hp)) {
  hp_.validate();
  inputs_ = to_matrix(data, hp_.dims());
  const Eigen::Index n = inputs_.rows();
  if (n == 0) return;
  Eigen::MatrixXd k = gram(kind_, hp_, data);
  k.diagonal().array() += hp_.noise + kJitter * hp_.amplitude;
  chol_.compute(k);
  if (chol_.info() != Eigen::Success) {
    throw FitFailure("GP covariance is not positive definite (noise " + std::to_string(hp_.noise) +
                     ", jitter " + std::to_string(kJitter * hp_.amplitude) + ")");
  }
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) resid(i) = data[std::size_t(i)].y - hp_.mean;
  alpha_ = chol_.solve(resid);
  const Eigen::MatrixXd& l = chol_.matrixLLT();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
  lml_ = -0.5 * resid.dot(alpha_) - 0.5 * log_det - 0.5 * double(n) * std::log(2.0 * std::numbers::pi);
}

Prediction Posterior::predict(std::span<const double> x) const {
  if (x.size() != hp_.dims()) throw DimensionMismatch("prediction input dimension mismatch");
  const Eigen::Index n = inputs_.rows();
  if (n == 0) return {hp_.mean, hp_.amplitude};
  Eigen::VectorXd kstar(n);
  std::vector<double> buf;
  for (Eigen::Index i = 0; i < n; ++i) {
    kstar(i) = kernel_from_r2(kind_, hp_.amplitude, scaled_sq_dist(hp_, row_span(inputs_, i, buf), x));
  }
  Prediction p;
  p.mean = hp_.mean + kstar.dot(alpha_);
  const Eigen::VectorXd v = chol_.matrixL().solve(kstar);
  p.variance = std::max(0.0, hp_.amplitude - v.squaredNorm());
  return p;
}

Prediction gp_predict(const Dataset& data, KernelKind kind, const Hyperparams& hp, std::span<const double> x) {
  return Posterior(data, kind, hp).predict(x);
}

double log_marginal_likelihood(const Dataset& data, KernelKind kind, const Hyperparams& hp) {
  return Posterior(data, kind, hp).log_marginal_likelihood();
}

namespace {

// Objective over theta = [log l_1..l_D, log amplitude, log noise] with the
// constant mean profiled out. Returns -inf when the factorization fails.
struct LikelihoodSurface {
  const Dataset& data;
  KernelKind kind;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::size_t dims;
  Eigen::VectorXd lower, upper;

  Hyperparams unpack(const Eigen::VectorXd& theta, double mean) const {
    Hyperparams hp;
    hp.length_scales.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) hp.length_scales[d] = std::exp(theta(Eigen::Index(d)));
    hp.amplitude = std::exp(theta(Eigen::Index(dims)));
    hp.noise = std::exp(theta(Eigen::Index(dims + 1)));
    hp.mean = mean;
    return hp;
  }

  // Returns log likelihood, fills gradient and the profiled mean.
  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad, double* mean_out) const {
    const Eigen::Index n = x.rows();
    const std::size_t p = dims + 2;
    Hyperparams hp = unpack(theta, 0.0);

    Eigen::MatrixXd kf(n, n);
    std::vector<Eigen::MatrixXd> sq(dims, Eigen::MatrixXd(n, n));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        double r2 = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
          const double z = (x(i, Eigen::Index(d)) - x(j, Eigen::Index(d))) / hp.length_scales[d];
          sq[d](i, j) = sq[d](j, i) = z * z;
          r2 += z * z;
        }
        kf(i, j) = kf(j, i) = kernel_from_r2(kind, hp.amplitude, r2);
      }
    }
    Eigen::MatrixXd k = kf;
    k.diagonal().array() += hp.noise + kJitter * hp.amplitude;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd kinv_one = llt.solve(ones);
    const Eigen::VectorXd kinv_y = llt.solve(y);
    const double mean = ones.dot(kinv_y) / ones.dot(kinv_one);
    const Eigen::VectorXd resid = y - mean * ones;
    const Eigen::VectorXd alpha = llt.solve(resid);
    const Eigen::MatrixXd& l = llt.matrixLLT();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
    const double lml = -0.5 * resid.dot(alpha) - 0.5 * log_det - 0.5 * double(n) * std::log(2.0 * std::numbers::pi);
    if (mean_out) *mean_out = mean;
    if (!std::isfinite(lml)) return -std::numeric_limits<double>::infinity();

    if (grad) {
      grad->resize(Eigen::Index(p));
      const Eigen::MatrixXd inner = alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
      for (std::size_t d = 0; d < dims; ++d) {
        // dK/dlog l_d, elementwise.
        Eigen::MatrixXd dk(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < n; ++j) {
            double r2 = 0.0;
            for (std::size_t e = 0; e < dims; ++e) r2 += sq[e](i, j);
            if (kind == KernelKind::ard_se) {
              dk(i, j) = kf(i, j) * sq[d](i, j);
            } else {
              const double r = std::sqrt(r2);
              dk(i, j) = (5.0 / 3.0) * hp.amplitude * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r) * sq[d](i, j);
            }
          }
        }
        (*grad)(Eigen::Index(d)) = 0.5 * (inner.cwiseProduct(dk)).sum();
      }
      (*grad)(Eigen::Index(dims)) = 0.5 * (inner.cwiseProduct(kf)).sum();
      (*grad)(Eigen::Index(dims + 1)) = 0.5 * hp.noise * inner.trace();
    }
    return lml;
  }

  Eigen::VectorXd clamp(Eigen::VectorXd theta) const { return theta.cwiseMax(lower).cwiseMin(upper); }
};

// Projected BFGS ascent from `theta`; never returns a point worse than the start.
Eigen::VectorXd ascend(const LikelihoodSurface& surface, Eigen::VectorXd theta, int max_iterations) {
  const Eigen::Index p = theta.size();
  theta = surface.clamp(theta);
  Eigen::VectorXd grad;
  double value = surface.evaluate(theta, &grad, nullptr);
  if (!std::isfinite(value)) return theta;
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(p, p);

  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd dir = h_inv * grad;
    if (dir.dot(grad) <= 0.0) {
      h_inv.setIdentity();
      dir = grad;
    }
    double step = 1.0;
    // Keep any single coordinate move below 2 log-units.
    const double max_move = dir.cwiseAbs().maxCoeff();
    if (max_move > 2.0) step = 2.0 / max_move;

    Eigen::VectorXd next;
    Eigen::VectorXd next_grad;
    double next_value = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      next = surface.clamp(theta + step * dir);
      next_value = surface.evaluate(next, &next_grad, nullptr);
      if (std::isfinite(next_value) && next_value >= value + 1e-4 * grad.dot(next - theta)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || next_value < value) break;

    const Eigen::VectorXd s = next - theta;
    const Eigen::VectorXd yk = grad - next_grad;  // ascent: curvature of -L
    const double improvement = next_value - value;
    theta = next;
    value = next_value;
    grad = next_grad;
    const double sy = s.dot(yk);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(p, p);
      h_inv = (id - rho * s * yk.transpose()) * h_inv * (id - rho * yk * s.transpose()) + rho * s * s.transpose();
    }
    if (s.cwiseAbs().maxCoeff() < 1e-8 || improvement < 1e-10 * (1.0 + std::abs(value))) break;
  }
  return theta;
}

}  // namespace

FitResult gp_fit(const Dataset& data, KernelKind kind, const FitOptions& options) {
  if (data.empty()) throw FitFailure("cannot fit a GP to an empty dataset");
  const std::size_t dims = data.front().x.size();
  if (dims == 0) throw FitFailure("observations need at least one input dimension");
  if (data.size() < dims + 3) {
    throw FitFailure("GP hyperparameter fitting needs at least D + 3 = " + std::to_string(dims + 3) + " points");
  }

  LikelihoodSurface surface{data, kind, to_matrix(data, dims), Eigen::VectorXd(Eigen::Index(data.size())), dims, {}, {}};
  double y_mean = 0.0;
  double se2 = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i].y)) throw FitFailure("observation " + std::to_string(i) + " is not finite");
    surface.y(Eigen::Index(i)) = data[i].y;
    y_mean += data[i].y;
    se2 += data[i].y_se * data[i].y_se;
  }
  y_mean /= double(data.size());
  se2 /= double(data.size());
  double y_var = 0.0;
  for (const auto& o : data) y_var += (o.y - y_mean) * (o.y - y_mean);
  y_var /= double(data.size());
  const double scale = std::max(y_var, 1e-10 * (1.0 + y_mean * y_mean));

  const Eigen::Index p = Eigen::Index(dims + 2);
  surface.lower.resize(p);
  surface.upper.resize(p);
  std::vector<double> range(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto col = surface.x.col(Eigen::Index(d));
    range[d] = col.maxCoeff() - col.minCoeff();
    if (!(range[d] > 0.0)) range[d] = 1.0;
    surface.lower(Eigen::Index(d)) = std::log(1e-2 * range[d]);
    surface.upper(Eigen::Index(d)) = std::log(1e2 * range[d]);
  }
  surface.lower(Eigen::Index(dims)) = std::log(1e-6 * scale);
  surface.upper(Eigen::Index(dims)) = std::log(1e3 * scale);
  surface.lower(Eigen::Index(dims + 1)) = std::log(1e-10 * scale);
  surface.upper(Eigen::Index(dims + 1)) = std::log(10.0 * scale);

  double noise0 = options.initial_noise > 0.0 ? options.initial_noise : (se2 > 0.0 ? se2 : 1e-2 * scale);
  Rng rng = derive_stream(options.seed, 0, 0x6770);

  FitResult best;
  best.log_likelihood = -std::numeric_limits<double>::infinity();
  const int starts = std::max(1, options.starts);
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd theta(p);
    if (s == 1 && options.warm_start && options.warm_start->dims() == dims) {
      const Hyperparams& w = *options.warm_start;
      for (std::size_t d = 0; d < dims; ++d) theta(Eigen::Index(d)) = std::log(w.length_scales[d]);
      theta(Eigen::Index(dims)) = std::log(w.amplitude);
      theta(Eigen::Index(dims + 1)) = std::log(std::max(w.noise, 1e-300));
    } else if (s == 0) {
      for (std::size_t d = 0; d < dims; ++d) theta(Eigen::Index(d)) = std::log(0.3 * range[d]);
      theta(Eigen::Index(dims)) = std::log(scale);
      theta(Eigen::Index(dims + 1)) = std::log(noise0);
    } else {
      for (Eigen::Index i = 0; i < p; ++i) {
        theta(i) = surface.lower(i) + uniform01(rng) * (surface.upper(i) - surface.lower(i));
      }
    }
    theta = surface.clamp(theta);
    double start_mean = 0.0;
    const double start_value = surface.evaluate(theta, nullptr, &start_mean);
    best.start_log_likelihoods.push_back(start_value);
    if (!std::isfinite(start_value)) continue;

    const Eigen::VectorXd end = ascend(surface, theta, options.max_iterations);
    double mean = 0.0;
    const double value = surface.evaluate(end, nullptr, &mean);
    if (value > best.log_likelihood) {
      best.log_likelihood = value;
      best.hp = surface.unpack(end, mean);
    }
  }
  if (!std::isfinite(best.log_likelihood)) {
    throw FitFailure("GP covariance could not be factorized at any initialization, even with jitter");
  }
  return best;
}

}  // namespace smbm::gp
