#include "smbm/network.hpp"

#include <cmath>
#include <string>

#include "smbm/error.hpp"

namespace smbm {

namespace {

void check_state(const Network& net, std::span<const std::uint8_t> s) {
  if (s.size() != net.size()) {
    throw DimensionMismatch("state has " + std::to_string(s.size()) + " entries, network has " +
                            std::to_string(net.size()) + " neurons");
  }
}

}  // namespace

Network::Network(std::size_t n)
    : weights_(Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n))),
      bias_(Eigen::VectorXd::Zero(Eigen::Index(n))) {}

Network::Network(Eigen::MatrixXd weights, Eigen::VectorXd bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows() != weights_.cols() || weights_.rows() != bias_.size()) {
    throw DimensionMismatch("weight matrix must be n x n with a length-n bias");
  }
  if (!weights_.allFinite() || !bias_.allFinite()) {
    throw InvalidParameter("network weights and bias must be finite");
  }
  if (!is_symmetric()) throw InvalidParameter("weight matrix is not symmetric");
  for (Eigen::Index k = 0; k < bias_.size(); ++k) {
    bias_(k) += 0.5 * weights_(k, k);
    weights_(k, k) = 0.0;
  }
}

bool Network::is_symmetric() const {
  const Eigen::Index n = weights_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      if (weights_(i, k) != weights_(k, i)) return false;
    }
  }
  return true;
}

bool Network::has_zero_diagonal() const {
  return (weights_.diagonal().array() == 0.0).all();
}

double energy(const Network& net, std::span<const std::uint8_t> s) {
  check_state(net, s);
  const auto& w = net.weights();
  double quad = 0.0;
  double lin = 0.0;
  const Eigen::Index n = Eigen::Index(net.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!s[std::size_t(i)]) continue;
    lin += net.bias()(i);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (s[std::size_t(k)]) quad += w(k, i);
    }
  }
  return -0.5 * quad - lin;
}

double delta_e(const Network& net, std::span<const std::uint8_t> s, std::size_t k) {
  check_state(net, s);
  if (k >= net.size()) {
    throw InvalidParameter("neuron index " + std::to_string(k) + " out of range");
  }
  const auto col = net.weights().col(Eigen::Index(k));
  double gap = net.bias(k);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i]) gap += col(Eigen::Index(i));
  }
  return gap;
}

Eigen::VectorXd local_fields(const Network& net, std::span<const std::uint8_t> s) {
  check_state(net, s);
  Eigen::VectorXd h = net.bias();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i]) h += net.weights().col(Eigen::Index(i));
  }
  return h;
}

}  // namespace smbm
