#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace smbm {

// Binary neuron states, one byte per neuron, entries in {0, 1}.
using SpinState = std::vector<std::uint8_t>;

// Fully connected Boltzmann machine: symmetric weights with zero diagonal and
// a bias vector, both in volts. Energy is E(s) = -1/2 s'Ws - I's.
class Network {
 public:
  Network() = default;

  // Zero network of n neurons.
  explicit Network(std::size_t n);

  // Validates symmetry. Any diagonal entry W_kk is folded into the bias as
  // I_k += W_kk / 2 (exact for binary states since s_k^2 = s_k) and zeroed.
  Network(Eigen::MatrixXd weights, Eigen::VectorXd bias);

  std::size_t size() const noexcept { return static_cast<std::size_t>(bias_.size()); }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  const Eigen::VectorXd& bias() const noexcept { return bias_; }

  double weight(std::size_t k, std::size_t i) const { return weights_(Eigen::Index(k), Eigen::Index(i)); }
  double bias(std::size_t k) const { return bias_(Eigen::Index(k)); }

  bool is_symmetric() const;
  bool has_zero_diagonal() const;

 private:
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
};

// -1/2 s'Ws - I's.
double energy(const Network& net, std::span<const std::uint8_t> s);

// Flip gap of neuron k: E(s with s_k = 0) - E(s with s_k = 1) = sum_i W_ki s_i + I_k.
double delta_e(const Network& net, std::span<const std::uint8_t> s, std::size_t k);

// Local fields h = W s + I for every neuron at once.
Eigen::VectorXd local_fields(const Network& net, std::span<const std::uint8_t> s);

}  // namespace smbm
