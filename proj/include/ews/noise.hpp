#pragma once

// Rank-M discretised Q-Wiener noise: W = sum_m sqrt(q_m) b_m beta_m.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ews {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream); distinct streams never share state.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// M draws from U[0.5, 2].
std::vector<double> sample_eigenvalues(int m, std::uint64_t seed);

/// rows x cols matrix with Haar-distributed orthonormal columns (rows >= cols):
/// QR of a standard Gaussian matrix with the diagonal of R made positive.
Eigen::MatrixXd sample_haar_frame(int rows, int cols, std::uint64_t seed);
/// M x M Haar orthogonal matrix.
Eigen::MatrixXd sample_haar_basis(int m, std::uint64_t seed);

class NoiseModel {
 public:
  /// Rank-M noise on a state of `size` points. `support` lists the rows
  /// that carry the basis; the basis is zero elsewhere.
  static NoiseModel rank_m(std::size_t size, std::vector<std::size_t> support, int m, std::uint64_t seed);
  /// Explicit eigenpairs; `basis` is size x M with orthonormal columns.
  NoiseModel(std::vector<double> eigenvalues, Eigen::MatrixXd basis, std::uint64_t seed = 0);

  int rank() const { return static_cast<int>(eigenvalues_.size()); }
  std::size_t size() const { return static_cast<std::size_t>(basis_.rows()); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  std::uint64_t seed() const { return seed_; }

  /// max |B^T B - I|.
  double gram_error() const;
  /// B diag(q) B^T.
  Eigen::MatrixXd covariance() const;

  /// out = sqrt(dt) * sum_m sqrt(q_m) xi_m b_m.
  void increment(double dt, Rng& rng, std::span<double> out) const;

 private:
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd scaled_;  // basis * diag(sqrt(q))
  std::uint64_t seed_ = 0;
};

Eigen::VectorXd noise_increment(const NoiseModel& model, double dt, Rng& rng);

/// Identity Q on `size` points: independent N(0, dt) per point.
void identity_increment(double dt, Rng& rng, std::span<double> out);

/// CSV with one row per state point and one column per basis vector.
void write_basis_csv(std::ostream& os, const NoiseModel& model);

}  // namespace ews
