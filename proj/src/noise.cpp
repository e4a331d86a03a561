#include "ews/noise.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "ews/errors.hpp"

namespace ews {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
  return Rng(seq);
}

std::vector<double> sample_eigenvalues(int m, std::uint64_t seed) {
  if (m < 1) throw ArgumentError("sample_eigenvalues: M must be >= 1");
  auto rng = make_stream(seed, 0);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> q(m);
  for (auto& v : q) v = u(rng);
  return q;
}

Eigen::MatrixXd sample_haar_frame(int rows, int cols, std::uint64_t seed) {
  if (cols < 1 || rows < cols) throw ArgumentError("sample_haar_frame: need rows >= cols >= 1");
  auto rng = make_stream(seed, 1);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) a(i, j) = n01(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Eigen::MatrixXd sample_haar_basis(int m, std::uint64_t seed) { return sample_haar_frame(m, m, seed); }

NoiseModel::NoiseModel(std::vector<double> eigenvalues, Eigen::MatrixXd basis, std::uint64_t seed)
    : eigenvalues_(std::move(eigenvalues)), basis_(std::move(basis)), seed_(seed) {
  if (eigenvalues_.empty()) throw ArgumentError("noise model: rank must be >= 1");
  if (basis_.cols() != static_cast<Eigen::Index>(eigenvalues_.size())) {
    throw ArgumentError("noise model: basis has " + std::to_string(basis_.cols()) + " columns for " +
                        std::to_string(eigenvalues_.size()) + " eigenvalues");
  }
  if (basis_.rows() < basis_.cols()) throw ArgumentError("noise model: rank exceeds state size");
  for (double q : eigenvalues_) {
    if (!(q > 0.0)) throw ArgumentError("noise model: eigenvalues must be positive");
  }
  if (gram_error() > 1e-10) throw ArgumentError("noise model: basis is not orthonormal");
  scaled_ = basis_;
  for (int m = 0; m < rank(); ++m) scaled_.col(m) *= std::sqrt(eigenvalues_[m]);
}

NoiseModel NoiseModel::rank_m(std::size_t size, std::vector<std::size_t> support, int m, std::uint64_t seed) {
  if (support.empty()) throw ArgumentError("noise model: empty support");
  if (m < 1 || static_cast<std::size_t>(m) > support.size()) {
    throw ArgumentError("noise model: need 1 <= M <= support size (" + std::to_string(support.size()) + ")");
  }
  const auto frame = sample_haar_frame(static_cast<int>(support.size()), m, seed);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size), m);
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] >= size) throw ArgumentError("noise model: support index out of range");
    basis.row(static_cast<Eigen::Index>(support[i])) = frame.row(static_cast<Eigen::Index>(i));
  }
  return NoiseModel(sample_eigenvalues(m, seed), std::move(basis), seed);
}

double NoiseModel::gram_error() const {
  const Eigen::MatrixXd g = basis_.transpose() * basis_;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd NoiseModel::covariance() const { return scaled_ * scaled_.transpose(); }

void NoiseModel::increment(double dt, Rng& rng, std::span<double> out) const {
  if (out.size() != size()) throw ArgumentError("noise increment: output size mismatch");
  if (!(dt >= 0.0)) throw ArgumentError("noise increment: dt must be non-negative");
  std::normal_distribution<double> n01;
  Eigen::VectorXd xi(rank());
  for (int m = 0; m < rank(); ++m) xi(m) = n01(rng);
  Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(out.size()));
  o.noalias() = std::sqrt(dt) * (scaled_ * xi);
}

Eigen::VectorXd noise_increment(const NoiseModel& model, double dt, Rng& rng) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(model.size()));
  model.increment(dt, rng, std::span<double>(out.data(), model.size()));
  return out;
}

void identity_increment(double dt, Rng& rng, std::span<double> out) {
  if (!(dt >= 0.0)) throw ArgumentError("noise increment: dt must be non-negative");
  std::normal_distribution<double> n01;
  const double s = std::sqrt(dt);
  for (auto& v : out) v = s * n01(rng);
}

void write_basis_csv(std::ostream& os, const NoiseModel& model) {
  os << "row";
  for (int m = 0; m < model.rank(); ++m) os << ",b" << m;
  os << '\n' << std::setprecision(17);
  os << "q";
  for (double q : model.eigenvalues()) os << ',' << q;
  os << '\n';
  for (Eigen::Index i = 0; i < model.basis().rows(); ++i) {
    os << i;
    for (int m = 0; m < model.rank(); ++m) os << ',' << model.basis()(i, m);
    os << '\n';
  }
}

}  // namespace ews
