#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ews/errors.hpp"
#include "ews/noise.hpp"

using namespace ews;

TEST_CASE("eigenvalues") {
  const auto q = sample_eigenvalues(3, 11);
  REQUIRE(q.size() == 3);
  for (double v : q) {
    CHECK(v >= 0.5);
    CHECK(v <= 2.0);
  }
  CHECK(sample_eigenvalues(3, 11) == q);
  CHECK(sample_eigenvalues(3, 12) != q);
  const auto big = sample_eigenvalues(10000, 5);
  double mean = 0.0;
  for (double v : big) mean += v;
  mean /= big.size();
  CHECK(mean == doctest::Approx(1.25).epsilon(0.02 / 1.25));
}

TEST_CASE("haar basis is orthogonal") {
  const auto b = sample_haar_basis(4, 3);
  const Eigen::MatrixXd gram = b.transpose() * b;
  CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
  const auto one = sample_haar_basis(1, 9);
  CHECK(std::abs(std::abs(one(0, 0)) - 1.0) < 1e-15);
  const auto frame = sample_haar_frame(50, 7, 2);
  CHECK((frame.transpose() * frame - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(sample_haar_basis(5, 3) == sample_haar_basis(5, 3));
}

TEST_CASE("haar columns are uniform on the sphere") {
  const int m = 64, draws = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int d = 0; d < draws; ++d) {
    const auto b = sample_haar_frame(m, 1, 1000 + d);
    sum += b(0, 0);
    sum2 += b(0, 0) * b(0, 0);
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  CHECK(std::abs(mean) < 4.0 * std::sqrt(1.0 / m / draws));
  CHECK(var == doctest::Approx(1.0 / m).epsilon(0.1));
}

TEST_CASE("noise model validation") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(3, 2);
  CHECK_NOTHROW(NoiseModel({1.0, 2.0}, b));
  CHECK_THROWS_AS(NoiseModel({1.0}, b), ArgumentError);
  CHECK_THROWS_AS(NoiseModel({1.0, -1.0}, b), ArgumentError);
  b(0, 1) = 0.5;
  CHECK_THROWS_AS(NoiseModel({1.0, 2.0}, b), ArgumentError);
  CHECK_THROWS_AS(NoiseModel::rank_m(10, {1, 2, 3}, 4, 0), ArgumentError);
}

TEST_CASE("rank-M model lives on the support") {
  const auto model = NoiseModel::rank_m(10, {2, 3, 4, 5}, 3, 7);
  CHECK(model.rank() == 3);
  CHECK(model.size() == 10);
  CHECK(model.gram_error() <= 1e-12);
  for (int r : {0, 1, 6, 9}) CHECK(model.basis().row(r).cwiseAbs().maxCoeff() == 0.0);
  for (double q : model.eigenvalues()) {
    CHECK(q >= 0.5);
    CHECK(q <= 2.0);
  }
}

TEST_CASE("single direction increments") {
  Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(3, 1);
  e1(0, 0) = 1.0;
  const NoiseModel model({1.0}, e1);
  auto rng = make_stream(1, 0);
  const double dt = 0.04;
  const int n = 100000;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto inc = noise_increment(model, dt, rng);
    CHECK(inc(1) == 0.0);
    s2 += inc(0) * inc(0);
  }
  CHECK(s2 / n == doctest::Approx(dt).epsilon(0.03));
  const auto zero = noise_increment(model, 0.0, rng);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("increment covariance matches dt B diag(q) B^T") {
  const auto model = NoiseModel::rank_m(6, {0, 1, 2, 3, 4, 5}, 4, 21);
  const double dt = 0.1;
  const int n = 100000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 6);
  auto rng = make_stream(3, 0);
  for (int i = 0; i < n; ++i) {
    const auto inc = noise_increment(model, dt, rng);
    acc += inc * inc.transpose();
  }
  acc /= n;
  const Eigen::MatrixXd expect = dt * model.covariance();
  // Entrywise, relative to the diagonal scale so near-zero entries do not blow up.
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double scale = std::sqrt(expect(i, i) * expect(j, j));
      CHECK(std::abs(acc(i, j) - expect(i, j)) <= 0.05 * scale);
    }
  }
}

TEST_CASE("streams are reproducible and distinct") {
  auto a = make_stream(42, 1), b = make_stream(42, 1), c = make_stream(42, 2);
  bool differs = false;
  for (int i = 0; i < 10; ++i) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    if (x != z) differs = true;
  }
  CHECK(differs);
  std::vector<double> u(5), v(5);
  auto r1 = make_stream(8, 0), r2 = make_stream(8, 0);
  identity_increment(0.5, r1, u);
  identity_increment(0.5, r2, v);
  CHECK(u == v);
}

TEST_CASE("basis csv") {
  const auto model = NoiseModel::rank_m(4, {1, 2}, 2, 1);
  std::ostringstream os;
  write_basis_csv(os, model);
  const auto text = os.str();
  CHECK(text.rfind("row,b0,b1\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') >= 5);
}
