#include <doctest.h>

#include "odn/error.hpp"
#include "odn/pod.hpp"
#include "support.hpp"

using namespace odn;

namespace {

Matrix line_points(std::size_t n) {
  Matrix Y(n, 1);
  for (std::size_t i = 0; i < n; ++i) Y(i, 0) = static_cast<double>(i);
  return Y;
}

// Row-standardized copy with population sigma, computed independently.
Matrix standardize(const Matrix& S) {
  Matrix out = S;
  for (std::size_t i = 0; i < S.rows; ++i) {
    double mu = 0.0, sq = 0.0;
    for (double v : S.row(i)) mu += v;
    mu /= static_cast<double>(S.cols);
    for (double v : S.row(i)) sq += (v - mu) * (v - mu);
    const double sigma = std::sqrt(sq / static_cast<double>(S.cols));
    for (std::size_t j = 0; j < S.cols; ++j) out(i, j) = (S(i, j) - mu) / sigma;
  }
  return out;
}

}  // namespace

TEST_CASE("three-point hand example") {
  // Standardized rows are -a and a with a = [-1,0,1]/sigma, sigma^2 = 2/3, so
  // T = 1.5 a a^T has the single nonzero eigenvalue 1.5 * 2 = 3.
  const Matrix S(2, 3, std::vector<double>{1, 2, 3, 3, 2, 1});
  const PODBasis b = compute_pod(line_points(3), S, 1, false);
  REQUIRE(b.eigenvalues.size() == 3);
  CHECK(b.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(b.eigenvalues[1]) < 1e-12);
  CHECK(std::abs(b.eigenvalues[2]) < 1e-12);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(b.modes(0, 0) == doctest::Approx(r).epsilon(1e-12));
  CHECK(std::abs(b.modes(1, 0)) < 1e-12);
  CHECK(b.modes(2, 0) == doctest::Approx(-r).epsilon(1e-12));
  CHECK(b.mean == std::vector<double>{2, 2, 2});
}

TEST_CASE("random 10 x 50: orthonormal, descending, full-rank reconstruction") {
  Rng rng(99);
  const Matrix S = odn::test::random_matrix(10, 50, rng, -2, 5);
  const PODBasis b = compute_pod(line_points(50), S, 10, false);
  REQUIRE(b.n_modes() == 10);
  for (std::size_t m = 0; m < 10; ++m) {
    for (std::size_t k = 0; k < 10; ++k) {
      double dot = 0.0;
      for (std::size_t j = 0; j < 50; ++j) dot += b.modes(j, m) * b.modes(j, k);
      CHECK(std::abs(dot - (m == k ? 1.0 : 0.0)) < 1e-10);
    }
  }
  for (std::size_t i = 1; i < b.eigenvalues.size(); ++i) {
    CHECK(b.eigenvalues[i] <= b.eigenvalues[i - 1]);
    CHECK(b.eigenvalues[i] >= 0.0);
  }
  // trace(T) = (1/N) sum ||v_i||^2 = N_y for standardized rows
  double trace = 0.0;
  for (double e : b.eigenvalues) trace += e;
  CHECK(trace == doctest::Approx(50.0).epsilon(1e-10));

  const Matrix V = standardize(S);
  double frob = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    std::vector<double> rec(50, 0.0);
    for (std::size_t m = 0; m < 10; ++m) {
      double c = 0.0;
      for (std::size_t j = 0; j < 50; ++j) c += V(i, j) * b.modes(j, m);
      for (std::size_t j = 0; j < 50; ++j) rec[j] += c * b.modes(j, m);
    }
    for (std::size_t j = 0; j < 50; ++j) frob += (rec[j] - V(i, j)) * (rec[j] - V(i, j));
  }
  CHECK(std::sqrt(frob) < 1e-8);
}

TEST_CASE("sign convention: first significant entry positive") {
  Rng rng(4);
  const Matrix S = odn::test::random_matrix(8, 20, rng);
  const PODBasis b = compute_pod(line_points(20), S, 5, false);
  for (std::size_t m = 0; m < b.n_modes(); ++m) {
    std::size_t j = 0;
    while (std::abs(b.modes(j, m)) < 1e-12) ++j;
    CHECK(b.modes(j, m) > 0.0);
  }
}

TEST_CASE("modified basis puts the mean first") {
  Rng rng(6);
  const Matrix S = odn::test::random_matrix(6, 12, rng);
  const PODBasis std_b = compute_pod(line_points(12), S, 4, false);
  const PODBasis mod_b = compute_pod(line_points(12), S, 4, true);
  CHECK(std_b.n_modes() == 4);
  CHECK(mod_b.n_modes() == 3);
  for (std::size_t j = 0; j < 12; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 6; ++i) mean += S(i, j);
    mean /= 6.0;
    CHECK(mod_b.mean[j] == doctest::Approx(mean).epsilon(1e-14));
    const auto row = pod_trunk_eval(mod_b, j);
    REQUIRE(row.size() == 4);
    CHECK(row[0] == doctest::Approx(mean / 4.0).epsilon(1e-14));
    CHECK(row[1] == doctest::Approx(mod_b.modes(j, 0) / 4.0).epsilon(1e-14));
    const auto srow = pod_trunk_eval(std_b, j);
    CHECK(srow.size() == 4);
    CHECK(srow[3] == doctest::Approx(std_b.modes(j, 3) / 4.0).epsilon(1e-14));
  }
  const std::vector<std::size_t> idx{3, 0};
  const Matrix m = pod_trunk_matrix(mod_b, idx);
  CHECK(m(0, 0) == pod_trunk_eval(mod_b, 3)[0]);
  CHECK_THROWS_AS(pod_trunk_eval(mod_b, 12), IndexError);
}

TEST_CASE("locate and hashing") {
  Rng rng(1);
  const Matrix Y = odn::test::random_matrix(5, 2, rng);
  const Matrix S = odn::test::random_matrix(3, 5, rng);
  const PODBasis b = compute_pod(Y, S, 2, true);
  CHECK(b.locate(Y.row(3)) == 3);
  CHECK_THROWS_AS(b.locate(std::vector<double>{9.0, 9.0}), IndexError);
  CHECK_THROWS_AS(b.locate(std::vector<double>{9.0}), DimensionError);
  CHECK(b.y_hash == hash_points(Y));
  Matrix Y2 = Y;
  Y2(0, 0) += 1e-9;
  CHECK(hash_points(Y2) != hash_points(Y));
}

TEST_CASE("errors") {
  Rng rng(1);
  const Matrix S = odn::test::random_matrix(4, 6, rng);
  CHECK_THROWS_AS(compute_pod(line_points(6), S.slice_rows(0, 1), 1, false), DegenerateError);
  CHECK_THROWS_AS(compute_pod(line_points(6), S, 0, false), DomainError);
  CHECK_THROWS_AS(compute_pod(line_points(6), S, 5, false), DomainError);
  CHECK_THROWS_AS(compute_pod(line_points(5), S, 2, false), DimensionError);
  Matrix flat = S;
  for (std::size_t j = 0; j < 6; ++j) flat(2, j) = 1.5;
  CHECK_THROWS_AS(compute_pod(line_points(6), flat, 2, false), DegenerateError);
}
