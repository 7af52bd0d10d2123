#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "pursuit/diagnostics.hpp"
#include "pursuit/solvers.hpp"
#include "support.hpp"

using namespace pursuit;
using Catch::Approx;
using Catch::Matchers::WithinAbs;

namespace {

DenseOperator from_eigen(const Eigen::MatrixXd& m) {
  return DenseOperator(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                       std::vector<double>(m.data(), m.data() + m.size()));
}

Eigen::MatrixXd gaussian_unit_columns(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    m.col(j).normalize();
  }
  return m;
}

/// Planted s-sparse signal with entries of magnitude in [1, 2) and random sign.
std::pair<IndexSet, Eigen::VectorXd> planted(std::size_t n, std::size_t s, Rng& rng) {
  auto perm = rng.permutation(n);
  std::vector<vertex_id> supp(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (vertex_id i : supp) x(i) = (rng.bernoulli(0.5) ? 1.0 : -1.0) * (1.0 + rng.uniform());
  return {IndexSet::from_unsorted(supp), x};
}

}  // namespace

TEST_CASE("select_largest examples") {
  std::vector<double> v{0.1, -3.0, 2.0, 0.5};
  CHECK(select_largest(v, 2) == IndexSet::from_list({1, 2}));
  CHECK(select_largest(v, 0).empty());
  CHECK(select_largest(v, 9) == IndexSet::range(4));
  std::vector<double> tie{1.0, -1.0, 1.0, 0.0};
  CHECK(select_largest(tie, 2) == IndexSet::from_list({0, 1}));
}

TEST_CASE("hard_threshold examples") {
  std::vector<double> v{0.1, -3.0, 2.0, 0.5};
  CHECK(hard_threshold(v, 2) == std::vector<double>{0, -3.0, 2.0, 0});
  CHECK(hard_threshold(v, 0) == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("lsqr matches the normal equations on random overdetermined systems") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index m = 20 + static_cast<Eigen::Index>(rng.below(30));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m / 2)));
    Eigen::MatrixXd a(m, n + 3);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index i = 0; i < m; ++i) a(i, j) = rng.normal();
    }
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) y(i) = rng.normal();
    auto op = from_eigen(a);
    // Every other column from 0, so the solve is on a genuine subset.
    std::vector<vertex_id> pick;
    for (Eigen::Index j = 0; j < a.cols(); j += 2) pick.push_back(static_cast<vertex_id>(j));
    auto cols = IndexSet::from_sorted(pick);
    Eigen::MatrixXd sub(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
    Eigen::VectorXd want = (sub.transpose() * sub).ldlt().solve(sub.transpose() * y);

    auto res = lsqr_solve(op, cols, fixtures::to_std(y));
    REQUIRE(res.converged());
    Eigen::VectorXd got = Eigen::Map<Eigen::VectorXd>(res.x.data(), static_cast<Eigen::Index>(res.x.size()));
    CHECK((got - want).norm() <= 1e-8 * want.norm());
    CHECK(res.residual_norm == Approx((y - sub * want).norm()).epsilon(1e-8));
  }
}

TEST_CASE("lsqr edge cases") {
  auto op = DenseOperator::identity(3);
  auto zero = lsqr_solve(op, IndexSet::range(3), std::vector<double>{0, 0, 0});
  CHECK(zero.stop == LsqrStop::zero_rhs);
  CHECK(zero.x == std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(lsqr_solve(op, IndexSet{}, std::vector<double>{1, 0, 0}), invalid_input);
  CHECK_THROWS_AS(lsqr_solve(op, IndexSet::range(3), std::vector<double>{1, 0}), invalid_input);
  CHECK_THROWS_AS(lsqr_solve(op, IndexSet::range(3), std::vector<double>{NAN, 0, 0}), invalid_input);
}

TEST_CASE("omp on the identity picks the largest entries") {
  auto op = DenseOperator::identity(4);
  std::vector<double> y{0, 3, 0, -1};
  auto r = omp(RecoveryProblem<DenseOperator>{op, y, 2});
  CHECK(r.support == IndexSet::from_list({1, 3}));
  CHECK(r.coefficients == std::vector<double>{3, -1});
  CHECK(r.residual_norm == 0.0);
  CHECK(r.stop == StopReason::residual_tolerance);
  CHECK(r.iterations == 2);
}

TEST_CASE("omp stops at the sparsity budget") {
  auto op = DenseOperator::identity(4);
  std::vector<double> y{1, 2, 3, 4};
  auto r = omp(RecoveryProblem<DenseOperator>{op, y, 2});
  CHECK(r.support == IndexSet::from_list({2, 3}));
  CHECK(r.stop == StopReason::sparsity_reached);
  CHECK_THAT(r.residual_norm, WithinAbs(std::sqrt(5.0), 1e-14));
}

TEST_CASE("omp with zero budget or zero target") {
  auto op = DenseOperator::identity(3);
  std::vector<double> y{1, 0, 0};
  auto r0 = omp(RecoveryProblem<DenseOperator>{op, y, 0});
  CHECK(r0.support.empty());
  CHECK(r0.stop == StopReason::empty_budget);
  std::vector<double> z{0, 0, 0};
  auto r1 = omp(RecoveryProblem<DenseOperator>{op, z, 2});
  CHECK(r1.support.empty());
  CHECK(r1.stop == StopReason::residual_tolerance);
  CHECK_THROWS_AS(omp(RecoveryProblem<DenseOperator>{op, y, 4}), invalid_input);
}

TEST_CASE("omp residual is orthogonal to the support and non-increasing") {
  Rng rng(21);
  for (int t = 0; t < 40; ++t) {
    Eigen::MatrixXd a = gaussian_unit_columns(30, 60, rng);
    auto op = from_eigen(a);
    std::vector<double> y(30);
    for (double& v : y) v = rng.normal();
    OmpOptions opt;
    if (t % 2) opt.least_squares = OmpLeastSquares::lsqr;
    double worst = 0.0;
    opt.on_iteration = [&](const IndexSet& s, std::span<const double> r) {
      auto c = op.apply_transpose(s, r);
      worst = std::max(worst, linalg::norm_inf(c) / std::max(1.0, linalg::norm2(r)));
    };
    auto res = omp(RecoveryProblem<DenseOperator>{op, y, 12}, opt);
    CHECK(res.support.size() == 12);
    CHECK(worst <= 1e-9);
    for (std::size_t k = 1; k < res.residual_history.size(); ++k) {
      CHECK(res.residual_history[k] <= res.residual_history[k - 1] * (1 + 1e-12));
    }
  }
}

TEST_CASE("omp recovers the support when the ERC holds") {
  Rng rng(33);
  int checked = 0;
  for (int t = 0; t < 60 && checked < 25; ++t) {
    Eigen::MatrixXd a = gaussian_unit_columns(40, 60, rng);
    auto op = from_eigen(a);
    auto [supp, x] = planted(60, 3, rng);
    if (!diag::erc_check(op, supp).holds) continue;
    ++checked;
    Eigen::VectorXd y = a * x;
    auto res = omp(RecoveryProblem<DenseOperator>{op, fixtures::to_std(y), 3});
    CHECK(res.support == supp);
  }
  CHECK(checked >= 10);
}

TEST_CASE("subspace pursuit on the identity") {
  auto op = DenseOperator::identity(4);
  std::vector<double> y{0, 3, 0, -1};
  auto r = subspace_pursuit(RecoveryProblem<DenseOperator>{op, y, 2});
  CHECK(r.support == IndexSet::from_list({1, 3}));
  CHECK_THAT(r.coefficients[0], WithinAbs(3.0, 1e-12));
  CHECK_THAT(r.coefficients[1], WithinAbs(-1.0, 1e-12));
  CHECK(r.stop == StopReason::residual_tolerance);
}

TEST_CASE("subspace pursuit with zero sparsity returns nothing") {
  auto op = DenseOperator::identity(3);
  std::vector<double> y{1, 2, 0};
  auto r = subspace_pursuit(RecoveryProblem<DenseOperator>{op, y, 0});
  CHECK(r.support.empty());
  CHECK(r.stop == StopReason::empty_budget);
  CHECK(r.residual_norm == Approx(std::sqrt(5.0)));
}

TEST_CASE("subspace pursuit keeps exactly s columns and never raises the residual") {
  Rng rng(8);
  for (int t = 0; t < 40; ++t) {
    Eigen::MatrixXd a = gaussian_unit_columns(25, 50, rng);
    auto op = from_eigen(a);
    std::vector<double> y(25);
    for (double& v : y) v = rng.normal();
    const std::size_t s = 1 + rng.below(8);
    auto r = subspace_pursuit(RecoveryProblem<DenseOperator>{op, y, s});
    CHECK(r.support.size() == s);
    CHECK(r.coefficients.size() == s);
    for (std::size_t k = 1; k < r.residual_history.size(); ++k) {
      CHECK(r.residual_history[k] < r.residual_history[k - 1]);
    }
    CHECK(r.iterations <= default_sp_iterations(50));
    // Reported residual is the residual of the returned coefficients.
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.dense(50).data(), 50);
    Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), 25);
    CHECK(r.residual_norm == Approx((yy - a * x).norm()).epsilon(1e-10));
  }
}

TEST_CASE("subspace pursuit recovers planted sparse signals") {
  Rng rng(1234);
  int ok = 0;
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXd a = gaussian_unit_columns(50, 100, rng);
    auto [supp, x] = planted(100, 4, rng);
    Eigen::VectorXd y = a * x;
    auto op = from_eigen(a);
    auto r = subspace_pursuit(RecoveryProblem<DenseOperator>{op, fixtures::to_std(y), 4});
    ok += r.support == supp;
  }
  CHECK(ok >= 45);
}

TEST_CASE("default_sp_iterations") {
  CHECK(default_sp_iterations(1) == 10);
  CHECK(default_sp_iterations(1024) == 10);
  CHECK(default_sp_iterations(1025) == 11);
  CHECK(default_sp_iterations(5000) == 13);
}

TEST_CASE("solvers work through the implicit Laplacian") {
  auto g = fixtures::two_k3();
  LaplacianView lap(g);
  // y = l_0 + l_1 + l_2 = 0; y = l_3 + l_4 is recovered exactly by OMP.
  auto y = lap.apply(IndexSet::from_list({3, 4}), std::vector<double>{1, 1});
  auto r = omp(RecoveryProblem<LaplacianView>{lap, y, 2});
  CHECK(r.residual_norm < 1e-12);
  auto fit = lap.apply(r.support, r.coefficients);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK_THAT(fit[i], WithinAbs(y[i], 1e-12));
}
