#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "pursuit/diagnostics.hpp"
#include "pursuit/random_graphs.hpp"
#include "support.hpp"

using namespace pursuit;
using Catch::Approx;
using Catch::Matchers::WithinAbs;

namespace {

/// delta_s from the extreme eigenvalues of every s-column Gram matrix.
double ric_gram_oracle(const Eigen::MatrixXd& phi, std::size_t s) {
  const auto N = static_cast<std::size_t>(phi.cols());
  double best = 0.0;
  std::vector<int> pick(N, 0);
  std::fill(pick.end() - static_cast<std::ptrdiff_t>(s), pick.end(), 1);
  do {
    Eigen::MatrixXd sub(phi.rows(), static_cast<Eigen::Index>(s));
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < N; ++j) {
      if (pick[j]) sub.col(c++) = phi.col(static_cast<Eigen::Index>(j));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub.transpose() * sub, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    best = std::max({best, 1.0 - ev(0), ev(ev.size() - 1) - 1.0});
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

SparseGraph disjoint_union(const SparseGraph& a, const SparseGraph& b) {
  std::vector<Edge> edges = a.edges();
  const auto off = static_cast<vertex_id>(a.num_vertices());
  for (const Edge& e : b.edges()) edges.push_back({e.u + off, e.v + off, e.weight});
  return build_graph(a.num_vertices() + b.num_vertices(), std::move(edges));
}

DenseOperator from_eigen(const Eigen::MatrixXd& m) {
  return DenseOperator(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                       std::vector<double>(m.data(), m.data() + m.size()));
}

SparseGraph connected_er(std::uint64_t t) {
  Rng r(t);
  const std::size_t n = 6 + r.below(6);
  const double p = 0.2 + 0.5 * r.uniform();
  return fixtures::random_connected_graph(n, p, r());
}

}  // namespace

TEST_CASE("binomial and combination enumeration") {
  CHECK(diag::binomial(5, 2) == 10);
  CHECK(diag::binomial(5, 0) == 1);
  CHECK(diag::binomial(3, 4) == 0);
  CHECK(diag::binomial(60, 30) == Approx(1.1826458156486e17).epsilon(1e-9));
  std::vector<std::vector<vertex_id>> seen;
  diag::for_each_combination(4, 2, [&](const std::vector<vertex_id>& c) {
    seen.push_back(c);
    return true;
  });
  CHECK(seen == std::vector<std::vector<vertex_id>>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  int calls = 0;
  diag::for_each_combination(10, 3, [&](const std::vector<vertex_id>&) { return ++calls < 5; });
  CHECK(calls == 5);
}

TEST_CASE("ric of the identity is zero") {
  auto id = DenseOperator::identity(5);
  for (std::size_t s = 1; s <= 5; ++s) CHECK(diag::ric_bruteforce(id, s).delta == Approx(0.0).margin(1e-14));
}

TEST_CASE("ric on two triangles") {
  auto g = fixtures::two_k3();
  LaplacianView l(g);
  // |l_i|^2 = 1.5 for every column.
  CHECK(diag::ric_bruteforce(l, 1).delta == Approx(0.5));
  auto r2 = diag::ric_bruteforce(l, 2);
  // Gram of {0,1}: [[1.5,-0.75],[-0.75,1.5]]; eigenvalues 0.75 and 2.25.
  CHECK(r2.delta == Approx(1.25));
  CHECK(r2.worst_set == IndexSet::from_list({0, 1}));
  CHECK(r2.subsets_evaluated == 15);
  // Three columns of a triangle sum to zero.
  CHECK(diag::ric_bruteforce(l, 3).delta >= 1.0 - 1e-12);
}

TEST_CASE("ric agrees with a Gram eigenvalue oracle") {
  for (std::uint64_t t = 0; t < 15; ++t) {
    auto g = connected_er(t);
    LaplacianView l(g);
    Eigen::MatrixXd dense = fixtures::dense_rw_laplacian(g);
    for (std::size_t s = 1; s <= 3; ++s) {
      CHECK_THAT(diag::ric_bruteforce(l, s).delta, WithinAbs(ric_gram_oracle(dense, s), 1e-10));
    }
  }
}

TEST_CASE("ric is monotone in s and sampling bounds it from below") {
  for (std::uint64_t t = 0; t < 10; ++t) {
    auto g = connected_er(100 + t);
    LaplacianView l(g);
    double prev = 0.0;
    for (std::size_t s = 1; s <= 4; ++s) {
      auto ex = diag::ric_bruteforce(l, s);
      CHECK(ex.delta >= prev - 1e-12);
      prev = ex.delta;
      auto sm = diag::ric_sampled(l, s, 20, t);
      CHECK(sm.method == diag::RicMethod::sampled);
      CHECK(sm.delta <= ex.delta + 1e-12);
      auto all = diag::ric_sampled(l, s, 1000000, t);
      CHECK(all.delta == ex.delta);
      CHECK(all.worst_set == ex.worst_set);
    }
  }
}

TEST_CASE("ric refuses oversize exhaustive runs") {
  auto id = DenseOperator::identity(40);
  CHECK_THROWS_AS(diag::ric_bruteforce(id, 10), invalid_input);
  CHECK_THROWS_AS(diag::ric_bruteforce(id, 41), invalid_input);
  CHECK(diag::ric_bruteforce(id, 0).delta == 0.0);
}

TEST_CASE("ric is additive over disjoint blocks") {
  for (std::uint64_t t = 0; t < 8; ++t) {
    auto a = connected_er(200 + t);
    auto b = connected_er(300 + t);
    auto u = disjoint_union(a, b);
    LaplacianView la(a), lb(b), lu(u);
    for (std::size_t s = 1; s <= 3; ++s) {
      const double want = std::max(diag::ric_bruteforce(la, s).delta, diag::ric_bruteforce(lb, s).delta);
      CHECK_THAT(diag::ric_bruteforce(lu, s).delta, WithinAbs(want, 1e-10));
    }
  }
}

TEST_CASE("ric bound holds for the symmetric Laplacian") {
  for (std::uint64_t t = 0; t < 20; ++t) {
    auto g = connected_er(400 + t);
    const std::size_t n = g.num_vertices();
    auto ev = diag::laplacian_spectrum(g);
    Eigen::MatrixXd sym = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const Edge& e : g.edges()) {
      const double v = e.weight / std::sqrt(g.degree(e.u) * g.degree(e.v));
      sym(e.u, e.v) -= v;
      sym(e.v, e.u) -= v;
    }
    auto op = from_eigen(sym);
    for (std::size_t s = 1; s <= 3; ++s) {
      const double bound =
          std::max(1.0 - (1.0 - double(s) / double(n)) * ev[1] * ev[1], ev[n - 1] * ev[n - 1] - 1.0);
      CHECK(diag::ric_bruteforce(op, s).delta <= bound + 1e-10);
    }
  }
}

TEST_CASE("laplacian_spectrum matches a general eigensolver") {
  auto g = fixtures::random_connected_graph(12, 0.3, 5);
  auto ev = diag::laplacian_spectrum(g);
  Eigen::EigenSolver<Eigen::MatrixXd> es(fixtures::dense_rw_laplacian(g));
  std::vector<double> want;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) want.push_back(es.eigenvalues()(i).real());
  std::sort(want.begin(), want.end());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK_THAT(ev[i], WithinAbs(want[i], 1e-10));
  CHECK_THAT(ev[0], WithinAbs(0.0, 1e-12));
}

TEST_CASE("coherence examples") {
  auto id = DenseOperator::identity(3);
  CHECK(diag::coherence(id).normalized == 0.0);
  auto k3 = fixtures::k3();
  LaplacianView l(k3);
  auto c = diag::coherence(l);
  CHECK(c.unnormalized == Approx(0.75));
  CHECK(c.normalized == Approx(0.5));
  CHECK(c.unnormalized_pair[0] == 0);
  CHECK(c.unnormalized_pair[1] == 1);
  CHECK_THROWS_AS(diag::coherence(DenseOperator::identity(1)), invalid_input);
  CHECK_THROWS_AS(diag::coherence(DenseOperator(2, 2, {1, 0, 0, 0})), invalid_input);
}

TEST_CASE("coherence agrees with the dense Gram matrix") {
  auto g = fixtures::random_weighted_graph(25, 0.3, 2);
  if (!g.isolated_vertices().empty()) g = induced_subgraph(g, set_difference(IndexSet::range(25), g.isolated_vertices())).graph;
  LaplacianView l(g);
  Eigen::MatrixXd d = fixtures::dense_rw_laplacian(g);
  Eigen::MatrixXd gram = d.transpose() * d;
  double un = 0, nm = 0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < gram.cols(); ++j) {
      un = std::max(un, std::abs(gram(i, j)));
      nm = std::max(nm, std::abs(gram(i, j)) / std::sqrt(gram(i, i) * gram(j, j)));
    }
  }
  auto c = diag::coherence(l);
  CHECK_THAT(c.unnormalized, WithinAbs(un, 1e-12));
  CHECK_THAT(c.normalized, WithinAbs(nm, 1e-12));
}

TEST_CASE("chi_statistic counts weighted common neighbours") {
  auto k4 = fixtures::k4();
  CHECK(diag::chi_statistic(k4, 0, 1) == 2.0);
  auto path = fixtures::path3();
  CHECK(diag::chi_statistic(path, 0, 2) == 1.0);
  CHECK(diag::chi_statistic(path, 0, 1) == 0.0);
  auto w = build_graph(3, {{0, 1, 2.0}, {1, 2, 3.0}});
  CHECK(diag::chi_statistic(w, 0, 2) == 6.0);
  CHECK_THROWS_AS(diag::chi_statistic(path, 1, 1), invalid_input);

  auto g = fixtures::random_weighted_graph(30, 0.3, 9);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(30, 30);
  for (const Edge& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = e.weight;
  Eigen::MatrixXd a2 = a * a;
  for (vertex_id i = 0; i < 30; ++i) {
    for (vertex_id j = i + 1; j < 30; ++j) CHECK_THAT(diag::chi_statistic(g, i, j), WithinAbs(a2(i, j), 1e-12));
  }
}

TEST_CASE("recovery_regime classifies the threshold") {
  CHECK(diag::recovery_regime(2, 16, 0).hint == diag::RegimeHint::above);
  CHECK(diag::recovery_regime(2, 16, 0).value == 2.0);
  CHECK(diag::recovery_regime(2, 4, 0).hint == diag::RegimeHint::boundary);
  CHECK(diag::recovery_regime(3, 4, 1).hint == diag::RegimeHint::below);
  CHECK(std::string(diag::to_string(diag::RegimeHint::above)) == ">1");
  CHECK_THROWS_AS(diag::recovery_regime(0, 1, 1), invalid_input);
  CHECK_THROWS_AS(diag::recovery_regime(1, -1, 1), invalid_input);
}

TEST_CASE("intra-cluster inner products clear the derived floor") {
  auto s = gen_sbm({2000, 4, 0.5, 0.01, {}}, 6, true);
  LaplacianView l(s.graph);
  auto f = diag::intra_inner_product_floor(l, s.truth, 4000, 1);
  CHECK(f.pairs == 4000);
  CHECK(f.n0 == 500.0);
  CHECK(f.derived_floor < f.stated_floor);
  CHECK(f.fraction_above_derived >= 0.95);
  CHECK(f.mean > f.derived_floor);
  CHECK(f.min <= f.mean);

  auto none = diag::intra_inner_product_floor(l, s.truth, 0, 1);
  CHECK(none.pairs == 0);
}

TEST_CASE("erc matches a normal-equation pseudo-inverse") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd a(12, 20);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    auto op = from_eigen(a);
    auto supp = IndexSet::from_list({1, 4, 9});
    Eigen::MatrixXd s(12, 3);
    s << a.col(1), a.col(4), a.col(9);
    Eigen::MatrixXd pinv = (s.transpose() * s).inverse() * s.transpose();
    double want = 0.0;
    for (Eigen::Index j = 0; j < 20; ++j) {
      if (j == 1 || j == 4 || j == 9) continue;
      want = std::max(want, (pinv * a.col(j)).cwiseAbs().sum());
    }
    auto r = diag::erc_check(op, supp);
    CHECK_THAT(r.value, WithinAbs(want, 1e-9 * std::max(1.0, want)));
    CHECK(r.holds == (want < 1.0));
  }
  CHECK(diag::erc_check(DenseOperator::identity(4), IndexSet::from_list({0, 2})).value == Approx(0.0).margin(1e-15));
  CHECK_THROWS_AS(diag::erc_check(DenseOperator(2, 2, {1, 0, 2, 0}), IndexSet::range(2)), invalid_input);
  CHECK_THROWS_AS(diag::erc_check(DenseOperator::identity(65), IndexSet::from_list({0})), invalid_input);
}

TEST_CASE("perturbation split norms") {
  // Two triangles joined by a single edge 2-3.
  auto g = build_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});
  auto part = Partition::contiguous({3, 3});
  auto p = diag::perturbation_split(g, part);
  // At vertex 2: d0 = 2, d = 3, r = 1/2.
  CHECK(p.r_max == Approx(0.5));
  CHECK(p.r_ratio_max == Approx(1.0 / 3.0));
  CHECK(p.e1_inf == Approx(1.0 / 3.0));
  CHECK(p.e2_inf == Approx(1.0 / 3.0));
  CHECK(p.zero_in_degree == 0);

  // Against the dense difference L - L0.
  auto s = gen_sbm({90, 3, 0.4, 0.05, {}}, 2);
  Eigen::MatrixXd l = fixtures::dense_rw_laplacian(s.graph);
  std::vector<Edge> in;
  for (const Edge& e : s.graph.edges()) {
    if (s.truth.cluster_of(e.u) == s.truth.cluster_of(e.v)) in.push_back(e);
  }
  auto g0 = build_graph(90, in);
  REQUIRE(g0.isolated_vertices().empty());
  Eigen::MatrixXd e = l - fixtures::dense_rw_laplacian(g0);
  auto rep = diag::perturbation_split(s.graph, s.truth);
  const double inf = e.cwiseAbs().rowwise().sum().maxCoeff();
  CHECK(inf <= rep.e1_inf + rep.e2_inf + 1e-12);
  CHECK(e.cwiseAbs().colwise().sum().maxCoeff() <= rep.e1_one + rep.e2_one + 1e-12);
  // Each row of E^1 sums to r/(1+r) and each row of E^2 to the same amount.
  CHECK_THAT(rep.e1_inf, WithinAbs(rep.r_ratio_max, 1e-12));
  CHECK_THAT(rep.e2_inf, WithinAbs(rep.r_ratio_max, 1e-12));
  CHECK_THAT(inf, WithinAbs(2 * rep.r_ratio_max, 1e-12));
}
