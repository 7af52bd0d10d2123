#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "pursuit/cluster_pursuit.hpp"
#include "pursuit/cocluster.hpp"
#include "pursuit/pipeline.hpp"
#include "pursuit/random_graphs.hpp"
#include "support.hpp"

using namespace pursuit;
using Catch::Matchers::WithinAbs;

namespace {

SparseGraph relabel(const SparseGraph& g, const std::vector<vertex_id>& perm) {
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    vertex_id a = perm[e.u], b = perm[e.v];
    if (a > b) std::swap(a, b);
    edges.push_back({a, b, e.weight});
  }
  return build_graph(g.num_vertices(), std::move(edges));
}

IndexSet map_set(const IndexSet& s, const std::vector<vertex_id>& perm) {
  std::vector<vertex_id> out;
  for (vertex_id v : s) out.push_back(perm[v]);
  return IndexSet::from_unsorted(out);
}

Eigen::MatrixXd dense_bipartite_laplacian(const RectMatrix& b) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  for (const MatrixEntry& e : b.entries()) m(e.row, e.col) = e.value;
  Eigen::VectorXd dx = m.rowwise().sum(), dy = m.colwise().sum().transpose();
  Eigen::MatrixXd w = m * dy.cwiseInverse().asDiagonal() * m.transpose();
  return Eigen::MatrixXd::Identity(w.rows(), w.cols()) - dx.cwiseInverse().asDiagonal() * w;
}

}  // namespace

TEST_CASE("connected_component_omp examples") {
  auto two = fixtures::two_k3();
  LaplacianView l(two);
  CHECK(connected_component_omp(l, 0) == IndexSet::from_list({0, 1, 2}));
  CHECK(connected_component_omp(l, 4) == IndexSet::from_list({3, 4, 5}));

  auto path = fixtures::path3();
  LaplacianView lp(path);
  CHECK(connected_component_omp(lp, 2) == IndexSet::range(3));

  auto te = fixtures::two_edges();
  LaplacianView lt(te);
  CHECK(connected_component_omp(lt, 3) == IndexSet::from_list({2, 3}));
  CHECK_THROWS_AS(connected_component_omp(lt, 4), invalid_input);
}

TEST_CASE("connected_component_omp equals BFS on random disconnected graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = gen_sbm({120, 4, 0.15, 0.0, {}}, seed, true);
    if (!s.isolated.empty()) continue;
    LaplacianView l(s.graph);
    Rng rng(seed);
    auto v = static_cast<vertex_id>(rng.below(120));
    CHECK(connected_component_omp(l, v) == bfs_component(s.graph, v));
  }
}

TEST_CASE("omega_budget rounds up robustly") {
  CHECK(omega_budget(10, 10.0 / 9.0) == 10);
  CHECK(omega_budget(3, 10.0 / 9.0) == 3);
  CHECK(omega_budget(100, 10.0 / 9.0) == 110);
  CHECK(omega_budget(2, 1.5) == 2);
}

TEST_CASE("threshold_stage on two triangles") {
  auto two = fixtures::two_k3();
  LaplacianView l(two);
  auto th = threshold_stage(l, 0, 3);
  // <l_1, l_0> = <l_2, l_0> = -3/4; the third slot is a zero-correlation tie
  // broken towards the smallest id.
  CHECK(th.omega == IndexSet::from_list({1, 2, 3}));
  CHECK_FALSE(th.clamped);
  auto big = threshold_stage(l, 0, 6);
  CHECK(big.clamped);
  CHECK(big.omega == IndexSet::range_without(6, 0));
}

TEST_CASE("scp hand trace on two triangles") {
  auto two = fixtures::two_k3();
  LaplacianView l(two);
  ScpConfig cfg;
  cfg.seed_vertex = 0;
  cfg.n0_hat = 3;
  auto r = scp(l, cfg);
  CHECK(r.omega == IndexSet::from_list({1, 2, 3}));
  CHECK(r.lambda_sharp == IndexSet::from_list({3}));
  CHECK(r.cluster == IndexSet::from_list({0, 1, 2}));
  CHECK(r.sp_result.residual_norm < 1e-12);
  CHECK(r.converged());
}

TEST_CASE("scp validates its configuration") {
  auto two = fixtures::two_k3();
  LaplacianView l(two);
  ScpConfig cfg;
  cfg.n0_hat = 1;
  CHECK_THROWS_AS(scp(l, cfg), invalid_input);
  cfg.n0_hat = 7;
  CHECK_THROWS_AS(scp(l, cfg), invalid_input);
  cfg.n0_hat = 3;
  cfg.seed_vertex = 6;
  CHECK_THROWS_AS(scp(l, cfg), invalid_input);
  cfg.seed_vertex = 0;
  cfg.omega_factor = 1.0;
  CHECK_THROWS_AS(scp(l, cfg), invalid_input);
}

TEST_CASE("scp with a clamped budget seeks no outliers") {
  auto k4 = fixtures::k4();
  LaplacianView l(k4);
  ScpConfig cfg;
  cfg.n0_hat = 4;
  auto r = scp(l, cfg);
  CHECK(r.omega_clamped);
  CHECK(r.empty_sparsity);
  CHECK(r.cluster == IndexSet::range(4));
}

TEST_CASE("scp equals the component when q = 0") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto s = gen_sbm({300, 3, 0.5, 0.0, {}}, seed, true);
    REQUIRE(s.isolated.empty());
    LaplacianView l(s.graph);
    ScpConfig cfg;
    cfg.seed_vertex = static_cast<vertex_id>(seed * 7 % 300);
    cfg.n0_hat = 100;
    auto truth = bfs_component(s.graph, cfg.seed_vertex);
    REQUIRE(truth.size() == 100);
    CHECK(scp(l, cfg).cluster == truth);
  }
}

TEST_CASE("scp commutes with vertex relabelling") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Weighted so that correlation ties do not occur.
    auto base = gen_sbm({150, 3, 0.4, 0.02, {}}, seed);
    std::vector<Edge> edges;
    Rng wr(seed + 50);
    for (const Edge& e : base.graph.edges()) edges.push_back({e.u, e.v, 0.5 + wr.uniform()});
    auto g = build_graph(150, std::move(edges));
    if (!g.isolated_vertices().empty()) continue;
    Rng rng(seed + 99);
    auto perm = rng.permutation(150);
    auto h = relabel(g, perm);
    LaplacianView lg(g), lh(h);
    ScpConfig a, b;
    a.n0_hat = b.n0_hat = 50;
    a.seed_vertex = 3;
    b.seed_vertex = perm[3];
    CHECK(map_set(scp(lg, a).cluster, perm) == scp(lh, b).cluster);
  }
}

TEST_CASE("scp recovers a planted cluster under light noise") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = gen_sbm({600, 3, 0.4, 0.01, {}}, seed, true);
    if (!s.isolated.empty()) continue;
    LaplacianView l(s.graph);
    ScpConfig cfg;
    cfg.seed_vertex = 0;
    cfg.n0_hat = 200;
    auto r = scp(l, cfg);
    exact += r.cluster == s.truth.cluster(s.truth.cluster_of(0));
  }
  CHECK(exact >= 9);
}

TEST_CASE("iscp on two triangles") {
  auto two = fixtures::two_k3();
  auto r = iscp(two, IscpSchedule::uniform(3, 2));
  CHECK(r.complete);
  CHECK(r.rejected.empty());
  CHECK(r.partition.assignment() == std::vector<vertex_id>{0, 0, 0, 1, 1, 1});
  CHECK(r.rounds.size() == 1);
}

TEST_CASE("iscp rejects vertices left without edges") {
  auto g = build_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}});
  auto r = iscp(g, IscpSchedule{{3, 2}});
  CHECK(r.rejected == IndexSet::from_list({5}));
  CHECK(r.partition.assignment() == std::vector<vertex_id>{0, 0, 0, 1, 1, 2});
}

TEST_CASE("iscp validates its schedule") {
  auto two = fixtures::two_k3();
  CHECK_THROWS_AS(iscp(two, IscpSchedule{{}}), invalid_input);
  CHECK_THROWS_AS(iscp(two, IscpSchedule{{4, 4}}), invalid_input);
}

TEST_CASE("iscp recovers every block of a noisy model") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = gen_sbm({800, 4, 0.4, 0.01, {}}, seed, true);
    if (!s.isolated.empty()) continue;
    auto r = iscp(s.graph, IscpSchedule::uniform(200, 4));
    exact += partition_accuracy(r.partition, s.truth).accuracy == 1.0;
  }
  CHECK(exact >= 4);
}

TEST_CASE("bipartite Laplacian agrees with the dense formula") {
  auto bm = gen_block_matrix(30, 20, 2, 0.6, 0.1, 4);
  BipartiteLaplacianView l(bm.matrix);
  Eigen::MatrixXd dense = dense_bipartite_laplacian(bm.matrix);
  Rng rng(1);
  std::vector<double> x(30), r(30);
  for (double& v : x) v = rng.normal();
  for (double& v : r) v = rng.normal();
  auto all = IndexSet::range(30);
  auto ax = l.apply(all, x);
  auto atr = l.apply_transpose(all, r);
  Eigen::VectorXd want = dense * Eigen::Map<Eigen::VectorXd>(x.data(), 30);
  Eigen::VectorXd want_t = dense.transpose() * Eigen::Map<Eigen::VectorXd>(r.data(), 30);
  for (int i = 0; i < 30; ++i) {
    CHECK_THAT(ax[i], WithinAbs(want(i), 1e-12));
    CHECK_THAT(atr[i], WithinAbs(want_t(i), 1e-12));
  }
  CHECK(linalg::norm_inf(l.apply(all, std::vector<double>(30, 1.0))) < 1e-12);
}

TEST_CASE("RectMatrix validation") {
  CHECK_THROWS_AS(RectMatrix(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), invalid_input);
  CHECK_THROWS_AS(RectMatrix(2, 2, {{0, 2, 1.0}}), invalid_input);
  CHECK_THROWS_AS(RectMatrix(2, 2, {{0, 1, -1.0}}), invalid_input);
  RectMatrix m(2, 3, {{0, 1, 2.0}, {1, 0, 1.0}, {1, 2, 0.0}});
  CHECK(m.nnz() == 2);
  CHECK(m.row_sum(0) == 2.0);
  CHECK(m.col_sum(2) == 0.0);
  CHECK_THROWS_AS(BipartiteLaplacianView(m), invalid_input);
}

TEST_CASE("cocluster splits a two-block matrix") {
  RectMatrix b(4, 4, {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}, {2, 2, 1}, {2, 3, 1}, {3, 2, 1}, {3, 3, 1}});
  auto r = cocluster(b, 2, 2);
  CHECK(r.rows.assignment() == std::vector<vertex_id>{0, 0, 1, 1});
  CHECK(r.cols.assignment() == std::vector<vertex_id>{0, 0, 1, 1});
  CHECK(r.rejected_rows.empty());
  CHECK(r.rejected_cols.empty());
}

TEST_CASE("cocluster recovers permuted noisy blocks") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto bm = gen_block_matrix(400, 200, 4, 0.6, 0.02, seed, true);
    auto r = cocluster(bm.matrix, 100, 4);
    exact += partition_accuracy(r.rows, bm.row_truth).accuracy == 1.0 &&
             partition_accuracy(r.cols, bm.col_truth).accuracy == 1.0;
  }
  CHECK(exact >= 4);
}

TEST_CASE("gen_block_matrix permutes labels with the entries") {
  auto bm = gen_block_matrix(40, 20, 2, 1.0, 0.0, 9, true);
  for (const MatrixEntry& e : bm.matrix.entries()) CHECK(bm.row_truth.cluster_of(e.row) == bm.col_truth.cluster_of(e.col));
  CHECK(bm.matrix.nnz() == 2 * 20 * 10);
  CHECK_THROWS_AS(gen_block_matrix(40, 21, 2, 1.0, 0.0, 9), invalid_input);
}
