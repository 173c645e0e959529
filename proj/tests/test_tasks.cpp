#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "igprune/error.hpp"
#include "igprune/tasks.hpp"
#include "support.hpp"

namespace igprune {
namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(PageRank, SymmetricSmallGraphs) {
  const auto edge = testing::path_graph(2);
  const auto pe = pagerank(edge, edge.all_edges()).values;
  EXPECT_NEAR(pe[0], 0.5, 1e-12);
  EXPECT_NEAR(pe[1], 0.5, 1e-12);
  const auto tri = testing::complete_graph(3);
  for (double x : pagerank(tri, tri.all_edges()).values) EXPECT_NEAR(x, 1.0 / 3.0, 1e-12);
}

TEST(PageRank, StarClosedForm) {
  // Centre c and three leaves l: c = 0.15/4 + 0.85 * 3l, l = (1 - c) / 3,
  // so c = (0.0375 + 0.85) / 1.85.
  const auto g = testing::star_graph(3);
  const auto pr = pagerank(g, g.all_edges()).values;
  const double centre = 0.8875 / 1.85;
  EXPECT_NEAR(pr[0], centre, 1e-9);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(pr[static_cast<std::size_t>(i)], (1 - centre) / 3, 1e-9);
}

TEST(PageRank, DanglingNodesAndNormalization) {
  const std::vector<std::pair<NodeId, NodeId>> pairs{{0, 1}, {1, 2}};
  const auto g = Graph::from_pairs(5, pairs);  // nodes 3 and 4 isolated
  const auto pr = pagerank(g, g.all_edges()).values;
  EXPECT_NEAR(sum(pr), 1.0, 1e-9);
  EXPECT_NEAR(pr[3], pr[4], 1e-15);
  const auto edgeless = Graph::from_pairs(4, {});
  for (double x : pagerank(edgeless, edgeless.all_edges()).values) EXPECT_NEAR(x, 0.25, 1e-15);
}

TEST(PageRank, WeightsSteerTheWalk) {
  const Graph g(3, {{0, 1, 1.0, 0}, {0, 2, 3.0, 0}}, Eigen::MatrixXd::Zero(3, 1));
  const auto pr = pagerank(g, g.all_edges()).values;
  EXPECT_GT(pr[2], pr[1]);
  EXPECT_NEAR(sum(pr), 1.0, 1e-9);
}

TEST(PageRank, InvariantUnderRelabeling) {
  const auto g = testing::random_graph(30, 70, 5);
  Rng rng(9);
  const auto perm = rng.permutation(30);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const Edge& e : g.edges()) pairs.emplace_back(perm[e.u], perm[e.v]);
  const auto h = Graph::from_pairs(30, pairs);
  const auto a = pagerank(g, g.all_edges()).values;
  const auto b = pagerank(h, h.all_edges()).values;
  EXPECT_NEAR(sum(a), 1.0, 1e-9);
  for (NodeId i = 0; i < 30; ++i) EXPECT_NEAR(a[i], b[perm[i]], 1e-10);
}

TEST(PageRank, NonConvergenceReportsResidual) {
  const auto g = testing::random_graph(30, 70, 5);
  PageRankOptions opt;
  opt.max_iter = 2;
  try {
    pagerank(g, g.all_edges(), opt);
    FAIL() << "converged in 2 iterations";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), opt.tol);
  }
  opt = {};
  opt.damping = 1.0;
  EXPECT_THROW(pagerank(g, g.all_edges(), opt), ValidationError);
}

TEST(Closeness, Examples) {
  const auto p3 = testing::path_graph(3);
  const auto c = closeness(p3, p3.all_edges()).values;
  EXPECT_DOUBLE_EQ(c[1], 1.0);
  EXPECT_DOUBLE_EQ(c[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(c[2], 2.0 / 3.0);
  const auto k5 = testing::complete_graph(5);
  for (double x : closeness(k5, k5.all_edges()).values) EXPECT_DOUBLE_EQ(x, 1.0);
  const std::vector<std::pair<NodeId, NodeId>> pairs{{0, 1}, {2, 3}};
  const auto two = Graph::from_pairs(4, pairs);
  for (double x : closeness(two, two.all_edges()).values) EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
  const auto lonely = Graph::from_pairs(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
  EXPECT_EQ(closeness(lonely, lonely.all_edges()).values[2], 0.0);
}

TEST(DegreeLike, Examples) {
  const auto star = testing::star_graph(3);
  EXPECT_EQ(degree_like(star, star.all_edges(), CentralityKind::degree).values,
            (std::vector<double>{3, 1, 1, 1}));
  const auto dc = degree_like(star, star.all_edges(), CentralityKind::degree_centrality).values;
  EXPECT_DOUBLE_EQ(dc[0], 1.0);
  EXPECT_DOUBLE_EQ(dc[1], 1.0 / 3.0);
  const auto edgeless = Graph::from_pairs(4, {});
  EXPECT_EQ(degree_like(edgeless, edgeless.all_edges(), CentralityKind::degree).values,
            std::vector<double>(4, 0.0));
  EXPECT_THROW(degree_like(star, star.all_edges(), CentralityKind::pagerank), ValidationError);
}

TEST(Terciles, Examples) {
  EXPECT_EQ(tercile_labels({{1, 2, 3, 4, 5, 6}, CentralityKind::degree}),
            (std::vector<int>{0, 0, 1, 1, 2, 2}));
  EXPECT_EQ(tercile_labels({std::vector<double>(6, 2.5), CentralityKind::degree}),
            (std::vector<int>{0, 0, 1, 1, 2, 2}));
  const auto seven = tercile_labels({{7, 1, 6, 2, 5, 3, 4}, CentralityKind::closeness});
  EXPECT_EQ(std::count(seven.begin(), seven.end(), 0), 3);
  EXPECT_EQ(std::count(seven.begin(), seven.end(), 1), 2);
  EXPECT_EQ(std::count(seven.begin(), seven.end(), 2), 2);
  EXPECT_EQ(seven[1], 0);
  EXPECT_EQ(seven[0], 2);
  EXPECT_THROW(tercile_labels({{1, 2}, CentralityKind::degree}), ValidationError);
}

TEST(Terciles, GroupSizesDifferByAtMostOne) {
  Rng rng(3);
  for (std::size_t n = 3; n <= 200; ++n) {
    std::vector<double> v(n);
    for (double& x : v) x = static_cast<double>(rng.below(5));
    const auto labels = tercile_labels({v, CentralityKind::degree});
    std::array<long, 3> sizes{};
    for (int y : labels) ++sizes[static_cast<std::size_t>(y)];
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) -
                  *std::min_element(sizes.begin(), sizes.end()),
              1);
    // Labels are monotone in the value.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (v[i] < v[j]) EXPECT_LE(labels[i], labels[j]);
      }
    }
  }
}

TEST(Karate, MatchesReferenceCentralities) {
  // networkx.pagerank (alpha 0.85) and networkx.closeness_centrality.
  const std::vector<double> pr_ref{
      0.09699728538830414,  0.05287692406114842,  0.0570785094884618,   0.03585985778641361,
      0.0219779523645932,   0.02911115467837563,  0.02911115467837563,  0.024490497035283804,
      0.029766056081016023, 0.01430939712903229,  0.0219779523645932,   0.009564745492136189,
      0.014644892011878227, 0.029536456151914494, 0.01453599399791999,  0.01453599399791999,
      0.016784005444192826, 0.014558677209022517, 0.01453599399791999,  0.019604636325653207,
      0.01453599399791999,  0.014558677209022517, 0.01453599399791999,  0.031522514776674566,
      0.02107603355922096,  0.02100619739449101,  0.015044038082724125, 0.02563976748284584,
      0.019573459463827398, 0.026288537695112,    0.02459015524857899,  0.03715808706914281,
      0.07169322600574758,  0.10091918233261697};
  const std::vector<double> cl_ref{
      0.5689655172413793,  0.4852941176470588,  0.559322033898305,  0.4647887323943662,
      0.3793103448275862,  0.38372093023255816, 0.38372093023255816, 0.44,
      0.515625,            0.4342105263157895,  0.3793103448275862, 0.36666666666666664,
      0.3707865168539326,  0.515625,            0.3707865168539326, 0.3707865168539326,
      0.28448275862068967, 0.375,               0.3707865168539326, 0.5,
      0.3707865168539326,  0.375,               0.3707865168539326, 0.39285714285714285,
      0.375,               0.375,               0.3626373626373626, 0.4583333333333333,
      0.4520547945205479,  0.38372093023255816, 0.4583333333333333, 0.5409836065573771,
      0.515625,            0.55};
  const auto [g, task] = builtin_karate();
  const auto pr = compute_centrality(g, CentralityKind::pagerank).values;
  const auto cl = compute_centrality(g, CentralityKind::closeness).values;
  for (std::size_t i = 0; i < 34; ++i) {
    EXPECT_NEAR(pr[i], pr_ref[i], 1e-8) << "node " << i;
    EXPECT_NEAR(cl[i], cl_ref[i], 1e-8) << "node " << i;
  }
}

TEST(Labels, WriterEmitsLabelsAndMeta) {
  testing::TempDir dir;
  const CentralityVector c{{0.3, 0.1, 0.2, 0.6, 0.5, 0.4}, CentralityKind::closeness};
  const auto labels = tercile_labels(c);
  write_labels_with_meta(c, labels, dir.path(), nlohmann::json::object());
  EXPECT_EQ(load_labels(dir / "labels_closeness.txt"), labels);
  const auto meta = nlohmann::json::parse(testing::read_file(dir / "labels_closeness.meta.json"));
  EXPECT_EQ(meta["kind"], "closeness");
  EXPECT_EQ(meta["group_sizes"], nlohmann::json({2, 2, 2}));
  EXPECT_EQ(meta["boundaries"][0].get<double>(), 0.2);
  EXPECT_EQ(meta["boundaries"][1].get<double>(), 0.4);
}

TEST(Centrality, NamesRoundTrip) {
  for (auto k : {CentralityKind::degree, CentralityKind::degree_centrality,
                 CentralityKind::closeness, CentralityKind::pagerank}) {
    EXPECT_EQ(parse_centrality(centrality_name(k)), k);
  }
  EXPECT_EQ(parse_centrality("betweenness"), std::nullopt);
}

}  // namespace
}  // namespace igprune
