#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../support/test_support.hpp"
#include "mvskit/error.hpp"
#include "mvskit/evaluation.hpp"
#include "mvskit/reference.hpp"
#include "mvskit/spatial_index.hpp"

using namespace mvskit;

namespace {

PointCloud random_cloud(Rng& rng, std::size_t n, double spread = 1.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.positions.emplace_back(rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(-spread, spread));
  return c;
}

PointCloud cloud(std::initializer_list<Eigen::Vector3d> pts) {
  PointCloud c;
  c.positions.assign(pts.begin(), pts.end());
  return c;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("nearest distances") {
    CHECK(nn_distances(cloud({{0, 0, 0}}), cloud({{1, 0, 0}, {0, 2, 0}})) == std::vector<double>{1.0});
    Rng rng(1);
    const PointCloud t = random_cloud(rng, 500);
    PointCloud q;
    for (int i = 0; i < 100; ++i) q.positions.push_back(t.positions[rng.below(500)]);
    for (double d : nn_distances(q, t)) CHECK(d == 0.0);
    CHECK_THROWS_AS(nn_distances(q, PointCloud{}), Error);
  }

  TEST_CASE("grid index equals brute force bit for bit") {
    Rng rng(2);
    for (int t = 0; t < 12; ++t) {
      PointCloud a = random_cloud(rng, 1000 + rng.below(2000)), b = random_cloud(rng, 1000 + rng.below(2000));
      if (t % 3 == 1)
        for (auto& p : a.positions) p.z() = 0.0;  // degenerate extent
      if (t % 3 == 2)
        for (auto& p : b.positions) p *= 100.0;  // queries far inside a sparse target
      CHECK(nn_distances(a, b) == reference::nn_distances(a, b));
      CHECK(nn_distances(b, a) == reference::nn_distances(b, a));
    }
    // Duplicates and a single target point.
    PointCloud one = cloud({{0.5, 0.5, 0.5}});
    const PointCloud q = random_cloud(rng, 300);
    CHECK(nn_distances(q, one) == reference::nn_distances(q, one));
  }

  TEST_CASE("index picks the lower index on ties and honors explicit cells") {
    const SpatialIndex idx({{1, 0, 0}, {-1, 0, 0}, {1, 0, 0}}, 0.25);
    const Neighbor n = idx.nearest({0, 0, 0});
    CHECK(n.index == 0);
    CHECK(n.distance == 1.0);
    CHECK(idx.nearest({0.9, 0, 0}).index == 0);
    CHECK(idx.cell_size() == 0.25);
  }

  TEST_CASE("precision and recall examples") {
    const PointCloud g = cloud({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
    CHECK(precision(g, g, 0.01) == 100.0);
    CHECK(recall(g, g, 0.01) == 100.0);
    const PointCloud r = cloud({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {9, 9, 9}});
    CHECK(precision(r, g, 0.5) == 75.0);
    CHECK(precision(r, cloud({{50, 50, 50}}), 1.0) == 0.0);
    CHECK(recall(cloud({{0, 0, 0}}), g, 0.5) == 25.0);
    CHECK_THROWS_AS(recall(PointCloud{}, g, 0.5), Error);
    CHECK_THROWS_AS(precision(r, g, 0.0), Error);
    // Strict inequality at the threshold.
    CHECK(precision(cloud({{1, 0, 0}}), cloud({{0, 0, 0}}), 1.0) == 0.0);
  }

  TEST_CASE("recall is precision with the roles swapped, monotone in d") {
    Rng rng(3);
    const PointCloud a = random_cloud(rng, 700), b = random_cloud(rng, 900);
    double prev_p = 0, prev_r = 0;
    for (double d : {0.01, 0.02, 0.05, 0.1, 0.3}) {
      CHECK(recall(a, b, d) == precision(b, a, d));
      const double p = precision(a, b, d), r = recall(a, b, d);
      CHECK(p >= prev_p);
      CHECK(r >= prev_r);
      const double f = fscore(p, r);
      CHECK(f <= 2.0 * std::min(p, r) + 1e-12);
      prev_p = p;
      prev_r = r;
    }
  }

  TEST_CASE("fscore examples") {
    CHECK(fscore(50, 50) == 50.0);
    CHECK(fscore(100, 0) == 0.0);
    CHECK(fscore(0, 0) == 0.0);
    CHECK(fscore(60, 30) == doctest::Approx(40.0).epsilon(1e-15));
    CHECK_THROWS_AS(fscore(101, 0), Error);
  }

  TEST_CASE("evaluate shares distances across thresholds") {
    Rng rng(4);
    const PointCloud a = random_cloud(rng, 300), b = random_cloud(rng, 300);
    const auto reports = evaluate(a, b, {0.05, 0.1});
    REQUIRE(reports.size() == 2);
    CHECK(reports[1].precision == precision(a, b, 0.1));
    CHECK(reports[1].recall == recall(a, b, 0.1));
    CHECK(reports[0].recon_to_gt == nn_distances(a, b));
  }

  TEST_CASE("DTU metrics") {
    Rng rng(5);
    const PointCloud g = random_cloud(rng, 400, 5.0);
    const DtuMetrics same = dtu_metrics(g, g, 20.0);
    CHECK(same.accuracy == 0.0);
    CHECK(same.completeness == 0.0);
    CHECK(same.overall == 0.0);

    // Well-separated grid so the shifted copy's nearest point is its twin.
    PointCloud grid;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) grid.positions.emplace_back(i, j, 0);
    PointCloud shifted = grid;
    for (auto& p : shifted.positions) p.x() += 0.1;
    const DtuMetrics m = dtu_metrics(shifted, grid, 20.0);
    CHECK(m.accuracy == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(m.completeness == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(m.overall == doctest::Approx(0.1).epsilon(1e-12));

    PointCloud outlier = shifted;
    outlier.positions.emplace_back(500, 500, 500);
    const DtuMetrics o = dtu_metrics(outlier, grid, 20.0);
    CHECK(o.accuracy == m.accuracy);
    CHECK(o.accuracy_kept == 25);
  }

  TEST_CASE("mesh sampling") {
    TriangleMesh tri{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}};
    for (const auto& p : sample_mesh(tri, 2000, 1).positions) {
      CHECK(p.x() >= -1e-12);
      CHECK(p.y() >= -1e-12);
      CHECK(p.x() + p.y() <= 1.0 + 1e-12);
      CHECK(p.z() == 0.0);
    }
    // Areas 1 and 3: counts ~ Binomial(n, 1/4).
    TriangleMesh two{{{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {10, 0, 0}, {16, 0, 0}, {10, 1, 0}}, {{0, 1, 2}, {3, 4, 5}}};
    const int n = 40000;
    int first = 0;
    for (const auto& p : sample_mesh(two, n, 2).positions) first += p.x() < 5;
    const double sigma = std::sqrt(n * 0.25 * 0.75);
    CHECK(std::abs(first - n / 4.0) < 3 * sigma);

    TriangleMesh square{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}}};
    const PointCloud s = sample_mesh(square, 100000, 3);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : s.positions) mean += p;
    mean /= double(s.size());
    CHECK(std::abs(mean.x() - 0.5) < 0.01);
    CHECK(std::abs(mean.y() - 0.5) < 0.01);
    CHECK(sample_mesh(square, 50, 7).positions == sample_mesh(square, 50, 7).positions);
  }

  TEST_CASE("OBJ round trip and errors") {
    test::TempDir dir("obj");
    test::spit(dir.file("q.obj"), "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n");
    const TriangleMesh m = read_obj(dir.file("q.obj"));
    CHECK(m.vertices.size() == 4);
    CHECK(m.triangles.size() == 2);
    write_obj(dir.file("o.obj"), m);
    const TriangleMesh back = read_obj(dir.file("o.obj"));
    CHECK(back.vertices == m.vertices);
    CHECK(back.triangles == m.triangles);
    test::spit(dir.file("bad.obj"), "v 0 0 0\nv 1 0 0\nf 1 2 9\n");
    try {
      read_obj(dir.file("bad.obj"));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("CSV outputs") {
    test::TempDir dir("evalcsv");
    const PointCloud a = cloud({{0, 0, 0}, {1, 0, 0}}), b = cloud({{0, 0, 0}, {3, 0, 0}});
    const auto reports = evaluate(a, b, {0.5});
    write_eval_csv(dir.file("e.csv"), reports, dtu_metrics(a, b, 20.0));
    const std::string csv = test::slurp(dir.file("e.csv"));
    CHECK(csv.rfind("metric,threshold,value\n", 0) == 0);
    CHECK(csv.find("precision,0.5,50\n") != std::string::npos);
    CHECK(csv.find("accuracy,20,") != std::string::npos);
    write_distance_histogram(dir.file("h.csv"), reports[0], 4, 1.0);
    const std::string h = test::slurp(dir.file("h.csv"));
    CHECK(h.find("gt_to_recon,1,inf,1") != std::string::npos);
  }
}
