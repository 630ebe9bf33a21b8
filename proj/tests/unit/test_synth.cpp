#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "../support/test_support.hpp"
#include "mvskit/dataio.hpp"
#include "mvskit/error.hpp"
#include "mvskit/synth.hpp"

using namespace mvskit;

namespace {

SynthSpec small(SurfaceKind surface, int views = 3) {
  SynthSpec s;
  s.surface = surface;
  s.views = views;
  s.width = 64;
  s.height = 48;
  return s;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("ground-truth cloud lies on the surface") {
    for (SurfaceKind k : {SurfaceKind::kPlane, SurfaceKind::kSphere, SurfaceKind::kTwoBox}) {
      const SyntheticScene s = generate(small(k));
      REQUIRE(s.gt_cloud.size() > 100);
      for (const auto& p : s.gt_cloud.positions) CHECK(std::abs(s.surface_residual(p)) < 1e-9);
    }
  }

  TEST_CASE("sparse correspondences reproject exactly") {
    for (SurfaceKind k : {SurfaceKind::kPlane, SurfaceKind::kSphere, SurfaceKind::kTwoBox}) {
      const SyntheticScene s = generate(small(k));
      REQUIRE(!s.sparse.points.empty());
      CHECK_NOTHROW(s.sparse.validate(s.views, 1e-6));
      for (const auto& p : s.sparse.points) CHECK(p.observations.size() >= 2);
    }
  }

  TEST_CASE("depth maps agree with ray casting and the bracket") {
    const SyntheticScene s = generate(small(SurfaceKind::kTwoBox));
    for (int v = 0; v < 3; ++v)
      for (int y = 0; y < 48; y += 5)
        for (int x = 0; x < 64; x += 5) {
          const double d = s.gt_depths[v].at(y, x);
          CHECK(d == doctest::Approx(s.depth_at(v, {double(x), double(y)})).epsilon(1e-12));
          if (d > 0) CHECK((d >= s.depth_min && d <= s.depth_max));
        }
  }

  TEST_CASE("deterministic per seed") {
    const SyntheticScene a = generate(small(SurfaceKind::kSphere)), b = generate(small(SurfaceKind::kSphere));
    CHECK(a.views[1].image().data() == b.views[1].image().data());
    CHECK(a.gt_cloud.positions == b.gt_cloud.positions);
    SynthSpec other = small(SurfaceKind::kSphere);
    other.seed = 2;
    CHECK(generate(other).views[1].image().data() != a.views[1].image().data());
  }

  TEST_CASE("occlusion flags match an analytic check on the two-box scene") {
    const SyntheticScene s = generate(small(SurfaceKind::kTwoBox, 5));
    int occluded = 0;
    for (int v = 0; v < 5; ++v)
      for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x) {
          const double d = s.gt_depths[v].at(y, x);
          if (!(d > 0)) continue;
          const Eigen::Vector3d X = s.views[v].lift({double(x), double(y)}, d);
          for (int o = 0; o < 5; ++o) {
            if (o == v) continue;
            const auto proj = project_point(X, s.views[o]);
            const bool in_frame = proj && inside_interpolatable(proj->pixel.x, proj->pixel.y, 48, 64);
            if (!in_frame) {
              CHECK_FALSE(s.visible(v, y, x, o));
              CHECK_FALSE(s.occluded(v, y, x, o));
              continue;
            }
            // Oracle: the first hit along the other camera's ray.
            const double seen = s.depth_at(o, proj->pixel);
            const bool hidden = !(seen > 0) || seen < proj->depth * (1 - 1e-7);
            CHECK(s.occluded(v, y, x, o) == hidden);
            CHECK(s.visible(v, y, x, o) == !hidden);
            occluded += hidden;
          }
        }
    CHECK(occluded > 50);
  }

  TEST_CASE("scene directory round trips through the loaders") {
    test::TempDir dir("synthdir");
    const SyntheticScene s = generate(small(SurfaceKind::kPlane));
    const std::string root = dir.file("scene");
    write_scene(s, root, 32);
    const SceneManifest m = load_manifest(root);
    CHECK(m.view_ids() == std::vector<int>{0, 1, 2});
    const View v = load_view(m, 1);
    CHECK((v.extrinsics().matrix() - s.views[1].extrinsics().matrix()).cwiseAbs().maxCoeff() < 1e-12);
    for (std::size_t i = 0; i < v.image().data().size(); ++i)
      CHECK(std::abs(v.image().data()[i] - s.views[1].image().data()[i]) <= 0.5 / 255 + 1e-12);
    const DepthMap d = load_depth(m, 2);
    for (std::size_t i = 0; i < d.size(); ++i)
      CHECK(d.values()[i] == doctest::Approx(s.gt_depths[2].values()[i]).epsilon(1e-6));
    const CameraFile cam = load_camera(m, 0);
    CHECK(cam.depth_num == 32);
    CHECK(cam.depth_min == doctest::Approx(s.depth_min));
    CHECK(*cam.depth_max == doctest::Approx(s.depth_max));
    CHECK(m.sources_of(0).size() == 2);
    CHECK(read_ply(root + "/gt.ply").size() == s.gt_cloud.size());
    CHECK(read_sparse(root + "/sparse.txt").points.size() == s.sparse.points.size());
  }

  TEST_CASE("invalid specs") {
    SynthSpec s = small(SurfaceKind::kSphere);
    s.radius = 0.5;
    CHECK_THROWS_AS(generate(s), Error);
    s = small(SurfaceKind::kPlane);
    s.views = 0;
    CHECK_THROWS_AS(generate(s), Error);
    s = small(SurfaceKind::kPlane);
    s.channels = 2;
    CHECK_THROWS_AS(generate(s), Error);
    CHECK_THROWS_AS(parse_surface("torus"), Error);
    CHECK(parse_texture("checker") == TextureKind::kChecker);
  }
}
