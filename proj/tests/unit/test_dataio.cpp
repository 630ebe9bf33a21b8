#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>

#include "../support/test_support.hpp"
#include "mvskit/dataio.hpp"
#include "mvskit/error.hpp"

using namespace mvskit;

namespace {

const char* kIdentityCamera =
    "extrinsic\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n\nintrinsic\n1 0 0\n0 1 0\n0 0 1\n\n425 2.5\n";

std::size_t parse_error_line(const std::string& path, void (*reader)(const std::string&)) {
  try {
    reader(path);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_SUITE("dataio") {
  TEST_CASE("camera round trip") {
    Rng rng(1);
    test::TempDir dir("cam");
    for (int t = 0; t < 30; ++t) {
      CameraFile cam;
      cam.extrinsic = Extrinsics(test::random_rotation(rng), Eigen::Vector3d::Random() * 100).matrix();
      cam.intrinsics = Intrinsics(rng.uniform(100, 3000), rng.uniform(100, 3000), rng.uniform(0, 2000), rng.uniform(0, 2000));
      cam.depth_min = rng.uniform(0.1, 900);
      cam.depth_interval = rng.uniform(0.01, 10);
      if (t % 3 > 0) cam.depth_num = 192;
      if (t % 3 > 1) cam.depth_max = cam.depth_min + 191 * cam.depth_interval;
      write_camera(dir.file("c.txt"), cam);
      const CameraFile b = read_camera(dir.file("c.txt"));
      CHECK((b.extrinsic - cam.extrinsic).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK((b.intrinsics.matrix() - cam.intrinsics.matrix()).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK(b.depth_min == doctest::Approx(cam.depth_min).epsilon(1e-12));
      CHECK(b.depth_interval == doctest::Approx(cam.depth_interval).epsilon(1e-12));
      CHECK(b.depth_num == cam.depth_num);
      CHECK(b.depth_max.has_value() == cam.depth_max.has_value());
    }
  }

  TEST_CASE("identity camera and malformed files") {
    test::TempDir dir("cam2");
    test::spit(dir.file("id.txt"), kIdentityCamera);
    const CameraFile c = read_camera(dir.file("id.txt"));
    CHECK(c.extrinsics().matrix() == Eigen::Matrix4d::Identity());
    CHECK(c.intrinsics.matrix() == Eigen::Matrix3d::Identity());
    CHECK(c.depth_min == 425.0);
    CHECK_FALSE(c.depth_num);

    test::spit(dir.file("noblank.txt"),
               "extrinsic\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\nintrinsic\n1 0 0\n0 1 0\n0 0 1\n\n425 2.5\n");
    CHECK(parse_error_line(dir.file("noblank.txt"), [](const std::string& p) { read_camera(p); }) == 6);
    test::spit(dir.file("short.txt"), "extrinsic\n1 0 0 0\n0 1 0\n");
    CHECK(parse_error_line(dir.file("short.txt"), [](const std::string& p) { read_camera(p); }) == 3);
    test::spit(dir.file("skew.txt"),
               "extrinsic\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n\nintrinsic\n1 0.5 0\n0 1 0\n0 0 1\n\n425 2.5\n");
    CHECK(parse_error_line(dir.file("skew.txt"), [](const std::string& p) { read_camera(p); }) == 8);
    test::spit(dir.file("rot.txt"),
               "extrinsic\n2 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n\nintrinsic\n1 0 0\n0 1 0\n0 0 1\n\n425 2.5\n");
    CHECK_THROWS_AS(read_camera(dir.file("rot.txt")), Error);
  }

  TEST_CASE("pair files") {
    test::TempDir dir("pair");
    test::spit(dir.file("p.txt"), "2\n0\n1 1 0.5\n1\n1 0 0.5\n");
    const auto p = read_pair(dir.file("p.txt"));
    REQUIRE(p.size() == 2);
    CHECK(p[0].sources == std::vector<std::pair<int, double>>{{1, 0.5}});
    CHECK(p[1].sources == std::vector<std::pair<int, double>>{{0, 0.5}});
    write_pair(dir.file("q.txt"), p);
    const auto q = read_pair(dir.file("q.txt"));
    CHECK(q[1].ref_id == 1);
    CHECK(q[1].sources == p[1].sources);
    test::spit(dir.file("bad.txt"), "1\n0\n3 1 0.5\n");
    CHECK(parse_error_line(dir.file("bad.txt"), [](const std::string& p) { read_pair(p); }) == 3);
    test::spit(dir.file("self.txt"), "1\n0\n1 0 0.5\n");
    CHECK_THROWS_AS(read_pair(dir.file("self.txt")), ParseError);
  }

  TEST_CASE("PFM round trip and format") {
    Rng rng(2);
    test::TempDir dir("pfm");
    for (int t = 0; t < 10; ++t) {
      DepthMap d(1 + static_cast<int>(rng.below(30)), 1 + static_cast<int>(rng.below(30)));
      for (double& v : d.values()) v = static_cast<float>(rng.uniform(0, 1000));
      write_pfm(dir.file("d.pfm"), d);
      CHECK(read_pfm(dir.file("d.pfm")).values() == d.values());
    }
    write_pfm(dir.file("one.pfm"), DepthMap(1, 1, 5.0));
    const std::string bytes = test::slurp(dir.file("one.pfm"));
    CHECK(bytes == std::string("Pf\n1 1\n-1\n") + std::string("\x00\x00\xa0\x40", 4));

    // Big-endian payload (positive scale), rows bottom to top.
    std::string be = "Pf\n1 2\n1.0\n";
    for (float f : {3.0f, 7.0f}) {
      auto u = std::bit_cast<std::uint32_t>(f);
      for (int s = 24; s >= 0; s -= 8) be.push_back(static_cast<char>((u >> s) & 0xff));
    }
    test::spit(dir.file("be.pfm"), be);
    const DepthMap b = read_pfm(dir.file("be.pfm"));
    CHECK(b.at(1, 0) == 3.0);
    CHECK(b.at(0, 0) == 7.0);

    test::spit(dir.file("color.pfm"), "PF\n1 1\n-1\n");
    CHECK_THROWS_WITH_AS(read_pfm(dir.file("color.pfm")), doctest::Contains("color"), ParseError);
    test::spit(dir.file("short.pfm"), std::string("Pf\n2 1\n-1\n\x00\x00\xa0\x40", 14));
    CHECK_THROWS_AS(read_pfm(dir.file("short.pfm")), ParseError);
    test::spit(dir.file("neg.pfm"), std::string("Pf\n1 1\n-1\n\x00\x00\xa0\xc0", 14));
    CHECK_THROWS_AS(read_pfm(dir.file("neg.pfm")), ParseError);
  }

  TEST_CASE("manifest and view loading") {
    test::TempDir dir("manifest");
    const auto root = dir.path() / "scan7";
    std::filesystem::create_directories(root / "images");
    std::filesystem::create_directories(root / "cams");
    Image img(4, 5, 3, 0.2);
    write_image((root / "images/00000000.png").string(), img);
    write_image((root / "images/00000001.png").string(), img);
    test::spit((root / "cams/00000000_cam.txt").string(), kIdentityCamera);
    CameraFile moved;
    moved.extrinsic.topRightCorner<3, 1>() = Eigen::Vector3d(1, -2, 3);
    moved.intrinsics = Intrinsics(10, 10, 2, 1.5);
    moved.depth_min = 1;
    moved.depth_interval = 0.5;
    write_camera((root / "cams/00000001_cam.txt").string(), moved);

    const SceneManifest m = load_manifest(root.string());
    CHECK(m.scene_id == "scan7");
    CHECK(m.view_ids() == std::vector<int>{0, 1});
    CHECK(m.sources_of(0) == std::vector<int>{1});
    const View plain = load_view(m, 1, false), inv = load_view(m, 1, true);
    CHECK(plain.extrinsics().translation() == Eigen::Vector3d(1, -2, 3));
    CHECK(inv.extrinsics().translation() == Eigen::Vector3d(-1, 2, -3));
    CHECK(load_view(m, 0, true).extrinsics().matrix() == Eigen::Matrix4d::Identity());
    CHECK_THROWS_AS(load_depth(m, 0), Error);
    CHECK_THROWS_AS(load_view(m, 5), Error);

    std::filesystem::remove(root / "cams/00000001_cam.txt");
    CHECK_THROWS_AS(load_manifest(root.string()), Error);
  }
}
