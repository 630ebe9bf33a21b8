// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../support/test_support.hpp"
#include "mvskit/cli.hpp"
#include "mvskit/dataio.hpp"
#include "mvskit/error.hpp"
#include "mvskit/evaluation.hpp"
#include "mvskit/gpm.hpp"
#include "mvskit/losses.hpp"
#include "mvskit/mmd.hpp"
#include "mvskit/point_cloud.hpp"
#include "mvskit/reference.hpp"
#include "mvskit/split.hpp"
#include "mvskit/style.hpp"
#include "mvskit/sweep.hpp"
#include "mvskit/synth.hpp"

using namespace mvskit;
using mvskit::test::Stopwatch;
using mvskit::test::TempDir;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <typename... Args>
std::string cat(Args&&... parts) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << parts);
  return os.str();
}

// Synthetic plane scene shared by several criteria.
const SyntheticScene& plane_scene() {
  static const SyntheticScene scene = [] {
    SynthSpec spec;
    spec.surface = SurfaceKind::kPlane;
    spec.views = 5;
    spec.width = spec.height = 128;
    return generate(spec);
  }();
  return scene;
}

std::vector<View> sources_of(const SyntheticScene& s, int ref) {
  std::vector<View> out;
  for (const View& v : s.views) {
    if (v.id() != ref) out.push_back(v);
  }
  return out;
}

// 1. project ref -> src -> ref on random configurations. Only the projection
// calls are timed.
Outcome geometry_round_trip() {
  struct Config {
    View ref, src;
    Pixel p;
    double depth;
  };
  Rng rng(101);
  std::vector<Config> configs;
  while (configs.size() < 10000) {
    const int w = 64 + static_cast<int>(rng.below(600)), h = 64 + static_cast<int>(rng.below(400));
    const double f = rng.uniform(50.0, 1500.0);
    const Intrinsics kr(f, f * rng.uniform(0.9, 1.1), rng.uniform(0.3, 0.7) * w, rng.uniform(0.3, 0.7) * h);
    const Intrinsics ks(f * rng.uniform(0.8, 1.2), f * rng.uniform(0.8, 1.2), rng.uniform(0.3, 0.7) * w,
                        rng.uniform(0.3, 0.7) * h);
    const Eigen::Matrix3d rr = test::random_rotation(rng);
    const Eigen::Vector3d tr(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Eigen::Matrix3d rs = test::random_rotation(rng, 0.35) * rr;
    const Eigen::Vector3d cs = -rr.transpose() * tr + Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                                                       rng.uniform(-1, 1));
    // Projection never reads pixel data, so a 2x2 image stands in for the frame.
    View ref(Image(2, 2, 1), kr, Extrinsics(rr, tr), 0);
    View src(Image(2, 2, 1), ks, Extrinsics(rs, -rs * cs), 1);
    const Pixel p{rng.uniform(0.0, w - 1.0), rng.uniform(0.0, h - 1.0)};
    const double depth = rng.uniform(2.0, 20.0);
    if (!try_project_pixel(p, depth, ref, src)) continue;
    configs.push_back({std::move(ref), std::move(src), p, depth});
  }
  Stopwatch clock;
  double worst = 0.0;
  bool behind = false;
  for (const Config& c : configs) {
    const auto there = try_project_pixel(c.p, c.depth, c.ref, c.src);
    const auto back = there ? try_project_pixel(there->pixel, there->depth, c.src, c.ref) : std::nullopt;
    if (!back) {
      behind = true;
      continue;
    }
    worst = std::max(worst, std::hypot(back->pixel.x - c.p.x, back->pixel.y - c.p.y));
  }
  const double t = clock.seconds();
  return {!behind && worst < 1e-6 && t < 1.0,
          cat("configs=", configs.size(), " max_err_px=", worst, " (< 1e-6) time=", t, "s (< 1)")};
}

// 2. Photometric loss at ground truth and under depth scaling.
Outcome photometric_oracle() {
  Stopwatch clock;
  const SyntheticScene& s = plane_scene();
  const auto sources = sources_of(s, 0);
  auto loss_at = [&](double scale) {
    DepthMap d = s.gt_depths[0];
    for (double& v : d.values()) v *= scale;
    return photometric_loss(s.views[0], sources, d).total;
  };
  const double l0 = loss_at(1.0);
  const double up1 = loss_at(1.05), up2 = loss_at(1.2), dn1 = loss_at(1.0 / 1.05), dn2 = loss_at(1.0 / 1.2);
  const double t = clock.seconds();
  const bool monotone = l0 < up1 && up1 < up2 && l0 < dn1 && dn1 < dn2;
  return {l0 < 1e-3 && monotone && t < 5.0,
          cat("L(gt)=", l0, " (< 1e-3) L(x1.05)=", up1, " L(x1.2)=", up2, " L(/1.05)=", dn1, " L(/1.2)=", dn2,
              " monotone=", monotone, " time=", t, "s (< 5)")};
}

// 3. Plane-sweep median error over textured interior pixels.
Outcome plane_sweep_accuracy() {
  Stopwatch clock;
  const SyntheticScene& s = plane_scene();
  const auto hyps = DepthHypotheses::uniform(s.depth_min, s.depth_max, 64);
  const double interval = hyps[1] - hyps[0];
  SweepOptions opts;
  opts.cost = CostKind::kSSD;
  opts.window = 5;
  opts.temperature = 0.1;
  double worst = 0.0;
  for (int ref = 0; ref < static_cast<int>(s.views.size()); ++ref) {
    const SweepResult r = plane_sweep_depth(s.views[ref], sources_of(s, ref), hyps, opts);
    const Image gray = s.views[ref].image().gray();
    const int margin = 8, h = gray.height(), w = gray.width();
    std::vector<double> err;
    for (int y = margin; y < h - margin; ++y) {
      for (int x = margin; x < w - margin; ++x) {
        if (!s.gt_depths[ref].valid(y, x)) continue;
        double m = 0.0, q = 0.0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            const double v = gray.at(y + dy, x + dx, 0);
            m += v;
            q += v * v;
          }
        m /= 25.0;
        if (q / 25.0 - m * m < 1e-4) continue;  // untextured
        err.push_back(std::abs(r.depth.at(y, x) - s.gt_depths[ref].at(y, x)));
      }
    }
    auto mid = err.begin() + err.size() / 2;
    std::nth_element(err.begin(), mid, err.end());
    worst = std::max(worst, *mid);
  }
  const double t = clock.seconds();
  return {worst < interval && t < 30.0,
          cat("worst per-view median |err|=", worst, " interval=", interval, " time=", t, "s (< 30)")};
}

// 4. Soft-argmin on one-hot and random volumes.
Outcome soft_argmin_exactness() {
  Rng rng(404);
  bool exact = true, convex = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const int K = 2 + static_cast<int>(rng.below(63));
    std::vector<double> v(K);
    double acc = rng.uniform(0.1, 5.0);
    for (double& d : v) d = acc += rng.uniform(1e-3, 1.0);
    const DepthHypotheses hyps(v);
    const int h = 1 + static_cast<int>(rng.below(4)), w = 1 + static_cast<int>(rng.below(4));
    ProbabilityVolume onehot(h, w, K), random(h, w, K);
    std::vector<int> hot(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int k = static_cast<int>(rng.below(K));
        hot[static_cast<std::size_t>(y) * w + x] = k;
        onehot.at(y, x, k) = 1.0;
        double sum = 0.0;
        for (int j = 0; j < K; ++j) sum += random.at(y, x, j) = rng.uniform() * (rng.uniform() < 0.2 ? 0.0 : 1.0);
        if (sum == 0.0) random.at(y, x, 0) = sum = 1.0;
        for (int j = 0; j < K; ++j) random.at(y, x, j) /= sum;
      }
    }
    const DepthMap a = soft_argmin(onehot, hyps), b = soft_argmin(random, hyps);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        exact = exact && a.at(y, x) == hyps[hot[static_cast<std::size_t>(y) * w + x]];
        convex = convex && b.at(y, x) >= hyps.front() && b.at(y, x) <= hyps.back();
      }
    }
  }
  return {exact && convex, cat("one-hot exact=", exact, " convex range on 1000 random volumes=", convex)};
}

// 5. KL consistency loss.
Outcome kl_suite() {
  Rng rng(505);
  auto random_volume = [&](int h, int w, int K) {
    CostVolume cv(h, w, K);
    for (double& c : cv.data()) c = rng.uniform(0.0, 10.0);
    return cost_to_probability(cv, rng.uniform(0.05, 3.0));
  };
  const ProbabilityVolume p = random_volume(6, 7, 16);
  const double self = kl_consistency_loss(p, p);
  ProbabilityVolume a(1, 1, 2), b(1, 1, 2);
  a.at(0, 0, 0) = 1.0;
  b.at(0, 0, 0) = b.at(0, 0, 1) = 0.5;
  const double ln2 = kl_consistency_loss(a, b);
  double lowest = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 1000; ++t) {
    const int h = 1 + static_cast<int>(rng.below(5)), w = 1 + static_cast<int>(rng.below(5));
    const int K = 2 + static_cast<int>(rng.below(31));
    lowest = std::min({lowest, kl_consistency_loss(random_volume(h, w, K), random_volume(h, w, K)),
                       kl_consistency_loss(random_volume(h, w, K), random_volume(h, w, K), KlDirection::kSymmetric)});
  }
  const bool ok = self == 0.0 && std::abs(ln2 - std::numbers::ln2) <= 1e-9 && lowest >= 0.0;
  return {ok, cat("KL(p,p)=", self, " KL((1,0)||(.5,.5))-ln2=", ln2 - std::numbers::ln2, " min over 2000 pairs=", lowest)};
}

// 6. WCT moment matching, full rank and rank deficient style.
Outcome wct_statistics() {
  Stopwatch clock;
  Rng rng(606);
  const int C = 16, h = 32, w = 32, M = h * w;
  auto random_map = [&](int rank) {
    Eigen::MatrixXd mix(C, rank), z(rank, M);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    Eigen::MatrixXd data = mix * z;
    for (int c = 0; c < C; ++c) data.row(c).array() += rng.uniform(-2.0, 2.0);
    return FeatureMap(data, h, w);
  };
  auto stats = [](const FeatureMap& f) {
    const Eigen::VectorXd mean = f.data.rowwise().mean();
    const Eigen::MatrixXd centered = f.data.colwise() - mean;
    return std::make_pair(mean, Eigen::MatrixXd(centered * centered.transpose() / static_cast<double>(f.positions())));
  };
  double worst_cov = 0.0, worst_mean = 0.0;
  for (int style_rank : {C, C, 10}) {
    const FeatureMap content = random_map(C), style = random_map(style_rank);
    const FeatureMap out = wct(content, style, 1.0);
    const auto [mo, co] = stats(out);
    const auto [ms, cs] = stats(style);
    worst_cov = std::max(worst_cov, (co - cs).norm() / cs.norm());
    worst_mean = std::max(worst_mean, (mo - ms).cwiseAbs().maxCoeff());
  }
  const double t = clock.seconds();
  return {worst_cov < 1e-4 && worst_mean < 1e-6 && t < 5.0,
          cat("rel Frobenius cov err=", worst_cov, " (< 1e-4) mean err=", worst_mean, " (< 1e-6) incl. rank-10 style, time=",
              t, "s (< 5)")};
}

// 7. GPM lowers the multi-view photometric error of stylized views.
Outcome gpm_geometry_preservation() {
  const SyntheticScene& s = plane_scene();
  SynthSpec style_spec;
  style_spec.texture = TextureKind::kChecker;
  style_spec.views = 2;
  style_spec.seed = 99;
  const Image style = generate(style_spec).views[0].image();
  std::vector<View> raw, filtered;
  bool in_range = true;
  for (const View& v : s.views) {
    const Image stylized = transfer_style(v.image(), style, 2, 1.0);
    const Image f = gpm_filter(stylized, v.image(), 50.0);
    const auto lo = stylized.channel_min(), hi = stylized.channel_max();
    const auto flo = f.channel_min(), fhi = f.channel_max();
    for (int c = 0; c < v.channels(); ++c) in_range = in_range && flo[c] >= lo[c] && fhi[c] <= hi[c];
    raw.push_back(v.with_image(stylized));
    filtered.push_back(v.with_image(f));
  }
  const double p_raw = photometric_loss(raw[0], {raw.begin() + 1, raw.end()}, s.gt_depths[0]).total;
  const double p_gpm = photometric_loss(filtered[0], {filtered.begin() + 1, filtered.end()}, s.gt_depths[0]).total;
  return {p_gpm < p_raw && in_range,
          cat("photometric WCT=", p_raw, " WCT+GPM=", p_gpm, " output within input range=", in_range)};
}

// 8. SPN loss: perfect inputs, constant offset, sparse sensitivity.
Outcome spn_suite() {
  Rng rng(808);
  const auto rig = test::rectified_rig(rng, 40, 48, 1, 0.1, 0.8);
  const std::vector<View> views{rig.ref, rig.src};
  SparseCorrespondences sparse;
  for (int y = 4; y < 36; y += 6) {
    for (int x = 6; x < 44; x += 6) {
      SparsePoint p;
      p.position = rig.ref.lift({double(x), double(y)}, rig.depth);
      p.observations = {{0, {double(x), double(y)}}, {1, {double(x - rig.disparity), double(y)}}};
      sparse.points.push_back(p);
    }
  }
  const std::vector<Image> perfect{rig.ref.image(), rig.src.image()};
  const SpnLossReport zero = spn_loss(views, perfect, sparse);

  std::vector<Image> shifted = perfect;
  for (auto& img : shifted)
    for (double& v : img.data()) v += 0.1;
  const SpnLossReport offset = spn_loss(views, shifted, sparse);

  // Same number of corrupted pixels, at correspondences versus elsewhere.
  std::vector<Image> at_sparse = perfect, at_random = perfect;
  std::vector<std::pair<int, int>> sparse_px;
  for (const auto& p : sparse.points) {
    const auto& o = p.observations[1];
    sparse_px.emplace_back(static_cast<int>(o.pixel.y), static_cast<int>(o.pixel.x));
  }
  for (const auto& [y, x] : sparse_px) at_sparse[1].at(y, x, 0) += 0.15;
  std::size_t placed = 0;
  while (placed < sparse_px.size()) {
    const int y = static_cast<int>(rng.below(40)), x = static_cast<int>(rng.below(48));
    if (std::find(sparse_px.begin(), sparse_px.end(), std::make_pair(y, x)) != sparse_px.end()) continue;
    if (at_random[1].at(y, x, 0) != perfect[1].at(y, x, 0)) continue;
    at_random[1].at(y, x, 0) += 0.15;
    ++placed;
  }
  const double l_sparse = spn_loss(views, at_sparse, sparse).total;
  const double l_random = spn_loss(views, at_random, sparse).total;

  const bool ok = zero.total < 1e-20 && std::abs(offset.image_term - 0.01) < 1e-12 &&
                  std::abs(offset.sparse_term - 0.01) < 1e-12 && l_sparse > l_random && !zero.sparse_omitted;
  return {ok, cat("perfect=", zero.total, " offset image term=", offset.image_term, " sparse term=", offset.sparse_term,
                  " corrupt@sparse=", l_sparse, " > corrupt@random=", l_random)};
}

// 9. Grid index versus brute force.
Outcome evaluation_oracle() {
  Stopwatch clock;
  Rng rng(909);
  bool equal = true, symmetric = true;
  for (int pair = 0; pair < 20; ++pair) {
    const std::size_t n = pair == 0 ? 10000 : 100 + rng.below(9901);
    const std::size_t m = pair == 1 ? 10000 : 100 + rng.below(9901);
    auto cloud = [&](std::size_t count) {
      PointCloud c;
      const int shape = pair % 3;
      for (std::size_t i = 0; i < count; ++i) {
        Eigen::Vector3d p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        if (shape == 1) p.z() *= 1e-3;             // near-planar
        if (shape == 2) p = p.normalized() * 2.0;  // sphere shell
        c.positions.push_back(p);
      }
      return c;
    };
    const PointCloud a = cloud(n), b = cloud(m);
    const auto fast_ab = nn_distances(a, b), fast_ba = nn_distances(b, a);
    const auto slow_ab = reference::nn_distances(a, b), slow_ba = reference::nn_distances(b, a);
    for (double d : {0.01, 0.05, 0.2}) {
      equal = equal && fraction_below(fast_ab, d) == fraction_below(slow_ab, d) &&
              fraction_below(fast_ba, d) == fraction_below(slow_ba, d);
      if (pair < 4) symmetric = symmetric && recall(a, b, d) == precision(b, a, d);
    }
    equal = equal && fast_ab == slow_ab && fast_ba == slow_ba;
  }
  PointCloud r, g;
  r.positions = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {10, 0, 0}};
  g.positions = {{0, 0, 0}, {1, 0, 0.05}, {2, 0, 0}, {0, 0, 50}};
  const double p = precision(r, g, 0.1);
  PointCloud r2, g2;
  r2.positions = {{0, 0, 0}};
  g2.positions = {{0, 0, 0}, {5, 0, 0}, {0, 5, 0}, {0, 0, 5}};
  const double rc = recall(r2, g2, 0.5);
  const double f = fscore(50.0, 50.0);
  const double t = clock.seconds();
  const bool ok = equal && symmetric && p == 75.0 && rc == 25.0 && f == 50.0 && t < 30.0;
  return {ok, cat("index==brute force on 20 pairs=", equal, " recall(A,B)==precision(B,A)=", symmetric,
                  " P=", p, " R=", rc, " F(50,50)=", f, " time=", t, "s (< 30)")};
}

// Runs synth -> sweep -> fuse -> eval through the CLI; returns eval.csv.
std::string run_pipeline(const TempDir& dir, const std::string& tag, int threads, double threshold) {
  const std::string root = dir.file(tag);
  const std::string th = std::to_string(threads);
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--threads", th});
    if (cli::run(args) != 0) throw Error("pipeline step failed: " + args[2]);
  };
  char d[32];
  std::snprintf(d, sizeof d, "%.17g", threshold);
  run({"synth", "--surface", "plane", "--views", "5", "--seed", "7", "-o", root + "/scene"});
  run({"sweep", "--scene", root + "/scene", "--temperature", "0.1", "-o", root + "/sweep"});
  run({"fuse", "--scene", root + "/scene", "--depths", root + "/sweep/depths", "-o", root + "/fuse"});
  run({"eval", "--recon", root + "/fuse/fused.ply", "--gt", root + "/scene/gt.ply", "-d", d, "-o", root + "/eval"});
  return test::slurp(root + "/eval/eval.csv");
}

double pipeline_threshold() {
  SynthSpec spec;
  spec.seed = 7;
  const SyntheticScene s = generate(spec);
  return 2.0 * (s.depth_max - s.depth_min) / 63.0;
}

// 10. End-to-end F-score.
Outcome end_to_end() {
  Stopwatch clock;
  TempDir dir("accept_e2e");
  const double d = pipeline_threshold();
  const std::string csv = run_pipeline(dir, "run", 0, d);
  double f = -1.0;
  std::istringstream is(csv);
  for (std::string line; std::getline(is, line);) {
    if (line.rfind("fscore,", 0) == 0) f = std::stod(line.substr(line.rfind(',') + 1));
  }
  const double t = clock.seconds();
  return {f > 90.0 && t < 120.0, cat("F(d=", d, ")=", f, " (> 90) time=", t, "s (< 120)")};
}

// 11. MMD suite.
Outcome mmd_suite() {
  Rng rng(1111);
  auto cluster = [&](const Eigen::VectorXd& center, int n, double spread, const std::string& id) {
    EmbeddingSet s;
    s.scene_id = id;
    s.vectors.resize(n, center.size());
    for (int i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < center.size(); ++j) s.vectors(i, j) = center[j] + spread * rng.normal();
    return s;
  };
  const int d = 8;
  Eigen::VectorXd o = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  e[0] = 1.0;
  const EmbeddingSet a = cluster(o, 20, 0.1, "a"), b = cluster(e, 20, 0.1, "b"), c = cluster(3.0 * e, 20, 0.1, "c");
  double self = 0.0;
  for (const auto* s : {&a, &b, &c}) self = std::max(self, mmd_squared(*s, *s));
  const Eigen::MatrixXd m = confusion_matrix({a, b, c});
  const bool symmetric = (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 && m.diagonal().cwiseAbs().maxCoeff() <= 1e-9;
  // Pairwise center distances: a-b 1, b-c 2, a-c 3.
  const bool ordered = m(0, 1) < m(1, 2) && m(1, 2) < m(0, 2);
  return {self < 1e-12 && symmetric && ordered,
          cat("max self=", self, " symmetric+zero diag=", symmetric, " M_ab=", m(0, 1), " < M_bc=", m(1, 2),
              " < M_ac=", m(0, 2))};
}

// 12. File format round trips and malformed input.
Outcome io_round_trips() {
  Rng rng(1212);
  TempDir dir("accept_io");
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  for (int trial = 0; trial < 20; ++trial) {
    CameraFile cam;
    cam.extrinsic = Extrinsics(test::random_rotation(rng), {rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9)})
                        .matrix();
    cam.intrinsics = Intrinsics(rng.uniform(10, 3000), rng.uniform(10, 3000), rng.uniform(0, 1000), rng.uniform(0, 800));
    cam.depth_min = rng.uniform(0.1, 500);
    cam.depth_interval = rng.uniform(0.01, 5);
    if (trial % 2) {
      cam.depth_num = 192;
      cam.depth_max = cam.depth_min + 191 * cam.depth_interval;
    }
    write_camera(dir.file("cam.txt"), cam);
    const CameraFile back = read_camera(dir.file("cam.txt"));
    check((back.extrinsic - cam.extrinsic).cwiseAbs().maxCoeff() <= 1e-6 &&
              (back.intrinsics.matrix() - cam.intrinsics.matrix()).cwiseAbs().maxCoeff() <= 1e-6 &&
              std::abs(back.depth_min - cam.depth_min) <= 1e-6 && back.depth_num == cam.depth_num,
          "camera");

    std::vector<PairEntry> pairs;
    for (int r = 0; r < 1 + static_cast<int>(rng.below(6)); ++r) {
      PairEntry p{r, {}};
      for (int s = 0; s < static_cast<int>(rng.below(5)); ++s) p.sources.emplace_back(r + s + 1, rng.uniform(0, 1e4));
      pairs.push_back(p);
    }
    write_pair(dir.file("pair.txt"), pairs);
    const auto pairs_back = read_pair(dir.file("pair.txt"));
    bool same = pairs_back.size() == pairs.size();
    for (std::size_t i = 0; same && i < pairs.size(); ++i)
      same = pairs_back[i].ref_id == pairs[i].ref_id && pairs_back[i].sources == pairs[i].sources;
    check(same, "pair");

    DepthMap depth(1 + static_cast<int>(rng.below(40)), 1 + static_cast<int>(rng.below(40)));
    for (double& v : depth.values()) v = static_cast<float>(rng.uniform(0, 100));
    write_pfm(dir.file("d.pfm"), depth);
    check(read_pfm(dir.file("d.pfm")).values() == depth.values(), "pfm");

    PointCloud cloud;
    for (int i = 0; i < 50; ++i) {
      cloud.positions.emplace_back(static_cast<float>(rng.uniform(-9, 9)), static_cast<float>(rng.uniform(-9, 9)),
                                   static_cast<float>(rng.uniform(-9, 9)));
      cloud.colors.emplace_back(rng.below(256) / 255.0, rng.below(256) / 255.0, rng.below(256) / 255.0);
    }
    write_ply(dir.file("c.ply"), cloud);
    const PointCloud cb = read_ply(dir.file("c.ply"));
    check(cb.positions == cloud.positions && cb.colors.size() == cloud.colors.size(), "ply");
    for (std::size_t i = 0; i < cb.colors.size(); ++i) check((cb.colors[i] - cloud.colors[i]).norm() < 1e-12, "ply color");

    SparseCorrespondences sp;
    for (int i = 0; i < 10; ++i) {
      SparsePoint p;
      p.position = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(1, 9)};
      for (int v = 0; v < 3; ++v) p.observations.push_back({v, {rng.uniform(0, 640), rng.uniform(0, 480)}});
      sp.points.push_back(p);
    }
    write_sparse(dir.file("s.txt"), sp);
    const auto sb = read_sparse(dir.file("s.txt"));
    bool sparse_same = sb.points.size() == sp.points.size();
    for (std::size_t i = 0; sparse_same && i < sp.points.size(); ++i) {
      sparse_same = sb.points[i].position == sp.points[i].position;
      for (std::size_t o = 0; o < 3; ++o) {
        sparse_same = sparse_same && sb.points[i].observations[o].view_id == sp.points[i].observations[o].view_id &&
                      sb.points[i].observations[o].pixel.x == sp.points[i].observations[o].pixel.x &&
                      sb.points[i].observations[o].pixel.y == sp.points[i].observations[o].pixel.y;
      }
    }
    check(sparse_same, "sparse");

    std::vector<SceneEntry> scenes;
    for (int i = 0; i < 2 + static_cast<int>(rng.below(10)); ++i) scenes.push_back({"scan" + std::to_string(i), 1 + static_cast<int>(rng.below(30))});
    const Split split = make_split(scenes, {trial % 2 ? SplitMode::kByScenes : SplitMode::kByViews, 0.1, rng.below(1000), false});
    write_split_list(dir.file("l.txt"), split.labeled);
    write_split_list(dir.file("u.txt"), split.unlabeled);
    check(read_split_list(dir.file("l.txt")) == split.labeled && read_split_list(dir.file("u.txt")) == split.unlabeled,
          "split");
  }

  // Malformed inputs must name a line or byte position.
  auto positioned = [&](const std::string& name, const std::string& content, auto&& reader) {
    test::spit(dir.file(name), content);
    try {
      reader(dir.file(name));
    } catch (const ParseError& e) {
      return e.line() > 0 || e.offset() > 0 || std::string(e.what()).find("byte 0") != std::string::npos;
    } catch (...) {
      return false;
    }
    return false;
  };
  check(positioned("bad_cam.txt", "extrinsic\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\nintrinsic\n1 0 0\n0 1 0\n0 0 1\n\n1 2\n",
                   [](const std::string& p) { read_camera(p); }),
        "camera missing blank line");
  check(positioned("bad_pair.txt", "1\n0\n3 1 0.5 2 0.25\n", [](const std::string& p) { read_pair(p); }), "pair short");
  check(positioned("bad.pfm", "Pf\n2 2\n-1\n\x01\x02", [](const std::string& p) { read_pfm(p); }), "pfm truncated");
  check(positioned("color.pfm", "PF\n1 1\n-1\n", [](const std::string& p) { read_pfm(p); }), "pfm color");
  check(positioned("bad.ply", "ply\nformat ascii 1.0\nend_header\n", [](const std::string& p) { read_ply(p); }), "ply ascii");
  check(positioned("bad_sparse.txt", "1 2 3 0 4\n", [](const std::string& p) { read_sparse(p); }), "sparse arity");
  check(positioned("bad_split.txt", "scan1 x\n", [](const std::string& p) { read_split_list(p); }), "split view");

  std::string detail = "camera/pair/PFM/PLY/sparse/split x20 + 7 malformed inputs";
  if (!failures.empty()) {
    detail += "; failed:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

// 13. Identical seeds give identical metric files, across thread counts.
Outcome determinism() {
  TempDir dir("accept_det");
  const double d = pipeline_threshold();
  const std::string a = run_pipeline(dir, "a", 1, d);
  const std::string b = run_pipeline(dir, "b", 3, d);
  return {!a.empty() && a == b, cat("eval.csv bytes=", a.size(), " identical (1 vs 3 threads)=", a == b)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"geometry round trip", geometry_round_trip},
      {"photometric oracle", photometric_oracle},
      {"plane-sweep accuracy", plane_sweep_accuracy},
      {"soft-argmin exactness", soft_argmin_exactness},
      {"KL suite", kl_suite},
      {"WCT statistics", wct_statistics},
      {"GPM geometry preservation", gpm_geometry_preservation},
      {"SPN loss suite", spn_suite},
      {"evaluation oracle", evaluation_oracle},
      {"end-to-end reconstruction", end_to_end},
      {"MMD suite", mmd_suite},
      {"I/O round trips", io_round_trips},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %-27s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
