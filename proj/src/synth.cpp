#include "mvskit/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Geometry>

#include "mvskit/error.hpp"

namespace fs = std::filesystem;

namespace mvskit {

namespace {

constexpr int kMaxViews = 32;
constexpr double kSphereRadius = 1.0;
constexpr double kHitEpsilon = 1e-9;

struct Box {
  Eigen::Vector3d lo, hi;
};

// Two boxes standing on the z = 0 ground plane; the taller one hides parts of
// the plane and of its neighbor from the oblique views.
const std::array<Box, 2> kBoxes = {Box{{-1.1, -0.5, 0.0}, {-0.3, 0.5, 0.8}},
                                   Box{{0.3, -0.7, 0.0}, {1.1, 0.3, 1.4}}};

std::optional<double> hit_plane(const Eigen::Vector3d& o, const Eigen::Vector3d& v) {
  if (v.z() == 0.0) return std::nullopt;
  const double t = -o.z() / v.z();
  return t > kHitEpsilon ? std::optional<double>(t) : std::nullopt;
}

std::optional<double> hit_sphere(const Eigen::Vector3d& o, const Eigen::Vector3d& v) {
  const double a = v.squaredNorm(), b = 2.0 * o.dot(v), c = o.squaredNorm() - kSphereRadius * kSphereRadius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -0.5 * (b + std::copysign(sq, b));
  double t0 = q / a, t1 = q != 0.0 ? c / q : t0;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > kHitEpsilon) return t0;
  if (t1 > kHitEpsilon) return t1;
  return std::nullopt;
}

std::optional<double> hit_box(const Box& box, const Eigen::Vector3d& o, const Eigen::Vector3d& v) {
  double enter = -std::numeric_limits<double>::infinity(), exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (v[a] == 0.0) {
      if (o[a] < box.lo[a] || o[a] > box.hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.lo[a] - o[a]) / v[a], t1 = (box.hi[a] - o[a]) / v[a];
    if (t0 > t1) std::swap(t0, t1);
    enter = std::max(enter, t0);
    exit = std::min(exit, t1);
  }
  if (enter > exit || !(enter > kHitEpsilon)) return std::nullopt;
  return enter;
}

bool inside_box(const Box& box, const Eigen::Vector3d& p) {
  return (p.array() >= box.lo.array()).all() && (p.array() <= box.hi.array()).all();
}

double box_distance(const Box& box, const Eigen::Vector3d& p) {
  const Eigen::Vector3d c = 0.5 * (box.lo + box.hi), e = 0.5 * (box.hi - box.lo);
  const Eigen::Vector3d q = (p - c).cwiseAbs() - e;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

// Nearest intersection of o + t v (t > 0) with the scene; t is in units of v.
std::optional<double> cast(SurfaceKind kind, const Eigen::Vector3d& o, const Eigen::Vector3d& v) {
  switch (kind) {
    case SurfaceKind::kPlane:
      return hit_plane(o, v);
    case SurfaceKind::kSphere:
      return hit_sphere(o, v);
    case SurfaceKind::kTwoBox: {
      std::optional<double> best = hit_plane(o, v);
      for (const Box& b : kBoxes) {
        const auto t = hit_box(b, o, v);
        if (t && (!best || *t < *best)) best = t;
      }
      return best;
    }
  }
  return std::nullopt;
}

void check_camera_outside(SurfaceKind kind, const Eigen::Vector3d& c, int view) {
  bool inside = false;
  switch (kind) {
    case SurfaceKind::kPlane:
      inside = !(c.z() > 0.0);
      break;
    case SurfaceKind::kSphere:
      inside = c.norm() <= kSphereRadius;
      break;
    case SurfaceKind::kTwoBox:
      inside = !(c.z() > 0.0) || inside_box(kBoxes[0], c) || inside_box(kBoxes[1], c);
      break;
  }
  if (inside) throw Error("synth: camera " + std::to_string(view) + " is inside or behind the surface");
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, int channel, std::int64_t i, std::int64_t j, std::int64_t k) {
  std::uint64_t h = splitmix(seed ^ (static_cast<std::uint64_t>(channel) << 56));
  h = splitmix(h ^ static_cast<std::uint64_t>(i));
  h = splitmix(h ^ static_cast<std::uint64_t>(j));
  h = splitmix(h ^ static_cast<std::uint64_t>(k));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double f) { return f * f * (3.0 - 2.0 * f); }

// Trilinear value noise with smoothstep weights, in [0, 1].
double value_noise(const Eigen::Vector3d& u, std::uint64_t seed, int channel) {
  const Eigen::Vector3d fl = u.array().floor();
  const auto i = static_cast<std::int64_t>(fl.x()), j = static_cast<std::int64_t>(fl.y()),
             k = static_cast<std::int64_t>(fl.z());
  const double fx = smooth(u.x() - fl.x()), fy = smooth(u.y() - fl.y()), fz = smooth(u.z() - fl.z());
  double v = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) * (dz ? fz : 1.0 - fz);
    v += w * lattice(seed, channel, i + dx, j + dy, k + dz);
  }
  return v;
}

// Irrational lattice shift so cell walls never coincide with scene planes.
const Eigen::Vector3d kTextureOffset(0.3719, 0.6180, 0.4142);

Extrinsics look_at(const Eigen::Vector3d& center) {
  const Eigen::Vector3d z = (-center).normalized();
  const Eigen::Vector3d y(0.0, 1.0, 0.0);
  const Eigen::Vector3d x = y.cross(z).normalized();
  Eigen::Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = z.cross(x).transpose();
  r.row(2) = z.transpose();
  return Extrinsics(r, -r * center);
}

// 0, +a, -a, +2a, -2a, ...
double arc_angle(int i, double step) {
  if (i == 0) return 0.0;
  const int k = (i + 1) / 2;
  return (i % 2 ? 1.0 : -1.0) * k * step;
}

}  // namespace

SurfaceKind parse_surface(const std::string& s) {
  if (s == "plane") return SurfaceKind::kPlane;
  if (s == "sphere") return SurfaceKind::kSphere;
  if (s == "two-box" || s == "twobox" || s == "two_box") return SurfaceKind::kTwoBox;
  throw Error("unknown surface '" + s + "' (expected plane, sphere or two-box)");
}

TextureKind parse_texture(const std::string& s) {
  if (s == "checker") return TextureKind::kChecker;
  if (s == "noise") return TextureKind::kNoise;
  if (s == "gradient") return TextureKind::kGradient;
  throw Error("unknown texture '" + s + "' (expected checker, noise or gradient)");
}

bool SyntheticScene::visible(int view, int y, int x, int other) const {
  return (visibility.at(view).at(static_cast<std::size_t>(y) * spec.width + x) >> other) & 1u;
}

bool SyntheticScene::occluded(int view, int y, int x, int other) const {
  return (occlusion_.at(view).at(static_cast<std::size_t>(y) * spec.width + x) >> other) & 1u;
}

double SyntheticScene::depth_at(int view, const Pixel& p) const {
  const View& v = views.at(view);
  const Eigen::Vector3d dir = v.extrinsics().rotation().transpose() * v.intrinsics().unproject(p, 1.0);
  const auto t = cast(spec.surface, v.extrinsics().center(), dir);
  return t ? *t : 0.0;
}

Eigen::Vector3d SyntheticScene::shade(const Eigen::Vector3d& world) const {
  const double s = spec.texture_scale;
  const Eigen::Vector3d u = world / s + kTextureOffset;
  Eigen::Vector3d out;
  for (int c = 0; c < 3; ++c) {
    const int ch = spec.channels == 1 ? 0 : c;
    switch (spec.texture) {
      case TextureKind::kNoise: {
        const double v = value_noise(u, spec.seed, ch) + 0.5 * value_noise(2.0 * u, spec.seed, ch + 8);
        out[c] = v / 1.5;
        break;
      }
      case TextureKind::kChecker: {
        const auto parity = (static_cast<std::int64_t>(std::floor(u.x())) + static_cast<std::int64_t>(std::floor(u.y())) +
                             static_cast<std::int64_t>(std::floor(u.z()))) & 1;
        out[c] = parity ? 0.8 - 0.1 * ch : 0.2 + 0.1 * ch;
        break;
      }
      case TextureKind::kGradient: {
        const Eigen::Vector3d dir = Eigen::Vector3d(1.0, 0.5 * ch, 0.25).normalized();
        out[c] = std::clamp(0.5 + 0.05 * dir.dot(world / s), 0.0, 1.0);
        break;
      }
    }
  }
  return out;
}

double SyntheticScene::surface_residual(const Eigen::Vector3d& world) const {
  switch (spec.surface) {
    case SurfaceKind::kPlane:
      return world.z();
    case SurfaceKind::kSphere:
      return world.norm() - kSphereRadius;
    case SurfaceKind::kTwoBox:
      return std::min({std::abs(world.z()), std::abs(box_distance(kBoxes[0], world)),
                       std::abs(box_distance(kBoxes[1], world))});
  }
  return 0.0;
}

SyntheticScene generate(const SynthSpec& spec_in) {
  SynthSpec spec = spec_in;
  if (spec.views < 2 || spec.views > kMaxViews) throw Error("synth: views must be in [2, 32]");
  if (spec.width < 2 || spec.height < 2) throw Error("synth: resolution must be at least 2x2");
  if (spec.channels != 1 && spec.channels != 3) throw Error("synth: channels must be 1 or 3");
  if (!(spec.fov_degrees > 0.0 && spec.fov_degrees < 180.0)) throw Error("synth: fov must be in (0, 180)");
  if (!(spec.radius > 0.0)) throw Error("synth: radius must be positive");
  if (spec.sparse_stride < 1) throw Error("synth: sparse stride must be >= 1");

  const double f = 0.5 * spec.width / std::tan(0.5 * spec.fov_degrees * std::numbers::pi / 180.0);
  const Intrinsics k(f, f, 0.5 * (spec.width - 1), 0.5 * (spec.height - 1));
  if (!(spec.texture_scale > 0.0)) spec.texture_scale = 8.0 * spec.radius / f;

  SyntheticScene scene;
  scene.spec = spec;
  std::vector<Extrinsics> cams;
  for (int i = 0; i < spec.views; ++i) {
    const double a = arc_angle(i, spec.arc_step_degrees) * std::numbers::pi / 180.0;
    const Eigen::Vector3d c(spec.radius * std::sin(a), 0.0, spec.radius * std::cos(a));
    check_camera_outside(spec.surface, c, i);
    cams.push_back(look_at(c));
  }

  const int h = spec.height, w = spec.width;
  const std::size_t np = static_cast<std::size_t>(h) * w;
  for (int i = 0; i < spec.views; ++i) {
    // Placeholder image so depth_at can use the camera while rendering.
    scene.views.emplace_back(Image(h, w, spec.channels), k, cams[i], i);
  }
  for (int i = 0; i < spec.views; ++i) {
    Image img(h, w, spec.channels);
    DepthMap depth(h, w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double d = scene.depth_at(i, {double(x), double(y)});
        if (!(d > 0.0)) continue;
        depth.at(y, x) = d;
        const Eigen::Vector3d col = scene.shade(scene.views[i].lift({double(x), double(y)}, d));
        for (int c = 0; c < spec.channels; ++c) img.at(y, x, c) = col[c];
      }
    }
    scene.views[i] = scene.views[i].with_image(std::move(img));
    scene.gt_depths.push_back(std::move(depth));
  }

  scene.visibility.assign(spec.views, std::vector<std::uint32_t>(np, 0));
  scene.occlusion_.assign(spec.views, std::vector<std::uint32_t>(np, 0));
  for (int i = 0; i < spec.views; ++i) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double d = scene.gt_depths[i].at(y, x);
        if (!(d > 0.0)) continue;
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        scene.visibility[i][p] |= 1u << i;
        const Eigen::Vector3d X = scene.views[i].lift({double(x), double(y)}, d);
        for (int j = 0; j < spec.views; ++j) {
          if (j == i) continue;
          const auto proj = project_point(X, scene.views[j]);
          if (!proj || !inside_interpolatable(proj->pixel.x, proj->pixel.y, h, w)) continue;
          const Eigen::Vector3d c = scene.views[j].extrinsics().center();
          const auto t = cast(spec.surface, c, (X - c) / proj->depth);
          if (t && *t < proj->depth * (1.0 - 1e-9)) {
            scene.occlusion_[i][p] |= 1u << j;
          } else {
            scene.visibility[i][p] |= 1u << j;
          }
        }
      }
    }
  }

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < spec.views; ++i) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double d = scene.gt_depths[i].at(y, x);
        if (!(d > 0.0)) continue;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        if (scene.visibility[i][p] & ~(1u << i)) {
          const Eigen::Vector3d X = scene.views[i].lift({double(x), double(y)}, d);
          scene.gt_cloud.positions.push_back(X);
          scene.gt_cloud.colors.push_back(scene.shade(X));
        }
      }
    }
  }
  if (!(hi > 0.0)) throw Error("synth: no view sees the surface");
  scene.depth_min = 0.9 * lo;
  scene.depth_max = 1.1 * hi;

  const int s = spec.sparse_stride;
  for (int y = s / 2; y < h; y += s) {
    for (int x = s / 2; x < w; x += s) {
      const double d = scene.gt_depths[0].at(y, x);
      if (!(d > 0.0)) continue;
      SparsePoint pt;
      pt.position = scene.views[0].lift({double(x), double(y)}, d);
      pt.observations.push_back({0, {double(x), double(y)}});
      for (int j = 1; j < spec.views; ++j) {
        if (!scene.visible(0, y, x, j)) continue;
        pt.observations.push_back({j, project_point(pt.position, scene.views[j])->pixel});
      }
      if (pt.observations.size() >= 2) scene.sparse.points.push_back(std::move(pt));
    }
  }
  return scene;
}

void write_scene(const SyntheticScene& scene, const std::string& root, int depth_count) {
  if (depth_count < 2) throw Error("write_scene: depth_count must be >= 2");
  const fs::path dir(root);
  for (const char* sub : {"images", "cams", "depths"}) fs::create_directories(dir / sub);
  const int n = static_cast<int>(scene.views.size());
  std::vector<PairEntry> pairs;
  for (int i = 0; i < n; ++i) {
    const View& v = scene.views[i];
    const std::string stem = view_stem(v.id());
    write_image((dir / "images" / (stem + ".png")).string(), v.image());
    CameraFile cam;
    cam.extrinsic = v.extrinsics().matrix();
    cam.intrinsics = v.intrinsics();
    cam.depth_min = scene.depth_min;
    cam.depth_interval = (scene.depth_max - scene.depth_min) / (depth_count - 1);
    cam.depth_num = depth_count;
    cam.depth_max = scene.depth_max;
    write_camera((dir / "cams" / (stem + "_cam.txt")).string(), cam);
    write_pfm((dir / "depths" / (stem + ".pfm")).string(), scene.gt_depths[i]);

    // Sources ranked by angular distance along the arc.
    const double ai = arc_angle(i, scene.spec.arc_step_degrees);
    PairEntry e;
    e.ref_id = v.id();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double gap = std::abs(arc_angle(j, scene.spec.arc_step_degrees) - ai);
      e.sources.emplace_back(scene.views[j].id(), 100.0 / (1.0 + gap));
    }
    std::stable_sort(e.sources.begin(), e.sources.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    pairs.push_back(std::move(e));
  }
  write_pair((dir / "pair.txt").string(), pairs);
  write_ply((dir / "gt.ply").string(), scene.gt_cloud);
  write_sparse((dir / "sparse.txt").string(), scene.sparse);
}

}  // namespace mvskit
