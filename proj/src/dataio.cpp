#include "mvskit/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "binary_io.hpp"
#include "mvskit/error.hpp"

namespace fs = std::filesystem;

namespace mvskit {

namespace {

constexpr double kRotationTolerance = 1e-4;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

double parse_double(const std::string& tok, const std::string& path, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (...) {
    used = 0;
  }
  if (used != tok.size() || !std::isfinite(v)) throw ParseError(path, line, "bad number '" + tok + "'");
  return v;
}

long parse_int(const std::string& tok, const std::string& path, std::size_t line) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (...) {
    used = 0;
  }
  if (used != tok.size()) throw ParseError(path, line, "bad integer '" + tok + "'");
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(is, l);) lines.push_back(l);
  return lines;
}

// Nearest rotation in the Frobenius sense.
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

double rotation_error(const Eigen::Matrix3d& r) {
  return std::max((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(),
                  std::abs(r.determinant() - 1.0));
}

}  // namespace

Extrinsics CameraFile::extrinsics(bool inverted) const {
  Eigen::Matrix3d r = extrinsic.topLeftCorner<3, 3>();
  const Eigen::Vector3d t = extrinsic.topRightCorner<3, 1>();
  // Text files carry a handful of digits; snap the rotation back onto SO(3).
  if (rotation_error(r) > 1e-9) r = orthonormalize(r);
  if (!inverted) return Extrinsics(r, t);
  return Extrinsics(r.transpose(), -r.transpose() * t);
}

void write_camera(const std::string& path, const CameraFile& cam) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  os << "extrinsic\n";
  for (int r = 0; r < 4; ++r) {
    os << num(cam.extrinsic(r, 0)) << ' ' << num(cam.extrinsic(r, 1)) << ' ' << num(cam.extrinsic(r, 2)) << ' '
       << num(cam.extrinsic(r, 3)) << '\n';
  }
  const Eigen::Matrix3d k = cam.intrinsics.matrix();
  os << "\nintrinsic\n";
  for (int r = 0; r < 3; ++r) os << num(k(r, 0)) << ' ' << num(k(r, 1)) << ' ' << num(k(r, 2)) << '\n';
  os << '\n' << num(cam.depth_min) << ' ' << num(cam.depth_interval);
  if (cam.depth_num) {
    os << ' ' << num(*cam.depth_num);
    if (cam.depth_max) os << ' ' << num(*cam.depth_max);
  }
  os << '\n';
  if (!os) throw Error("write failed: " + path);
}

CameraFile read_camera(const std::string& path) {
  const auto lines = read_lines(path);
  auto line = [&](std::size_t i) -> std::string {
    if (i >= lines.size()) throw ParseError(path, i + 1, "unexpected end of file");
    return lines[i];
  };
  auto row = [&](std::size_t i, std::size_t n) {
    const auto tok = tokens(line(i));
    if (tok.size() != n) {
      throw ParseError(path, i + 1, "expected " + std::to_string(n) + " values, found " + std::to_string(tok.size()));
    }
    std::vector<double> v;
    for (const auto& t : tok) v.push_back(parse_double(t, path, i + 1));
    return v;
  };
  auto expect_blank = [&](std::size_t i) {
    if (!trim(line(i)).empty()) throw ParseError(path, i + 1, "expected a blank separator line");
  };

  CameraFile cam;
  if (trim(line(0)) != "extrinsic") throw ParseError(path, 1, "expected 'extrinsic'");
  for (int r = 0; r < 4; ++r) {
    const auto v = row(1 + r, 4);
    for (int c = 0; c < 4; ++c) cam.extrinsic(r, c) = v[c];
  }
  if ((cam.extrinsic.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw ParseError(path, 5, "last extrinsic row must be 0 0 0 1");
  }
  if (rotation_error(cam.extrinsic.topLeftCorner<3, 3>()) > kRotationTolerance) {
    throw ParseError(path, 2, "extrinsic rotation is not orthonormal");
  }
  expect_blank(5);
  if (trim(line(6)) != "intrinsic") throw ParseError(path, 7, "expected 'intrinsic'");
  Eigen::Matrix3d k;
  for (int r = 0; r < 3; ++r) {
    const auto v = row(7 + r, 3);
    for (int c = 0; c < 3; ++c) k(r, c) = v[c];
  }
  if (k(0, 1) != 0.0 || k(1, 0) != 0.0) throw ParseError(path, 8, "skewed intrinsics are not supported");
  if (k(2, 0) != 0.0 || k(2, 1) != 0.0 || k(2, 2) != 1.0) throw ParseError(path, 10, "last intrinsic row must be 0 0 1");
  try {
    cam.intrinsics = Intrinsics(k(0, 0), k(1, 1), k(0, 2), k(1, 2));
  } catch (const Error& e) {
    throw ParseError(path, 8, e.what());
  }
  expect_blank(10);
  const auto tok = tokens(line(11));
  if (tok.size() != 2 && tok.size() != 3 && tok.size() != 4) {
    throw ParseError(path, 12, "expected 'depth_min depth_interval [depth_num [depth_max]]'");
  }
  cam.depth_min = parse_double(tok[0], path, 12);
  cam.depth_interval = parse_double(tok[1], path, 12);
  if (tok.size() >= 3) cam.depth_num = parse_double(tok[2], path, 12);
  if (tok.size() == 4) cam.depth_max = parse_double(tok[3], path, 12);
  for (std::size_t i = 12; i < lines.size(); ++i) {
    if (!trim(lines[i]).empty()) throw ParseError(path, i + 1, "unexpected trailing content");
  }
  return cam;
}

void write_pair(const std::string& path, const std::vector<PairEntry>& pairs) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  os << pairs.size() << '\n';
  for (const auto& p : pairs) {
    os << p.ref_id << '\n' << p.sources.size();
    for (const auto& [id, score] : p.sources) os << ' ' << id << ' ' << num(score);
    os << '\n';
  }
  if (!os) throw Error("write failed: " + path);
}

std::vector<PairEntry> read_pair(const std::string& path) {
  const auto lines = read_lines(path);
  std::size_t i = 0;
  auto next = [&]() -> std::vector<std::string> {
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    if (i >= lines.size()) throw ParseError(path, i + 1, "truncated pair file");
    return tokens(lines[i++]);
  };
  auto head = next();
  if (head.size() != 1) throw ParseError(path, i, "expected the number of reference views");
  const long count = parse_int(head[0], path, i);
  if (count < 0) throw ParseError(path, i, "negative view count");
  std::vector<PairEntry> out;
  for (long r = 0; r < count; ++r) {
    const auto ref = next();
    if (ref.size() != 1) throw ParseError(path, i, "expected a reference view id");
    PairEntry e;
    e.ref_id = static_cast<int>(parse_int(ref[0], path, i));
    const auto src = next();
    if (src.empty()) throw ParseError(path, i, "expected a source count");
    const long n = parse_int(src[0], path, i);
    if (n < 0) throw ParseError(path, i, "negative source count");
    if (src.size() != static_cast<std::size_t>(1 + 2 * n)) {
      throw ParseError(path, i, "declared " + std::to_string(n) + " sources but the line holds " +
                                    std::to_string(src.size() - 1) + " tokens after the count");
    }
    for (long s = 0; s < n; ++s) {
      const int id = static_cast<int>(parse_int(src[1 + 2 * s], path, i));
      if (id == e.ref_id) throw ParseError(path, i, "view " + std::to_string(id) + " lists itself as a source");
      e.sources.emplace_back(id, parse_double(src[2 + 2 * s], path, i));
    }
    out.push_back(std::move(e));
  }
  for (; i < lines.size(); ++i) {
    if (!trim(lines[i]).empty()) throw ParseError(path, i + 1, "unexpected trailing content");
  }
  return out;
}

void write_pfm(const std::string& path, const DepthMap& depth) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os << "Pf\n" << depth.width() << ' ' << depth.height() << "\n-1\n";
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x) detail::put_f32_le(os, static_cast<float>(depth.at(y, x)));
  }
  if (!os) throw Error("write failed: " + path);
}

DepthMap read_pfm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto header_line = [&](std::size_t line_no) {
    std::string s;
    while (pos < bytes.size() && bytes[pos] != '\n') s.push_back(static_cast<char>(bytes[pos++]));
    if (pos >= bytes.size()) throw ParseError(path, line_no, "truncated header");
    ++pos;
    return trim(s);
  };
  const std::string magic = header_line(1);
  if (magic == "PF") throw ParseError(path, 1, "unsupported: color PFM");
  if (magic != "Pf") throw ParseError(path, 1, "bad magic, expected Pf");
  const auto dims = tokens(header_line(2));
  if (dims.size() != 2) throw ParseError(path, 2, "expected 'width height'");
  const long w = parse_int(dims[0], path, 2), h = parse_int(dims[1], path, 2);
  if (w < 1 || h < 1) throw ParseError(path, 2, "dimensions must be positive");
  const auto scale_tok = tokens(header_line(3));
  if (scale_tok.size() != 1) throw ParseError(path, 3, "expected the scale");
  const double scale = parse_double(scale_tok[0], path, 3);
  if (scale == 0.0) throw ParseError(path, 3, "scale must be non-zero");
  const bool little = scale < 0.0;
  const std::uint64_t expected = pos + 4ull * static_cast<std::uint64_t>(w) * h;
  if (bytes.size() != expected) {
    throw ParseError(path, 0, std::min<std::uint64_t>(bytes.size(), expected),
                     "payload size does not match " + std::to_string(w) + "x" + std::to_string(h));
  }
  DepthMap depth(static_cast<int>(h), static_cast<int>(w));
  for (long y = h - 1; y >= 0; --y) {
    for (long x = 0; x < w; ++x, pos += 4) {
      const float v = little ? detail::f32_from_le(&bytes[pos]) : detail::f32_from_be(&bytes[pos]);
      if (!std::isfinite(v) || v < 0.0f) throw ParseError(path, 0, pos, "depth must be finite and >= 0");
      depth.at(static_cast<int>(y), static_cast<int>(x)) = v;
    }
  }
  return depth;
}

std::vector<int> SceneManifest::view_ids() const {
  std::vector<int> ids;
  for (const auto& [id, paths] : views) ids.push_back(id);
  return ids;
}

std::vector<int> SceneManifest::sources_of(int ref_id, std::size_t max_sources) const {
  std::vector<int> out;
  const auto entry = std::find_if(pairs.begin(), pairs.end(), [&](const PairEntry& e) { return e.ref_id == ref_id; });
  if (entry != pairs.end()) {
    for (const auto& [id, score] : entry->sources) out.push_back(id);
  } else {
    for (const auto& [id, paths] : views) {
      if (id != ref_id) out.push_back(id);
    }
  }
  if (max_sources > 0 && out.size() > max_sources) out.resize(max_sources);
  return out;
}

void SceneManifest::validate() const {
  for (const auto& e : pairs) {
    if (!views.count(e.ref_id)) throw Error("manifest: pair entry references unknown view " + std::to_string(e.ref_id));
    for (const auto& [id, score] : e.sources) {
      if (id == e.ref_id) throw Error("manifest: view " + std::to_string(id) + " lists itself as a source");
      if (!views.count(id)) throw Error("manifest: pair entry references unknown view " + std::to_string(id));
    }
  }
}

std::string view_stem(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08d", id);
  return buf;
}

SceneManifest load_manifest(const std::string& root) {
  const fs::path dir(root);
  if (!fs::is_directory(dir / "images")) throw Error("scene: missing images/ directory under " + root);
  SceneManifest m;
  m.root = root;
  m.scene_id = fs::absolute(dir).lexically_normal().filename().string();
  if (m.scene_id.empty()) m.scene_id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  for (const auto& entry : fs::directory_iterator(dir / "images")) {
    const fs::path p = entry.path();
    const std::string ext = p.extension().string();
    if (ext != ".png" && ext != ".ppm" && ext != ".pgm") continue;
    const std::string stem = p.stem().string();
    if (stem.size() != 8 || !std::all_of(stem.begin(), stem.end(), ::isdigit)) continue;
    const int id = std::stoi(stem);
    ViewPaths vp;
    vp.image = p.string();
    vp.camera = (dir / "cams" / (stem + "_cam.txt")).string();
    if (!fs::exists(vp.camera)) throw Error("scene: missing camera file " + vp.camera);
    const fs::path depth = dir / "depths" / (stem + ".pfm");
    if (fs::exists(depth)) vp.depth = depth.string();
    if (m.views.count(id)) throw Error("scene: view " + std::to_string(id) + " has more than one image file");
    m.views[id] = vp;
  }
  if (m.views.empty()) throw Error("scene: no images found under " + (dir / "images").string());
  if (fs::exists(dir / "pair.txt")) m.pairs = read_pair((dir / "pair.txt").string());
  m.validate();
  return m;
}

namespace {
const ViewPaths& paths_of(const SceneManifest& m, int id) {
  const auto it = m.views.find(id);
  if (it == m.views.end()) throw Error("scene: unknown view id " + std::to_string(id));
  return it->second;
}
}  // namespace

CameraFile load_camera(const SceneManifest& manifest, int id) { return read_camera(paths_of(manifest, id).camera); }

View load_view(const SceneManifest& manifest, int id, bool extrinsic_inverted) {
  const ViewPaths& p = paths_of(manifest, id);
  const CameraFile cam = read_camera(p.camera);
  return View(read_image(p.image), cam.intrinsics, cam.extrinsics(extrinsic_inverted), id);
}

DepthMap load_depth(const SceneManifest& manifest, int id) {
  const ViewPaths& p = paths_of(manifest, id);
  if (!p.depth) throw Error("scene: view " + std::to_string(id) + " has no depth map");
  return read_pfm(*p.depth);
}

}  // namespace mvskit
