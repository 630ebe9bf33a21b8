#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "mvskit/error.hpp"
#include "mvskit/point_cloud.hpp"

namespace mvskit {

void PointCloud::validate() const {
  for (const auto& p : positions) {
    if (!p.allFinite()) throw Error("point cloud: non-finite position");
  }
  if (!colors.empty() && colors.size() != positions.size()) throw Error("point cloud: color count mismatch");
}

namespace {

unsigned char quantize(double c) {
  const double v = std::round(std::clamp(c, 0.0, 1.0) * 255.0);
  return static_cast<unsigned char>(v);
}

}  // namespace

void write_ply(const std::string& path, const PointCloud& cloud) {
  cloud.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size()
     << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors()) os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  os << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) detail::put_f32_le(os, static_cast<float>(cloud.positions[i][k]));
    if (cloud.has_colors()) {
      const unsigned char rgb[3] = {quantize(cloud.colors[i][0]), quantize(cloud.colors[i][1]),
                                    quantize(cloud.colors[i][2])};
      os.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
  if (!os) throw Error("write failed: " + path);
}

PointCloud read_ply(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  std::size_t pos = 0, line_no = 0;
  auto next_line = [&]() {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) throw ParseError(path, line_no + 1, "unterminated header");
    std::string l = bytes.substr(pos, end - pos);
    if (!l.empty() && l.back() == '\r') l.pop_back();
    pos = end + 1;
    ++line_no;
    return l;
  };

  if (next_line() != "ply") throw ParseError(path, 1, "missing 'ply' magic");
  std::size_t count = 0;
  bool have_vertex = false, have_format = false;
  std::vector<std::string> props;
  for (;;) {
    const std::string l = next_line();
    std::istringstream ls(l);
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt != "binary_little_endian") throw ParseError(path, line_no, "unsupported format '" + fmt + "'");
      have_format = true;
    } else if (kw == "element") {
      std::string name;
      long long n = -1;
      ls >> name >> n;
      if (name != "vertex" || have_vertex) throw ParseError(path, line_no, "only a single vertex element is supported");
      if (n < 0) throw ParseError(path, line_no, "bad vertex count");
      count = static_cast<std::size_t>(n);
      have_vertex = true;
    } else if (kw == "property") {
      if (!have_vertex) throw ParseError(path, line_no, "property before element");
      std::string type, name;
      ls >> type >> name;
      props.push_back(type + " " + name);
    } else {
      throw ParseError(path, line_no, "unexpected header keyword '" + kw + "'");
    }
  }
  if (!have_format || !have_vertex) throw ParseError(path, line_no, "header lacks format or vertex element");
  const std::vector<std::string> xyz = {"float x", "float y", "float z"};
  const std::vector<std::string> xyzrgb = {"float x", "float y", "float z", "uchar red", "uchar green", "uchar blue"};
  const bool colored = props == xyzrgb;
  if (!colored && props != xyz) {
    throw ParseError(path, line_no, "expected float x,y,z with optional uchar red,green,blue");
  }
  const std::size_t stride = colored ? 15 : 12;
  if (bytes.size() - pos != count * stride) {
    throw ParseError(path, 0, bytes.size(), "vertex payload size does not match the header");
  }
  PointCloud cloud;
  cloud.positions.resize(count);
  if (colored) cloud.colors.resize(count);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* rec = data + i * stride;
    for (int k = 0; k < 3; ++k) {
      const float v = detail::f32_from_le(rec + 4 * k);
      if (!std::isfinite(v)) throw ParseError(path, 0, pos + i * stride + 4 * k, "non-finite coordinate");
      cloud.positions[i][k] = v;
    }
    if (colored) {
      for (int k = 0; k < 3; ++k) cloud.colors[i][k] = rec[12 + k] / 255.0;
    }
  }
  return cloud;
}

}  // namespace mvskit
