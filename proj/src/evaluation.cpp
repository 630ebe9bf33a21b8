#include "mvskit/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>

#include "mvskit/error.hpp"
#include "mvskit/parallel.hpp"
#include "mvskit/rng.hpp"
#include "mvskit/spatial_index.hpp"

namespace mvskit {

std::vector<double> nn_distances(const PointCloud& query, const PointCloud& target) {
  if (target.empty()) throw Error("nn_distances: empty target cloud");
  const SpatialIndex index(target.positions);
  std::vector<double> out(query.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(query.size()); ++i) {
    out[i] = index.nearest(query.positions[i]).distance;
  }
  return out;
}

double fraction_below(const std::vector<double>& distances, double d) {
  if (distances.empty()) throw Error("fraction_below: empty distance set");
  const auto hits = std::count_if(distances.begin(), distances.end(), [d](double e) { return e < d; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(distances.size());
}

double precision(const PointCloud& recon, const PointCloud& gt, double d) {
  if (!(d > 0.0)) throw Error("precision: threshold must be positive");
  if (recon.empty()) throw Error("precision: empty reconstruction");
  return fraction_below(nn_distances(recon, gt), d);
}

double recall(const PointCloud& recon, const PointCloud& gt, double d) {
  if (!(d > 0.0)) throw Error("recall: threshold must be positive");
  if (gt.empty()) throw Error("recall: empty ground truth");
  if (recon.empty()) throw Error("recall: empty reconstruction");
  return fraction_below(nn_distances(gt, recon), d);
}

double fscore(double p, double r) {
  if (!(p >= 0.0 && p <= 100.0 && r >= 0.0 && r <= 100.0)) throw Error("fscore: inputs must lie in [0,100]");
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::vector<EvalReport> evaluate(const PointCloud& recon, const PointCloud& gt, const std::vector<double>& thresholds) {
  if (recon.empty() || gt.empty()) throw Error("evaluate: both clouds must be non-empty");
  const auto r2g = nn_distances(recon, gt);
  const auto g2r = nn_distances(gt, recon);
  std::vector<EvalReport> out;
  for (double d : thresholds) {
    if (!(d > 0.0)) throw Error("evaluate: thresholds must be positive");
    EvalReport rep;
    rep.threshold = d;
    rep.precision = fraction_below(r2g, d);
    rep.recall = fraction_below(g2r, d);
    rep.fscore = fscore(rep.precision, rep.recall);
    rep.recon_to_gt = r2g;
    rep.gt_to_recon = g2r;
    out.push_back(std::move(rep));
  }
  return out;
}

namespace {

double capped_mean(const std::vector<double>& d, double cap, std::size_t& kept) {
  CompensatedSum s;
  kept = 0;
  for (double v : d) {
    if (v <= cap) {
      s.add(v);
      ++kept;
    }
  }
  return kept ? s.value() / static_cast<double>(kept) : 0.0;
}

}  // namespace

DtuMetrics dtu_metrics(const std::vector<double>& recon_to_gt, const std::vector<double>& gt_to_recon,
                       double outlier_cap) {
  if (!(outlier_cap > 0.0)) throw Error("dtu_metrics: outlier cap must be positive");
  DtuMetrics m;
  m.outlier_cap = outlier_cap;
  m.accuracy = capped_mean(recon_to_gt, outlier_cap, m.accuracy_kept);
  m.completeness = capped_mean(gt_to_recon, outlier_cap, m.completeness_kept);
  if (m.accuracy_kept == 0 || m.completeness_kept == 0) {
    throw Error("dtu_metrics: every distance exceeds the outlier cap");
  }
  m.overall = 0.5 * (m.accuracy + m.completeness);
  return m;
}

DtuMetrics dtu_metrics(const PointCloud& recon, const PointCloud& gt, double outlier_cap) {
  if (recon.empty() || gt.empty()) throw Error("dtu_metrics: both clouds must be non-empty");
  return dtu_metrics(nn_distances(recon, gt), nn_distances(gt, recon), outlier_cap);
}

namespace {
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_eval_csv(const std::string& path, const std::vector<EvalReport>& reports, const DtuMetrics& dtu) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  os << "metric,threshold,value\n";
  for (const auto& r : reports) {
    os << "precision," << num(r.threshold) << ',' << num(r.precision) << '\n';
    os << "recall," << num(r.threshold) << ',' << num(r.recall) << '\n';
    os << "fscore," << num(r.threshold) << ',' << num(r.fscore) << '\n';
  }
  os << "accuracy," << num(dtu.outlier_cap) << ',' << num(dtu.accuracy) << '\n';
  os << "completeness," << num(dtu.outlier_cap) << ',' << num(dtu.completeness) << '\n';
  os << "overall," << num(dtu.outlier_cap) << ',' << num(dtu.overall) << '\n';
  if (!os) throw Error("write failed: " + path);
}

void write_distance_histogram(const std::string& path, const EvalReport& report, int bins, double max_distance) {
  if (bins < 1 || !(max_distance > 0.0)) throw Error("histogram: need bins >= 1 and a positive range");
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  os << "direction,bin_lo,bin_hi,count\n";
  auto emit = [&](const char* name, const std::vector<double>& d) {
    std::vector<std::size_t> counts(bins + 1, 0);
    for (double v : d) {
      const auto b = static_cast<std::size_t>(std::min<double>(bins, std::floor(v / max_distance * bins)));
      ++counts[v >= max_distance ? bins : b];
    }
    for (int b = 0; b < bins; ++b) {
      os << name << ',' << num(max_distance * b / bins) << ',' << num(max_distance * (b + 1) / bins) << ','
         << counts[b] << '\n';
    }
    os << name << ',' << num(max_distance) << ",inf," << counts[bins] << '\n';
  };
  emit("recon_to_gt", report.recon_to_gt);
  emit("gt_to_recon", report.gt_to_recon);
}

PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error("sample_mesh: n must be >= 1");
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int i : t) {
      if (i < 0 || static_cast<std::size_t>(i) >= mesh.vertices.size()) throw Error("sample_mesh: bad vertex index");
    }
    const Eigen::Vector3d& a = mesh.vertices[t[0]];
    total += 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw Error("sample_mesh: mesh has zero total area");
  Rng rng(seed);
  PointCloud out;
  out.positions.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform() * total;
    std::size_t t = std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
    t = std::min(t, cumulative.size() - 1);
    const auto& tri = mesh.triangles[t];
    const double r1 = std::sqrt(rng.uniform()), r2 = rng.uniform();
    out.positions.push_back((1.0 - r1) * mesh.vertices[tri[0]] + r1 * (1.0 - r2) * mesh.vertices[tri[1]] +
                            r1 * r2 * mesh.vertices[tri[2]]);
  }
  return out;
}

TriangleMesh read_obj(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path);
  TriangleMesh mesh;
  std::vector<std::size_t> face_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw ParseError(path, line_no, "vertex needs three coordinates");
      mesh.vertices.push_back(v);
    } else if (kw == "f") {
      std::vector<int> idx;
      for (std::string tok; ls >> tok;) {
        const std::string head = tok.substr(0, tok.find('/'));
        std::size_t used = 0;
        long v = 0;
        try {
          v = std::stol(head, &used);
        } catch (...) {
          used = 0;
        }
        if (used != head.size() || v < 1) throw ParseError(path, line_no, "face indices must be positive integers");
        idx.push_back(static_cast<int>(v - 1));
      }
      if (idx.size() < 3) throw ParseError(path, line_no, "face needs at least three vertices");
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) {
        mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
        face_lines.push_back(line_no);
      }
    }
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int i : mesh.triangles[t]) {
      if (static_cast<std::size_t>(i) >= mesh.vertices.size()) {
        throw ParseError(path, face_lines[t], "face references a missing vertex");
      }
    }
  }
  return mesh;
}

void write_obj(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  for (const auto& v : mesh.vertices) os << "v " << num(v.x()) << ' ' << num(v.y()) << ' ' << num(v.z()) << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace mvskit
