#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvskit/point_cloud.hpp"

namespace mvskit {

// e_i = min over target of |query_i - t|, exact. Parallel over queries.
std::vector<double> nn_distances(const PointCloud& query, const PointCloud& target);

// 100 / |R| * #{ e_{r->G} < d }.
double precision(const PointCloud& recon, const PointCloud& gt, double d);
// 100 / |G| * #{ e_{g->R} < d }.
double recall(const PointCloud& recon, const PointCloud& gt, double d);
// Same, from precomputed distances.
double fraction_below(const std::vector<double>& distances, double d);

// Harmonic mean; 0 when p + r == 0.
double fscore(double p, double r);

struct EvalReport {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
  std::vector<double> recon_to_gt;  // e_{r->G}
  std::vector<double> gt_to_recon;  // e_{g->R}
};

// Distances are computed once and reused for every threshold.
std::vector<EvalReport> evaluate(const PointCloud& recon, const PointCloud& gt, const std::vector<double>& thresholds);

struct DtuMetrics {
  double accuracy = 0.0;
  double completeness = 0.0;
  double overall = 0.0;
  double outlier_cap = 0.0;
  std::size_t accuracy_kept = 0;
  std::size_t completeness_kept = 0;
};

inline constexpr double kDefaultOutlierCap = 20.0;

// Means of the two distance sets after dropping values above outlier_cap.
DtuMetrics dtu_metrics(const PointCloud& recon, const PointCloud& gt, double outlier_cap = kDefaultOutlierCap);
DtuMetrics dtu_metrics(const std::vector<double>& recon_to_gt, const std::vector<double>& gt_to_recon,
                       double outlier_cap);

// "metric,threshold,value" rows for P/R/F at every threshold plus the DTU
// triple (threshold column holds the outlier cap).
void write_eval_csv(const std::string& path, const std::vector<EvalReport>& reports, const DtuMetrics& dtu);

// "direction,bin_lo,bin_hi,count" with `bins` equal-width bins on [0, max_distance].
void write_distance_histogram(const std::string& path, const EvalReport& report, int bins, double max_distance);

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
};

// Uniform surface sampling: triangle by area, then uniform barycentric.
PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

// Minimal OBJ subset: "v x y z" and "f a b c ..." with positive 1-based
// indices (a/b/c tokens use the vertex index; polygons are fan-triangulated).
TriangleMesh read_obj(const std::string& path);
void write_obj(const std::string& path, const TriangleMesh& mesh);

}  // namespace mvskit
