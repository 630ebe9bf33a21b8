#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvskit/geometry.hpp"

namespace mvskit {

// n x d embeddings (one row per view) describing one scene.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;
  std::string scene_id;

  Eigen::Index count() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
  void validate() const;
};

// Gaussian kernel bandwidth; nullopt selects the median heuristic.
using Bandwidth = std::optional<double>;

// Median pairwise Euclidean distance over the pooled rows of `sets`
// (falls back to 1 when every pair coincides).
double median_bandwidth(const std::vector<const EmbeddingSet*>& sets);

// Biased (V-statistic) MMD^2 with k(a,b) = exp(-|a-b|^2 / (2 sigma^2)).
double mmd_squared(const EmbeddingSet& x, const EmbeddingSet& y, Bandwidth bandwidth = std::nullopt);

// M_ij = mmd_squared(set_i, set_j) with one bandwidth pooled over all sets.
// Exactly symmetric, zero diagonal.
Eigen::MatrixXd confusion_matrix(const std::vector<EmbeddingSet>& sets, Bandwidth bandwidth = std::nullopt);

struct PermutationTest {
  double statistic = 0.0;
  double threshold = 0.0;  // (1 - alpha) quantile of the permuted statistics
  double p_value = 1.0;
};

// Two-sample permutation test on mmd_squared with a fixed bandwidth.
PermutationTest mmd_permutation_test(const EmbeddingSet& x, const EmbeddingSet& y, double bandwidth,
                                     int permutations, std::uint64_t seed, double alpha = 0.05);

// Hand-crafted descriptor: channel means and variances, 8x8 area-averaged
// luminance, and an 8-bin magnitude-weighted gradient orientation histogram,
// concatenated and L2-normalized.
Eigen::VectorXd embed_view(const Image& image);
inline Eigen::VectorXd embed_view(const View& view) { return embed_view(view.image()); }

// Embedding files reuse the FMAP container with C = n, H = 1, W = d.
void write_embeddings(const std::string& path, const EmbeddingSet& set);
EmbeddingSet read_embeddings(const std::string& path, const std::string& scene_id);

}  // namespace mvskit
