#include "mvskit/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mvskit/error.hpp"
#include "mvskit/parallel.hpp"
#include "mvskit/rng.hpp"
#include "mvskit/style.hpp"

namespace mvskit {

void EmbeddingSet::validate() const {
  if (vectors.rows() < 2) throw Error("embedding set '" + scene_id + "': at least two embeddings are required");
  if (vectors.cols() < 1) throw Error("embedding set '" + scene_id + "': empty embeddings");
  if (!vectors.allFinite()) throw Error("embedding set '" + scene_id + "': non-finite entry");
}

namespace {

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double d = a(i, k) - b(j, k);
    s += d * d;
  }
  return s;
}

// Mean of k(a_i, b_j) over all pairs. Identical arguments produce identical
// results, which keeps the self-distance exactly zero.
double kernel_mean(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma) {
  const double scale = 1.0 / (2.0 * sigma * sigma);
  const double s = deterministic_sum(static_cast<std::size_t>(a.rows()), [&](std::size_t i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      row += std::exp(-squared_distance(a, static_cast<Eigen::Index>(i), b, j) * scale);
    }
    return row;
  });
  return s / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

double mmd_with_sigma(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double sigma) {
  const double v = kernel_mean(x, x, sigma) + kernel_mean(y, y, sigma) - 2.0 * kernel_mean(x, y, sigma);
  return std::max(v, 0.0);
}

void check_pair(const EmbeddingSet& x, const EmbeddingSet& y) {
  x.validate();
  y.validate();
  if (x.dim() != y.dim()) throw DimensionError("mmd: embedding dimensions differ");
}

double resolve(const Bandwidth& bw, const std::vector<const EmbeddingSet*>& sets) {
  if (!bw) return median_bandwidth(sets);
  if (!(*bw > 0.0) || !std::isfinite(*bw)) throw Error("mmd: bandwidth must be positive");
  return *bw;
}

}  // namespace

double median_bandwidth(const std::vector<const EmbeddingSet*>& sets) {
  std::vector<Eigen::VectorXd> storage;
  for (const auto* s : sets) {
    for (Eigen::Index i = 0; i < s->count(); ++i) storage.push_back(s->vectors.row(i).transpose());
  }
  std::vector<double> d;
  d.reserve(storage.size() * (storage.size() - 1) / 2);
  for (std::size_t i = 0; i < storage.size(); ++i) {
    for (std::size_t j = i + 1; j < storage.size(); ++j) d.push_back((storage[i] - storage[j]).norm());
  }
  if (d.empty()) return 1.0;
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  const double med = n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
  return med > 0.0 ? med : 1.0;
}

double mmd_squared(const EmbeddingSet& x, const EmbeddingSet& y, Bandwidth bandwidth) {
  check_pair(x, y);
  return mmd_with_sigma(x.vectors, y.vectors, resolve(bandwidth, {&x, &y}));
}

Eigen::MatrixXd confusion_matrix(const std::vector<EmbeddingSet>& sets, Bandwidth bandwidth) {
  if (sets.size() < 2) throw Error("confusion_matrix: at least two sets are required");
  std::vector<const EmbeddingSet*> ptrs;
  for (const auto& s : sets) {
    check_pair(sets.front(), s);
    ptrs.push_back(&s);
  }
  const double sigma = resolve(bandwidth, ptrs);
  const auto S = static_cast<Eigen::Index>(sets.size());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < S; ++i) {
    for (Eigen::Index j = i + 1; j < S; ++j) pairs.emplace_back(i, j);
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(S, S);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(pairs.size()); ++p) {
    const auto [i, j] = pairs[p];
    m(i, j) = mmd_with_sigma(sets[i].vectors, sets[j].vectors, sigma);
  }
  for (Eigen::Index i = 0; i < S; ++i) {
    for (Eigen::Index j = i + 1; j < S; ++j) m(j, i) = m(i, j);
  }
  return m;
}

PermutationTest mmd_permutation_test(const EmbeddingSet& x, const EmbeddingSet& y, double bandwidth,
                                     int permutations, std::uint64_t seed, double alpha) {
  check_pair(x, y);
  if (permutations < 1) throw Error("permutation test: need at least one permutation");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("permutation test: alpha must be in (0, 1)");
  if (!(bandwidth > 0.0)) throw Error("permutation test: bandwidth must be positive");
  const Eigen::Index n = x.count(), m = y.count();
  Eigen::MatrixXd pooled(n + m, x.dim());
  pooled << x.vectors, y.vectors;

  PermutationTest out;
  out.statistic = mmd_with_sigma(x.vectors, y.vectors, bandwidth);
  Rng rng(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n + m));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
  std::vector<double> stats;
  std::size_t at_least = 0;
  Eigen::MatrixXd a(n, x.dim()), b(m, x.dim());
  for (int p = 0; p < permutations; ++p) {
    rng.shuffle(idx);
    for (Eigen::Index i = 0; i < n; ++i) a.row(i) = pooled.row(idx[i]);
    for (Eigen::Index i = 0; i < m; ++i) b.row(i) = pooled.row(idx[n + i]);
    const double s = mmd_with_sigma(a, b, bandwidth);
    stats.push_back(s);
    if (s >= out.statistic) ++at_least;
  }
  std::sort(stats.begin(), stats.end());
  const auto q = static_cast<std::size_t>(std::ceil((1.0 - alpha) * permutations));
  out.threshold = stats[std::clamp<std::size_t>(q, 1, stats.size()) - 1];
  out.p_value = static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
  return out;
}

Eigen::VectorXd embed_view(const Image& image) {
  const int h = image.height(), w = image.width(), ch = image.channels();
  if (h < 1 || w < 1) throw DimensionError("embed_view: empty image");
  constexpr int kGrid = 8, kBins = 8;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * ch + kGrid * kGrid + kBins);
  const double np = static_cast<double>(image.pixel_count());

  for (int c = 0; c < ch; ++c) {
    CompensatedSum s;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) s.add(image.at(y, x, c));
    const double mean = s.value() / np;
    CompensatedSum q;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) q.add((image.at(y, x, c) - mean) * (image.at(y, x, c) - mean));
    v[2 * c] = mean;
    v[2 * c + 1] = q.value() / np;
  }

  const Image gray = image.gray();
  for (int by = 0; by < kGrid; ++by) {
    const int y0 = by * h / kGrid, y1 = std::max(y0 + 1, (by + 1) * h / kGrid);
    for (int bx = 0; bx < kGrid; ++bx) {
      const int x0 = bx * w / kGrid, x1 = std::max(x0 + 1, (bx + 1) * w / kGrid);
      double s = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) s += gray.at(y, x, 0);
      v[2 * ch + by * kGrid + bx] = s / static_cast<double>((y1 - y0) * (x1 - x0));
    }
  }

  const int hist = 2 * ch + kGrid * kGrid;
  double total = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (gray.at(y, std::min(x + 1, w - 1), 0) - gray.at(y, std::max(x - 1, 0), 0));
      const double gy = 0.5 * (gray.at(std::min(y + 1, h - 1), x, 0) - gray.at(std::max(y - 1, 0), x, 0));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      const int bin = std::min(kBins - 1, static_cast<int>(angle / (2.0 * std::numbers::pi) * kBins));
      v[hist + bin] += mag;
      total += mag;
    }
  }
  if (total > 0.0) v.segment(hist, kBins) /= total;

  const double norm = v.norm();
  if (norm > 0.0) return v / norm;
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(v.size());
  unit[0] = 1.0;
  return unit;
}

void write_embeddings(const std::string& path, const EmbeddingSet& set) {
  set.validate();
  write_fmap(path, FeatureMap(set.vectors, 1, static_cast<int>(set.dim())));
}

EmbeddingSet read_embeddings(const std::string& path, const std::string& scene_id) {
  const FeatureMap f = read_fmap(path);
  if (f.height != 1) throw Error(path + ": embedding file must have H = 1");
  EmbeddingSet set{f.data, scene_id};
  set.validate();
  return set;
}

}  // namespace mvskit
