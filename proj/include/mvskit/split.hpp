#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mvskit {

struct SceneEntry {
  std::string scene_id;
  int view_count = 0;
};

enum class SplitMode { kByScenes, kByViews };

struct SplitSpec {
  SplitMode mode = SplitMode::kByViews;
  double ratio = 0.1;  // mu, in (0, 1]
  std::uint64_t seed = 0;
  // by_views only: take ceil(mu * n) views inside every scene instead of a
  // global draw.
  bool stratified = false;
};

// A labeled/unlabeled unit: a whole scene (view = -1) or one view (one
// multi-view pair, keyed by its reference view).
struct SplitItem {
  std::string scene_id;
  int view = -1;

  std::string to_string() const;
  auto operator<=>(const SplitItem&) const = default;
};

struct Split {
  std::vector<SplitItem> labeled;
  std::vector<SplitItem> unlabeled;
};

// Number of labeled items for `total` items: ceil(mu * total).
std::size_t labeled_count(double ratio, std::size_t total);

// Deterministic per seed; disjoint and exhaustive. Both lists are sorted.
Split make_split(const std::vector<SceneEntry>& scenes, const SplitSpec& spec);

// One item per line: "scene" or "scene view".
void write_split_list(const std::string& path, const std::vector<SplitItem>& items);
std::vector<SplitItem> read_split_list(const std::string& path);

// "scene_id view_count" per line.
std::vector<SceneEntry> read_scene_list(const std::string& path);

}  // namespace mvskit
