#include "mvskit/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mvskit/error.hpp"
#include "mvskit/rng.hpp"

namespace mvskit {

std::string SplitItem::to_string() const { return view < 0 ? scene_id : scene_id + " " + std::to_string(view); }

std::size_t labeled_count(double ratio, std::size_t total) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw Error("split: ratio must be in (0, 1]");
  // The epsilon keeps products such as 0.1 * 100 from rounding up to 11.
  const double k = std::ceil(ratio * static_cast<double>(total) - 1e-9);
  return std::min(total, static_cast<std::size_t>(std::max(0.0, k)));
}

Split make_split(const std::vector<SceneEntry>& scenes, const SplitSpec& spec) {
  if (scenes.empty()) throw Error("split: empty scene list");
  std::set<std::string> seen;
  for (const auto& s : scenes) {
    if (s.view_count < 1) throw Error("split: scene '" + s.scene_id + "' has no views");
    if (!seen.insert(s.scene_id).second) throw Error("split: duplicate scene '" + s.scene_id + "'");
  }
  std::vector<SceneEntry> sorted = scenes;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.scene_id < b.scene_id; });

  Rng rng(spec.seed);
  Split out;
  auto draw = [&](std::vector<SplitItem> items) {
    const std::size_t k = labeled_count(spec.ratio, items.size());
    rng.shuffle(items);
    out.labeled.insert(out.labeled.end(), items.begin(), items.begin() + k);
    out.unlabeled.insert(out.unlabeled.end(), items.begin() + k, items.end());
  };
  if (spec.mode == SplitMode::kByScenes) {
    std::vector<SplitItem> items;
    for (const auto& s : sorted) items.push_back({s.scene_id, -1});
    draw(std::move(items));
  } else if (spec.stratified) {
    for (const auto& s : sorted) {
      std::vector<SplitItem> items;
      for (int v = 0; v < s.view_count; ++v) items.push_back({s.scene_id, v});
      draw(std::move(items));
    }
  } else {
    std::vector<SplitItem> items;
    for (const auto& s : sorted) {
      for (int v = 0; v < s.view_count; ++v) items.push_back({s.scene_id, v});
    }
    draw(std::move(items));
  }
  if (out.labeled.empty()) throw Error("split: ratio yields no labeled items");
  std::sort(out.labeled.begin(), out.labeled.end());
  std::sort(out.unlabeled.begin(), out.unlabeled.end());
  return out;
}

void write_split_list(const std::string& path, const std::vector<SplitItem>& items) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  for (const auto& it : items) os << it.to_string() << '\n';
  if (!os) throw Error("write failed: " + path);
}

namespace {

template <typename F>
void for_each_record(const std::string& path, F&& f) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    f(tok, line_no);
  }
}

int parse_count(const std::string& s, const std::string& path, std::size_t line) {
  std::size_t used = 0;
  int v = -1;
  try {
    v = std::stoi(s, &used);
  } catch (...) {
    used = 0;
  }
  if (used != s.size() || v < 0) throw ParseError(path, line, "expected a non-negative integer, got '" + s + "'");
  return v;
}

}  // namespace

std::vector<SplitItem> read_split_list(const std::string& path) {
  std::vector<SplitItem> out;
  for_each_record(path, [&](const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() > 2) throw ParseError(path, line, "expected 'scene' or 'scene view'");
    out.push_back({tok[0], tok.size() == 2 ? parse_count(tok[1], path, line) : -1});
  });
  return out;
}

std::vector<SceneEntry> read_scene_list(const std::string& path) {
  std::vector<SceneEntry> out;
  for_each_record(path, [&](const std::vector<std::string>& tok, std::size_t line) {
    if (tok.size() != 2) throw ParseError(path, line, "expected 'scene_id view_count'");
    const int n = parse_count(tok[1], path, line);
    if (n < 1) throw ParseError(path, line, "view count must be >= 1");
    out.push_back({tok[0], n});
  });
  return out;
}

}  // namespace mvskit
