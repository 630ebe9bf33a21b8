#include "mvskit/gpm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mvskit/error.hpp"
#include "mvskit/parallel.hpp"

namespace mvskit {

AffinityField::AffinityField(int height, int width) : height_(height), width_(width) {
  if (height < 1 || width < 1) throw DimensionError("affinity field: invalid shape");
  weights_.assign(static_cast<std::size_t>(height) * width * kDirections * kNeighbors, 0.0);
}

double AffinityField::max_stability_sum() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < weights_.size(); i += kNeighbors) {
    worst = std::max(worst, std::abs(weights_[i]) + std::abs(weights_[i + 1]) + std::abs(weights_[i + 2]));
  }
  return worst;
}

void AffinityField::validate() const {
  for (double w : weights_) {
    if (!std::isfinite(w)) throw Error("affinity field: non-finite weight");
  }
  if (max_stability_sum() > 1.0 + 1e-12) throw Error("affinity field: stability sum exceeds 1");
}

namespace {

// Previous-line neighbor n (0..2) of (y, x) for a sweep direction.
inline void neighbor(Direction d, int y, int x, int n, int& ny, int& nx) {
  const int off = n - 1;
  switch (d) {
    case Direction::kLeftToRight: ny = y + off; nx = x - 1; break;
    case Direction::kRightToLeft: ny = y + off; nx = x + 1; break;
    case Direction::kTopToBottom: ny = y - 1; nx = x + off; break;
    case Direction::kBottomToTop: ny = y + 1; nx = x + off; break;
  }
}

inline bool inside(int y, int x, int h, int w) { return y >= 0 && x >= 0 && y < h && x < w; }

void check_budget(double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw Error("affinity: kappa must be in (0, 1]");
}

}  // namespace

AffinityField guidance_affinity(const Image& guide, double strength, double kappa) {
  if (!(strength > 0.0) || !std::isfinite(strength)) throw Error("guidance_affinity: strength must be positive");
  check_budget(kappa);
  const int h = guide.height(), w = guide.width(), ch = guide.channels();
  AffinityField field(h, w);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* gp = guide.pixel(y, x);
      for (int d = 0; d < kDirections; ++d) {
        for (int n = 0; n < kNeighbors; ++n) {
          int ny, nx;
          neighbor(static_cast<Direction>(d), y, x, n, ny, nx);
          if (!inside(ny, nx, h, w)) continue;
          const double* gq = guide.pixel(ny, nx);
          double dist = 0.0;
          for (int c = 0; c < ch; ++c) dist += (gp[c] - gq[c]) * (gp[c] - gq[c]);
          field.at(y, x, static_cast<Direction>(d), n) = kappa / kNeighbors * std::exp(-strength * dist);
        }
      }
    }
  }
  return field;
}

AffinityField uniform_affinity(int height, int width, double kappa) {
  check_budget(kappa);
  AffinityField field(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int d = 0; d < kDirections; ++d) {
        for (int n = 0; n < kNeighbors; ++n) {
          int ny, nx;
          neighbor(static_cast<Direction>(d), y, x, n, ny, nx);
          if (inside(ny, nx, height, width)) field.at(y, x, static_cast<Direction>(d), n) = kappa / kNeighbors;
        }
      }
    }
  }
  return field;
}

namespace {

// One output pixel of the recurrence; `h` already holds the previous line.
inline void step(const Image& x, const AffinityField& a, Direction d, int y, int xx, Image& h) {
  const int ch = x.channels();
  double* out = h.pixel(y, xx);
  const double* in = x.pixel(y, xx);
  double wsum = 0.0;
  for (int c = 0; c < ch; ++c) out[c] = 0.0;
  for (int n = 0; n < kNeighbors; ++n) {
    const double wn = a.at(y, xx, d, n);
    if (wn == 0.0) continue;
    int ny, nx;
    neighbor(d, y, xx, n, ny, nx);
    if (!inside(ny, nx, x.height(), x.width())) continue;
    const double* q = h.pixel(ny, nx);
    for (int c = 0; c < ch; ++c) out[c] += wn * q[c];
    wsum += wn;
  }
  for (int c = 0; c < ch; ++c) out[c] += (1.0 - wsum) * in[c];
}

}  // namespace

Image propagate(const Image& distorted, const AffinityField& affinity) {
  const int h = distorted.height(), w = distorted.width(), ch = distorted.channels();
  if (affinity.height() != h || affinity.width() != w) {
    throw DimensionError("propagate: affinity field does not match the image");
  }
  Image out(h, w, ch);
  for (int d = 0; d < kDirections; ++d) {
    const auto dir = static_cast<Direction>(d);
    Image hidden(h, w, ch);
    if (dir == Direction::kLeftToRight || dir == Direction::kRightToLeft) {
      for (int i = 0; i < w; ++i) {
        const int x = dir == Direction::kLeftToRight ? i : w - 1 - i;
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) step(distorted, affinity, dir, y, x, hidden);
      }
    } else {
      for (int i = 0; i < h; ++i) {
        const int y = dir == Direction::kTopToBottom ? i : h - 1 - i;
#pragma omp parallel for schedule(static)
        for (int x = 0; x < w; ++x) step(distorted, affinity, dir, y, x, hidden);
      }
    }
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += 0.25 * hidden.data()[i];
  }
  return out;
}

Image gpm_filter(const Image& transferred, const Image& content_guide, double strength) {
  const int h = transferred.height(), w = transferred.width(), ch = transferred.channels();
  if (content_guide.height() != h || content_guide.width() != w) {
    throw DimensionError("gpm_filter: guide and image differ in size");
  }
  const int gch = content_guide.channels();
  if (gch != ch && gch != 1) throw DimensionError("gpm_filter: guide must have 1 channel or match the image");
  auto guide_at = [&](std::size_t px, int c) { return content_guide.data()[px * gch + (gch == 1 ? 0 : c)]; };

  // The distortion is what the transfer added on top of the guide; smoothing
  // it along guide-coherent paths keeps the guide's detail and edges.
  Image residual(h, w, ch);
  for (std::size_t px = 0; px < transferred.pixel_count(); ++px) {
    for (int c = 0; c < ch; ++c) residual.data()[px * ch + c] = transferred.data()[px * ch + c] - guide_at(px, c);
  }
  const Image smoothed = propagate(residual, guidance_affinity(content_guide, strength));
  const auto lo = transferred.channel_min(), hi = transferred.channel_max();
  Image out(h, w, ch);
  for (std::size_t px = 0; px < transferred.pixel_count(); ++px) {
    for (int c = 0; c < ch; ++c) {
      out.data()[px * ch + c] = std::clamp(guide_at(px, c) + smoothed.data()[px * ch + c], lo[c], hi[c]);
    }
  }
  return out;
}

void SparseCorrespondences::validate(const std::vector<View>& views, double tol) const {
  for (std::size_t j = 0; j < points.size(); ++j) {
    for (const auto& obs : points[j].observations) {
      const View* view = nullptr;
      for (const auto& v : views) {
        if (v.id() == obs.view_id) view = &v;
      }
      if (!view) throw Error("sparse point " + std::to_string(j) + ": unknown view id " + std::to_string(obs.view_id));
      const auto proj = project_point(points[j].position, *view);
      if (!proj || std::hypot(proj->pixel.x - obs.pixel.x, proj->pixel.y - obs.pixel.y) > tol) {
        throw Error("sparse point " + std::to_string(j) + ": observation in view " + std::to_string(obs.view_id) +
                    " does not reproject to its pixel");
      }
    }
  }
}

void write_sparse(const std::string& path, const SparseCorrespondences& sparse) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  char buf[64];
  for (const auto& p : sparse.points) {
    for (int i = 0; i < 3; ++i) {
      std::snprintf(buf, sizeof buf, "%s%.17g", i ? " " : "", p.position[i]);
      os << buf;
    }
    for (const auto& o : p.observations) {
      std::snprintf(buf, sizeof buf, "  %d %.17g %.17g", o.view_id, o.pixel.x, o.pixel.y);
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw Error("write failed: " + path);
}

SparseCorrespondences read_sparse(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path);
  SparseCorrespondences out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok.size() < 3 || (tok.size() - 3) % 3 != 0) {
      throw ParseError(path, line_no, "expected X Y Z followed by (view column row) triples");
    }
    auto number = [&](const std::string& s) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (...) {
        used = 0;
      }
      if (used != s.size() || !std::isfinite(v)) throw ParseError(path, line_no, "bad number '" + s + "'");
      return v;
    };
    SparsePoint p;
    p.position = {number(tok[0]), number(tok[1]), number(tok[2])};
    for (std::size_t i = 3; i < tok.size(); i += 3) {
      const double id = number(tok[i]);
      if (id != std::floor(id) || id < 0) throw ParseError(path, line_no, "view id must be a non-negative integer");
      p.observations.push_back({static_cast<int>(id), {number(tok[i + 1]), number(tok[i + 2])}});
    }
    out.points.push_back(std::move(p));
  }
  return out;
}

SpnLossReport spn_loss(const std::vector<View>& originals, const std::vector<Image>& filtered,
                       const SparseCorrespondences& sparse) {
  if (originals.empty()) throw Error("spn_loss: no views");
  if (originals.size() != filtered.size()) throw DimensionError("spn_loss: one filtered image per view is required");
  const std::size_t n_views = originals.size();
  const View& ref = originals.front();
  const int ch = ref.channels();

  SpnLossReport report;
  CompensatedSum image_term, sparse_term;
  std::vector<double> a(ch), b(ch);
  bool any_sparse = false;
  for (std::size_t v = 0; v < n_views; ++v) {
    const Image& orig = originals[v].image();
    const Image& filt = filtered[v];
    if (!orig.same_shape(filt)) throw DimensionError("spn_loss: filtered image shape differs from its view");
    const std::size_t n = orig.data().size();
    const double sq = deterministic_sum(n, [&](std::size_t i) {
      const double d = orig.data()[i] - filt.data()[i];
      return d * d;
    });
    image_term.add(sq / static_cast<double>(orig.pixel_count()));

    CompensatedSum sv;
    std::size_t used = 0;
    for (const auto& point : sparse.points) {
      const Observation* in_ref = nullptr;
      for (const auto& o : point.observations) {
        if (o.view_id == ref.id()) in_ref = &o;
      }
      if (!in_ref) continue;
      const auto ref_proj = project_point(point.position, ref);
      if (!ref_proj) continue;
      const auto to_v = try_project_pixel(in_ref->pixel, ref_proj->depth, ref, originals[v]);
      if (!to_v) continue;
      if (!sample_bilinear(ref.image(), in_ref->pixel.x, in_ref->pixel.y, a.data())) continue;
      if (!sample_bilinear(filt, to_v->pixel.x, to_v->pixel.y, b.data())) continue;
      double d2 = 0.0;
      for (int c = 0; c < ch; ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
      sv.add(d2);
      ++used;
    }
    if (used > 0) {
      any_sparse = true;
      sparse_term.add(sv.value() / static_cast<double>(used));
      report.sparse_used += used;
    }
  }
  report.image_term = image_term.value() / static_cast<double>(n_views);
  report.sparse_omitted = !any_sparse;
  report.sparse_term = any_sparse ? sparse_term.value() / static_cast<double>(n_views) : 0.0;
  report.total = report.image_term + report.sparse_term;
  return report;
}

}  // namespace mvskit
