#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "mvskit/dataio.hpp"
#include "mvskit/error.hpp"
#include "mvskit/evaluation.hpp"
#include "mvskit/fusion.hpp"
#include "mvskit/gpm.hpp"
#include "mvskit/losses.hpp"
#include "mvskit/mmd.hpp"
#include "mvskit/split.hpp"
#include "mvskit/style.hpp"
#include "mvskit/sweep.hpp"
#include "mvskit/synth.hpp"

namespace fs = std::filesystem;

namespace mvskit::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string out_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::ofstream open_csv(const std::string& path, const std::string& header) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  os << header << '\n';
  return os;
}

Command make(CLI::App& root, const std::string& name, const std::string& about) {
  Command c;
  c.app = root.add_subcommand(name, about);
  c.out_dir = std::make_shared<std::string>(".");
  c.app->add_option("-o,--out", *c.out_dir, "Output directory")->capture_default_str();
  return c;
}

struct LoadedScene {
  SceneManifest manifest;
  std::map<int, View> views;
};

LoadedScene load_scene(const std::string& root, bool gta) {
  LoadedScene s{load_manifest(root), {}};
  for (int id : s.manifest.view_ids()) s.views.emplace(id, load_view(s.manifest, id, gta));
  return s;
}

DepthHypotheses hypotheses_for(const CameraFile& cam, std::optional<double> dmin, std::optional<double> dmax,
                               int count) {
  const int K = count > 0 ? count : cam.depth_num ? static_cast<int>(std::lround(*cam.depth_num)) : 64;
  const double lo = dmin.value_or(cam.depth_min);
  double hi;
  if (dmax) {
    hi = *dmax;
  } else if (cam.depth_max) {
    hi = *cam.depth_max;
  } else {
    const int stored = cam.depth_num ? static_cast<int>(std::lround(*cam.depth_num)) : K;
    hi = cam.depth_min + cam.depth_interval * (stored - 1);
  }
  if (!(lo > 0.0) || !(hi > lo)) throw Error("sweep: invalid depth range [" + num(lo) + ", " + num(hi) + "]");
  return DepthHypotheses::uniform(lo, hi, K);
}

CostKind parse_cost(const std::string& s) {
  if (s == "ssd") return CostKind::kSSD;
  if (s == "ncc") return CostKind::kNCC;
  throw Error("unknown cost '" + s + "'");
}

double median_abs_error(const DepthMap& est, const DepthMap& gt) {
  std::vector<double> e;
  for (std::size_t i = 0; i < gt.values().size(); ++i) {
    if (gt.values()[i] > 0.0) e.push_back(std::abs(est.values()[i] - gt.values()[i]));
  }
  if (e.empty()) return std::nan("");
  auto mid = e.begin() + e.size() / 2;
  std::nth_element(e.begin(), mid, e.end());
  return *mid;
}

// ---------------------------------------------------------------- synth

Command synth_command(CLI::App& root) {
  auto c = make(root, "synth", "Generate a synthetic multi-view scene on disk");
  auto spec = std::make_shared<SynthSpec>();
  auto surface = std::make_shared<std::string>("plane");
  auto texture = std::make_shared<std::string>("noise");
  auto depth_count = std::make_shared<int>(64);
  auto& a = *c.app;
  a.add_option("--surface", *surface, "plane, sphere or two-box")->capture_default_str();
  a.add_option("--texture", *texture, "checker, noise or gradient")->capture_default_str();
  a.add_option("--views", spec->views, "Number of views")->capture_default_str();
  a.add_option("--width", spec->width)->capture_default_str();
  a.add_option("--height", spec->height)->capture_default_str();
  a.add_option("--channels", spec->channels, "1 or 3")->capture_default_str();
  a.add_option("--fov", spec->fov_degrees, "Horizontal field of view in degrees")->capture_default_str();
  a.add_option("--radius", spec->radius, "Camera distance from the scene center")->capture_default_str();
  a.add_option("--arc-step", spec->arc_step_degrees, "Angle between neighboring cameras")->capture_default_str();
  a.add_option("--texture-scale", spec->texture_scale, "World units per texture cell (0: auto)")->capture_default_str();
  a.add_option("--seed", spec->seed)->capture_default_str();
  a.add_option("--sparse-stride", spec->sparse_stride)->capture_default_str();
  a.add_option("--depth-count", *depth_count, "Hypotheses recorded in the camera files")->capture_default_str();
  c.exec = [=, out = c.out_dir](RunLog& log) {
    SynthSpec s = *spec;
    s.surface = parse_surface(*surface);
    s.texture = parse_texture(*texture);
    const SyntheticScene scene = generate(s);
    write_scene(scene, *out, *depth_count);
    log.emplace_back("texture_scale", num(scene.spec.texture_scale));
    log.emplace_back("depth_min", num(scene.depth_min));
    log.emplace_back("depth_max", num(scene.depth_max));
    log.emplace_back("gt_points", std::to_string(scene.gt_cloud.size()));
    log.emplace_back("sparse_points", std::to_string(scene.sparse.points.size()));
  };
  return c;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string scene;
  std::vector<int> refs;
  std::size_t max_sources = 0;
  int depth_count = 0;
  std::optional<double> depth_min, depth_max;
  std::string cost = "ssd";
  int window = 5;
  double temperature = 1.0;
  bool gta = false;
};

void add_scene_options(CLI::App& a, std::string& scene, bool& gta) {
  a.add_option("--scene", scene, "Scene directory (images/, cams/, pair.txt)")->required();
  a.add_flag("--gta", gta, "Camera files store camera-to-world extrinsics");
}

Command sweep_command(CLI::App& root) {
  auto c = make(root, "sweep", "Plane-sweep depth estimation for every (or selected) reference view");
  auto o = std::make_shared<SweepArgs>();
  auto& a = *c.app;
  add_scene_options(a, o->scene, o->gta);
  a.add_option("--ref", o->refs, "Reference view ids (default: all)");
  a.add_option("--sources", o->max_sources, "Maximum source views per reference (0: all)")->capture_default_str();
  a.add_option("--depth-count", o->depth_count, "Hypotheses K (0: from the camera file)")->capture_default_str();
  a.add_option("--depth-min", o->depth_min, "Override the camera file depth range");
  a.add_option("--depth-max", o->depth_max, "Override the camera file depth range");
  a.add_option("--cost", o->cost, "ssd or ncc")->capture_default_str();
  a.add_option("--window", o->window, "Odd matching window size")->capture_default_str();
  a.add_option("--temperature", o->temperature, "Softmax temperature")->capture_default_str();
  c.exec = [o, out = c.out_dir](RunLog&) {
    const LoadedScene scene = load_scene(o->scene, o->gta);
    std::vector<int> refs = o->refs.empty() ? scene.manifest.view_ids() : o->refs;
    fs::create_directories(fs::path(*out) / "depths");
    fs::create_directories(fs::path(*out) / "confidence");
    auto csv = open_csv(out_path(*out, "sweep.csv"),
                        "view,depth_min,depth_max,hypotheses,mean_confidence,median_abs_error");
    SweepOptions opts;
    opts.cost = parse_cost(o->cost);
    opts.window = o->window;
    opts.temperature = o->temperature;
    for (int ref : refs) {
      if (!scene.views.count(ref)) throw Error("sweep: unknown reference view " + std::to_string(ref));
      std::vector<View> sources;
      for (int id : scene.manifest.sources_of(ref, o->max_sources)) sources.push_back(scene.views.at(id));
      const auto hyps =
          hypotheses_for(load_camera(scene.manifest, ref), o->depth_min, o->depth_max, o->depth_count);
      const SweepResult r = plane_sweep_depth(scene.views.at(ref), sources, hyps, opts);
      const std::string stem = view_stem(ref);
      write_pfm(out_path(*out, "depths/" + stem + ".pfm"), r.depth);
      write_pfm(out_path(*out, "confidence/" + stem + ".pfm"), r.confidence);
      double conf = 0.0;
      for (double v : r.confidence.values()) conf += v;
      conf /= static_cast<double>(r.confidence.size());
      double err = std::nan("");
      if (scene.manifest.views.at(ref).depth) err = median_abs_error(r.depth, load_depth(scene.manifest, ref));
      csv << ref << ',' << num(hyps.front()) << ',' << num(hyps.back()) << ',' << hyps.size() << ',' << num(conf)
          << ',' << (std::isnan(err) ? std::string() : num(err)) << '\n';
    }
  };
  return c;
}

// ---------------------------------------------------------------- warp

Command warp_command(CLI::App& root) {
  auto c = make(root, "warp", "Warp source views onto a reference with a depth map");
  struct Args {
    std::string scene, depth;
    int ref = 0;
    std::vector<int> sources;
    bool gta = false;
  };
  auto o = std::make_shared<Args>();
  auto& a = *c.app;
  add_scene_options(a, o->scene, o->gta);
  a.add_option("--ref", o->ref, "Reference view id")->capture_default_str();
  a.add_option("--src", o->sources, "Source view ids (default: pair file)");
  a.add_option("--depth", o->depth, "Reference depth PFM (default: the scene's ground truth)");
  c.exec = [o, out = c.out_dir](RunLog&) {
    const LoadedScene scene = load_scene(o->scene, o->gta);
    if (!scene.views.count(o->ref)) throw Error("warp: unknown reference view " + std::to_string(o->ref));
    const DepthMap depth = o->depth.empty() ? load_depth(scene.manifest, o->ref) : read_pfm(o->depth);
    const std::vector<int> ids = o->sources.empty() ? scene.manifest.sources_of(o->ref) : o->sources;
    std::vector<View> sources;
    for (int id : ids) {
      if (!scene.views.count(id)) throw Error("warp: unknown source view " + std::to_string(id));
      sources.push_back(scene.views.at(id));
    }
    const View& ref = scene.views.at(o->ref);
    for (const View& s : sources) {
      const WarpResult w = warp_image(s, ref, depth);
      Image mask(ref.height(), ref.width(), 1);
      for (std::size_t i = 0; i < w.valid.flags.size(); ++i) mask.data()[i] = w.valid.flags[i] ? 1.0 : 0.0;
      write_image(out_path(*out, "warped_" + view_stem(s.id()) + ".png"), w.image);
      write_image(out_path(*out, "mask_" + view_stem(s.id()) + ".png"), mask);
    }
    const PhotometricReport rep = photometric_loss(ref, sources, depth);
    auto csv = open_csv(out_path(*out, "photometric.csv"), "view,loss,valid_pixels");
    for (const auto& v : rep.per_view) csv << v.view_id << ',' << num(v.loss) << ',' << v.valid_pixels << '\n';
    csv << "total," << num(rep.total) << ",\n";
  };
  return c;
}

// ---------------------------------------------------------------- losses

Command losses_command(CLI::App& root) {
  auto c = make(root, "losses", "Evaluate the semi-supervised training objective on depth maps");
  struct Args {
    std::string pred, gt, style_pred, scene;
    int ref = 0;
    double lambda1 = kDefaultLambda1, lambda2 = kDefaultLambda2;
    std::uint64_t aug_seed = 0;
    int depth_count = 0, window = 5;
    double temperature = 1.0;
    bool symmetric = false, gta = false;
  };
  auto o = std::make_shared<Args>();
  auto& a = *c.app;
  a.add_option("--pred", o->pred, "Predicted depth PFM")->required();
  a.add_option("--gt", o->gt, "Ground-truth depth PFM")->required();
  a.add_option("--style-pred", o->style_pred, "Prediction on the style-transferred views (PFM)");
  a.add_option("--scene", o->scene, "Scene directory for the photometric and consistency terms");
  a.add_flag("--gta", o->gta, "Camera files store camera-to-world extrinsics");
  a.add_option("--ref", o->ref, "Reference view id inside --scene")->capture_default_str();
  a.add_option("--lambda1", o->lambda1, "Weight of the consistency term")->capture_default_str();
  a.add_option("--lambda2", o->lambda2, "Weight of the style term")->capture_default_str();
  a.add_option("--aug-seed", o->aug_seed, "Seed of the photometric augmentation")->capture_default_str();
  a.add_option("--depth-count", o->depth_count, "Hypotheses for the consistency volumes")->capture_default_str();
  a.add_option("--window", o->window)->capture_default_str();
  a.add_option("--temperature", o->temperature)->capture_default_str();
  a.add_flag("--symmetric-kl", o->symmetric, "Symmetrized divergence");
  c.exec = [o, out = c.out_dir](RunLog& log) {
    const DepthMap pred = read_pfm(o->pred), gt = read_pfm(o->gt);
    const double sup = supervised_loss(pred, gt);
    double photo = 0.0, consis = 0.0, style = 0.0;
    if (!o->scene.empty()) {
      const LoadedScene scene = load_scene(o->scene, o->gta);
      if (!scene.views.count(o->ref)) throw Error("losses: unknown reference view " + std::to_string(o->ref));
      const View& ref = scene.views.at(o->ref);
      std::vector<View> sources, aug_sources;
      const AugmentationSpec aug = AugmentationSpec::mild(o->aug_seed);
      for (int id : scene.manifest.sources_of(o->ref)) {
        sources.push_back(scene.views.at(id));
        AugmentationSpec s = aug;
        s.seed = aug.seed + static_cast<std::uint64_t>(id) + 1;
        aug_sources.push_back(augment(scene.views.at(id), s));
      }
      photo = photometric_loss(ref, sources, pred).total;
      const auto hyps = hypotheses_for(load_camera(scene.manifest, o->ref), std::nullopt, std::nullopt, o->depth_count);
      const auto pv = cost_to_probability(build_cost_volume(ref, sources, hyps, CostKind::kSSD, o->window), o->temperature);
      const auto pv_aug = cost_to_probability(
          build_cost_volume(augment(ref, aug), aug_sources, hyps, CostKind::kSSD, o->window), o->temperature);
      consis = kl_consistency_loss(pv, pv_aug, o->symmetric ? KlDirection::kSymmetric : KlDirection::kForward);
    } else {
      log.emplace_back("photo", "omitted (no --scene)");
      log.emplace_back("consis", "omitted (no --scene)");
    }
    if (!o->style_pred.empty()) {
      style = style_consistency_loss(read_pfm(o->style_pred), gt);
    } else {
      log.emplace_back("style", "omitted (no --style-pred)");
    }
    const LossReport r = overall_loss(sup, photo, consis, style, o->lambda1, o->lambda2);
    auto csv = open_csv(out_path(*out, "losses.csv"), r.csv_header());
    csv << r.csv_row() << '\n';
  };
  return c;
}

// ---------------------------------------------------------------- wct

Command wct_command(CLI::App& root) {
  auto c = make(root, "wct", "Whitening-coloring style transfer of one image");
  struct Args {
    std::string content, style;
    int levels = 2;
    double blend = 1.0;
  };
  auto o = std::make_shared<Args>();
  auto& a = *c.app;
  a.add_option("--content", o->content, "Content image")->required();
  a.add_option("--style", o->style, "Style image")->required();
  a.add_option("--levels", o->levels, "Feature pyramid levels")->capture_default_str();
  a.add_option("--blend", o->blend, "Blend between stylized (1) and content (0) features")->capture_default_str();
  c.exec = [o, out = c.out_dir](RunLog&) {
    const Image content = read_image(o->content), style = read_image(o->style);
    if (content.channels() != style.channels()) throw Error("wct: content and style channel counts differ");
    const Image result = transfer_style(content, style, o->levels, o->blend);
    write_image(out_path(*out, "stylized.png"), result);
    const FeatureMap fc = extract_features(content, o->levels), fs_ = extract_features(style, o->levels);
    const FeatureMap fr = extract_features(result, o->levels);
    auto csv = open_csv(out_path(*out, "wct.csv"), "metric,value");
    csv << "content_loss," << num(content_loss(fr, fc)) << '\n';
    csv << "style_loss_before," << num(style_loss(fc, fs_)) << '\n';
    csv << "style_loss_after," << num(style_loss(fr, fs_)) << '\n';
  };
  return c;
}

// ---------------------------------------------------------------- gpm

Command gpm_command(CLI::App& root) {
  auto c = make(root, "gpm", "Geometry-preserving propagation filter (single image or whole scene)");
  struct Args {
    std::string image, guide, scene, style;
    int levels = 2;
    double blend = 1.0, strength = 50.0;
    bool gta = false;
  };
  auto o = std::make_shared<Args>();
  auto& a = *c.app;
  a.add_option("--image", o->image, "Image to filter (single-image mode)");
  a.add_option("--guide", o->guide, "Content guide (single-image mode)");
  a.add_option("--scene", o->scene, "Scene directory (scene mode: stylize every view, then filter)");
  a.add_flag("--gta", o->gta, "Camera files store camera-to-world extrinsics");
  a.add_option("--style", o->style, "Style image (scene mode)");
  a.add_option("--levels", o->levels)->capture_default_str();
  a.add_option("--blend", o->blend)->capture_default_str();
  a.add_option("--strength", o->strength, "Edge sensitivity of the affinities")->capture_default_str();
  c.exec = [o, out = c.out_dir](RunLog& log) {
    auto csv = open_csv(out_path(*out, "gpm.csv"), "metric,value");
    if (o->scene.empty()) {
      if (o->image.empty() || o->guide.empty()) throw Error("gpm: single-image mode needs --image and --guide");
      const Image img = read_image(o->image), guide = read_image(o->guide);
      const Image filtered = gpm_filter(img, guide, o->strength);
      write_image(out_path(*out, "filtered.png"), filtered);
      const auto lo = img.channel_min(), hi = img.channel_max();
      const auto flo = filtered.channel_min(), fhi = filtered.channel_max();
      csv << "input_min," << num(*std::min_element(lo.begin(), lo.end())) << '\n';
      csv << "input_max," << num(*std::max_element(hi.begin(), hi.end())) << '\n';
      csv << "output_min," << num(*std::min_element(flo.begin(), flo.end())) << '\n';
      csv << "output_max," << num(*std::max_element(fhi.begin(), fhi.end())) << '\n';
      return;
    }
    if (o->style.empty()) throw Error("gpm: scene mode needs --style");
    const LoadedScene scene = load_scene(o->scene, o->gta);
    const Image style = read_image(o->style);
    std::vector<View> originals, raw, filtered_views;
    std::vector<Image> filtered;
    fs::create_directories(fs::path(*out) / "raw");
    fs::create_directories(fs::path(*out) / "gpm");
    for (const auto& [id, view] : scene.views) {
      const Image stylized = transfer_style(view.image(), style, o->levels, o->blend);
      const Image f = gpm_filter(stylized, view.image(), o->strength);
      write_image(out_path(*out, "raw/" + view_stem(id) + ".png"), stylized);
      write_image(out_path(*out, "gpm/" + view_stem(id) + ".png"), f);
      originals.push_back(view);
      raw.push_back(view.with_image(stylized));
      filtered_views.push_back(view.with_image(f));
      filtered.push_back(f);
    }
    const int ref_id = originals.front().id();
    if (scene.manifest.views.at(ref_id).depth) {
      const DepthMap depth = load_depth(scene.manifest, ref_id);
      const std::vector<View> raw_src(raw.begin() + 1, raw.end()), gpm_src(filtered_views.begin() + 1, filtered_views.end());
      csv << "photometric_raw," << num(photometric_loss(raw.front(), raw_src, depth).total) << '\n';
      csv << "photometric_gpm," << num(photometric_loss(filtered_views.front(), gpm_src, depth).total) << '\n';
    } else {
      log.emplace_back("photometric", "omitted (reference has no depth map)");
    }
    SparseCorrespondences sparse;
    const fs::path sparse_path = fs::path(o->scene) / "sparse.txt";
    if (fs::exists(sparse_path)) sparse = read_sparse(sparse_path.string());
    const SpnLossReport spn = spn_loss(originals, filtered, sparse);
    if (spn.sparse_omitted) {
      std::cerr << "warning: no usable sparse correspondences; sparse term omitted\n";
      log.emplace_back("spn_sparse", "omitted");
    }
    csv << "spn_total," << num(spn.total) << '\n';
    csv << "spn_image," << num(spn.image_term) << '\n';
    csv << "spn_sparse," << num(spn.sparse_term) << '\n';
    csv << "spn_sparse_used," << spn.sparse_used << '\n';
  };
  return c;
}

// ---------------------------------------------------------------- fuse

Command fuse_command(CLI::App& root) {
  auto c = make(root, "fuse", "Fuse per-view depth maps into a point cloud");
  struct Args {
    std::string scene, depths;
    FusionConfig cfg;
    bool gta = false;
  };
  auto o = std::make_shared<Args>();
  auto& a = *c.app;
  add_scene_options(a, o->scene, o->gta);
  a.add_option("--depths", o->depths, "Directory of <view>.pfm depth maps")->required();
  a.add_option("--min-views", o->cfg.min_consistent_views, "Agreeing views, counting the reference")
      ->capture_default_str();
  a.add_option("--rel-depth", o->cfg.max_relative_depth_error, "Relative depth tolerance")->capture_default_str();
  a.add_option("--reproj", o->cfg.max_reprojection_px, "Reprojection tolerance in pixels")->capture_default_str();
  a.add_option("--voxel", o->cfg.voxel_size, "Merge voxel size (0: automatic)")->capture_default_str();
  c.exec = [o, out = c.out_dir](RunLog& log) {
    const LoadedScene scene = load_scene(o->scene, o->gta);
    std::vector<View> views;
    std::vector<DepthMap> depths;
    for (const auto& [id, view] : scene.views) {
      views.push_back(view);
      depths.push_back(read_pfm(out_path(o->depths, view_stem(id) + ".pfm")));
    }
    const FusionResult r = fuse(views, depths, o->cfg);
    write_ply(out_path(*out, "fused.ply"), r.cloud);
    auto csv = open_csv(out_path(*out, "fuse.csv"), "view,survivors");
    for (std::size_t i = 0; i < views.size(); ++i) csv << views[i].id() << ',' << r.survivors_per_view[i] << '\n';
    log.emplace_back("voxel_size", num(r.voxel_size));
    log.emplace_back("points", std::to_string(r.cloud.size()));
  };
  return c;
}

// ---------------------------------------------------------------- eval

Command eval_command(CLI::App& root) {
  auto c = make(root, "eval", "Precision / recall / F-score and DTU metrics of a reconstruction");
  struct Args {
    std::string recon, gt, mesh;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    std::vector<double> thresholds;
    double cap = kDefaultOutlierCap;
    int bins = 50;
  };
  auto o = std::make_shared<Args>();
  auto& a = *c.app;
  a.add_option("--recon", o->recon, "Reconstructed PLY")->required();
  auto* gt = a.add_option("--gt", o->gt, "Ground-truth PLY");
  auto* mesh = a.add_option("--mesh", o->mesh, "Ground-truth OBJ mesh, sampled uniformly");
  gt->excludes(mesh);
  a.add_option("--samples", o->samples, "Mesh samples")->capture_default_str();
  a.add_option("--seed", o->seed, "Mesh sampling seed")->capture_default_str();
  a.add_option("-d,--threshold", o->thresholds, "Distance thresholds")->required();
  a.add_option("--outlier-cap", o->cap, "Distance cap of the DTU means")->capture_default_str();
  a.add_option("--bins", o->bins, "Histogram bins")->capture_default_str();
  c.exec = [o, out = c.out_dir](RunLog& log) {
    if (o->gt.empty() == o->mesh.empty()) throw Error("eval: give exactly one of --gt and --mesh");
    const PointCloud recon = read_ply(o->recon);
    const PointCloud gt = o->gt.empty() ? sample_mesh(read_obj(o->mesh), o->samples, o->seed) : read_ply(o->gt);
    const auto reports = evaluate(recon, gt, o->thresholds);
    const DtuMetrics dtu = dtu_metrics(reports.front().recon_to_gt, reports.front().gt_to_recon, o->cap);
    write_eval_csv(out_path(*out, "eval.csv"), reports, dtu);
    const double range = 5.0 * *std::max_element(o->thresholds.begin(), o->thresholds.end());
    write_distance_histogram(out_path(*out, "histogram.csv"), reports.front(), o->bins, range);
    log.emplace_back("recon_points", std::to_string(recon.size()));
    log.emplace_back("gt_points", std::to_string(gt.size()));
  };
  return c;
}

// ---------------------------------------------------------------- mmd

Command mmd_command(CLI::App& root) {
  auto c = make(root, "mmd", "Scene-to-scene distribution gap (MMD confusion matrix)");
  struct Args {
    std::vector<std::string> embeddings, scenes;
    std::string bandwidth = "median";
  };
  auto o = std::make_shared<Args>();
  auto& a = *c.app;
  a.add_option("--embeddings", o->embeddings, "FMAP embedding files, one per scene");
  a.add_option("--scenes", o->scenes, "Scene directories embedded with the built-in descriptor");
  a.add_option("--bandwidth", o->bandwidth, "Kernel bandwidth or 'median'")->capture_default_str();
  c.exec = [o, out = c.out_dir](RunLog& log) {
    std::vector<EmbeddingSet> sets;
    for (const auto& p : o->embeddings) sets.push_back(read_embeddings(p, fs::path(p).stem().string()));
    for (const auto& dir : o->scenes) {
      const SceneManifest m = load_manifest(dir);
      EmbeddingSet s;
      s.scene_id = m.scene_id;
      const auto ids = m.view_ids();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const Eigen::VectorXd e = embed_view(read_image(m.views.at(ids[i]).image));
        if (i == 0) s.vectors.resize(static_cast<Eigen::Index>(ids.size()), e.size());
        s.vectors.row(static_cast<Eigen::Index>(i)) = e.transpose();
      }
      sets.push_back(std::move(s));
    }
    if (sets.size() < 2) throw Error("mmd: at least two scenes are required");
    Bandwidth bw;
    if (o->bandwidth != "median") {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(o->bandwidth, &used);
      } catch (...) {
        used = 0;
      }
      if (used != o->bandwidth.size()) throw Error("mmd: bandwidth must be a number or 'median'");
      bw = v;
    } else {
      std::vector<const EmbeddingSet*> ptrs;
      for (const auto& s : sets) ptrs.push_back(&s);
      bw = median_bandwidth(ptrs);
    }
    log.emplace_back("bandwidth", num(*bw));
    const Eigen::MatrixXd m = confusion_matrix(sets, bw);
    std::string header = "scene";
    for (const auto& s : sets) header += "," + s.scene_id;
    auto mat = open_csv(out_path(*out, "mmd_matrix.csv"), header);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      mat << sets[i].scene_id;
      for (Eigen::Index j = 0; j < m.cols(); ++j) mat << ',' << num(m(i, j));
      mat << '\n';
    }
    auto pairs = open_csv(out_path(*out, "mmd_pairs.csv"), "scene_a,scene_b,mmd2");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
        pairs << sets[i].scene_id << ',' << sets[j].scene_id << ',' << num(m(i, j)) << '\n';
      }
    }
  };
  return c;
}

// ---------------------------------------------------------------- split

Command split_command(CLI::App& root) {
  auto c = make(root, "split", "Labeled / unlabeled split of a scene list");
  struct Args {
    std::string list, mode = "by_views";
    SplitSpec spec;
  };
  auto o = std::make_shared<Args>();
  auto& a = *c.app;
  a.add_option("--scene-list", o->list, "Text file of 'scene_id view_count' lines")->required();
  a.add_option("--mode", o->mode, "by_views or by_scenes")->capture_default_str();
  a.add_option("--ratio", o->spec.ratio, "Labeled fraction mu")->capture_default_str();
  a.add_option("--seed", o->spec.seed)->capture_default_str();
  a.add_flag("--stratified", o->spec.stratified, "by_views: draw the fraction inside every scene");
  c.exec = [o, out = c.out_dir](RunLog& log) {
    SplitSpec spec = o->spec;
    if (o->mode == "by_views") {
      spec.mode = SplitMode::kByViews;
    } else if (o->mode == "by_scenes") {
      spec.mode = SplitMode::kByScenes;
    } else {
      throw Error("split: mode must be by_views or by_scenes");
    }
    const Split s = make_split(read_scene_list(o->list), spec);
    write_split_list(out_path(*out, "labeled.txt"), s.labeled);
    write_split_list(out_path(*out, "unlabeled.txt"), s.unlabeled);
    log.emplace_back("labeled", std::to_string(s.labeled.size()));
    log.emplace_back("unlabeled", std::to_string(s.unlabeled.size()));
  };
  return c;
}

}  // namespace

std::vector<Command> register_commands(CLI::App& root) {
  return {synth_command(root), sweep_command(root), warp_command(root), losses_command(root),
          wct_command(root),   gpm_command(root),   fuse_command(root), eval_command(root),
          mmd_command(root),   split_command(root)};
}

}  // namespace mvskit::cli
