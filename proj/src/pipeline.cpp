#include "pgmm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "csv.hpp"
#include "pgmm/random.hpp"

namespace pgmm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
  try {
    return detail::parse_field<T>(value, "config key '" + key + "'");
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw UsageError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "radius_ratio") radius_ratio = parse_value<double>(key, value);
  else if (key == "truncation") truncation = parse_value<double>(key, value);
  else if (key == "m") m = parse_value<int>(key, value);
  else if (key == "C") C = parse_value<int>(key, value);
  else if (key == "B") B = parse_value<int>(key, value);
  else if (key == "n_alpha") n_alpha = parse_value<int>(key, value);
  else if (key == "n_r") n_r = parse_value<int>(key, value);
  else if (key == "max_shift" || key == "R") max_shift = parse_value<double>(key, value);
  else if (key == "n_citer") n_citer = parse_value<int>(key, value);
  else if (key == "n_iter") n_iter = parse_value<int>(key, value);
  else if (key == "seed") seed = parse_value<std::uint64_t>(key, value);
  else if (key == "enable_translation") enable_translation = parse_bool(key, value);
  else if (key == "no_center") no_center = parse_bool(key, value);
  else if (key == "freeze_align") freeze_align = parse_bool(key, value);
  else throw UsageError("unknown config key '" + key + "'");
}

void PipelineConfig::validate() const {
  if (!(radius_ratio > 0.0 && radius_ratio <= 1.0)) throw UsageError("radius_ratio must lie in (0, 1]");
  if (!(truncation > 0.0)) throw UsageError("truncation must be positive");
  if (m < 1 || C < 1 || B < 1 || n_alpha < 1 || n_r < 0 || n_citer < 1 || n_iter < 0)
    throw UsageError("m, C, B, n_alpha, n_citer must be >= 1; n_r, n_iter >= 0");
  if (!(max_shift >= 0.0)) throw UsageError("max_shift must be >= 0");
}

void set_dataset_key(DatasetSpec& spec, const std::string& key, const std::string& value) {
  if (key == "L") spec.L = parse_value<int>(key, value);
  else if (key == "n_clusters") spec.n_clusters = parse_value<int>(key, value);
  else if (key == "per_cluster") spec.per_cluster = parse_value<int>(key, value);
  else if (key == "snr") spec.snr = parse_value<double>(key, value);
  else if (key == "max_shift") spec.max_shift = parse_value<double>(key, value);
  else if (key == "seed") spec.seed = parse_value<std::uint64_t>(key, value);
  else if (key == "radius_ratio") spec.radius_ratio = parse_value<double>(key, value);
  else if (key == "template_kind") {
    try {
      spec.template_kind = parse_template_kind(value);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

Pose image_pose(const PoseEstimate& pose, Vec2 centering_shift) {
  return {wrap_angle(-pose.alpha), centering_shift - pose.t};
}

std::vector<int> batch_indices(int n, int B, std::uint64_t seed, int iteration) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (B >= n) return idx;
  std::mt19937_64 rng = make_stream(stream_seed(seed, 0xba7c4ULL), static_cast<std::uint64_t>(iteration));
  for (int i = 0; i < B; ++i) {
    const int j = i + static_cast<int>(uniform01(rng) * (n - i));
    std::swap(idx[i], idx[std::min(j, n - 1)]);
  }
  idx.resize(B);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

std::vector<PolarCoeff> aligned_samples(const Eigen::MatrixXcd& z, const std::vector<PoseEstimate>& poses,
                                        std::span<const CachedTranslation> caches,
                                        std::span<const int> omega) {
  std::vector<PolarCoeff> out(poses.size());
  const int m = static_cast<int>(z.rows());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < static_cast<int>(poses.size()); ++i) {
    std::vector<Complex> col(z.col(i).data(), z.col(i).data() + m);
    out[i] = apply_pose(col, poses[i], caches, omega);
  }
  return out;
}

Eigen::MatrixXcd select_columns(const Eigen::MatrixXcd& z, const std::vector<int>& idx) {
  Eigen::MatrixXcd out(z.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) out.col(a) = z.col(idx[a]);
  return out;
}

std::vector<PoseEstimate> identity_poses(const Eigen::MatrixXcd& z, const MixtureParams& theta,
                                         std::span<const int> omega) {
  // Scores and cluster hints for the unaligned samples.
  const RotationGrid none = make_rotation_grid_at(1, 0.0);
  return align_batch(z, theta, none, {}, omega);
}

ImageStack class_averages(const ImageStack& images, const std::vector<int>& labels,
                          const std::vector<Pose>& poses, int C) {
  const int n = static_cast<int>(images.size());
  std::vector<Image> warped(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) warped[i] = unwarp_pose(images[i], poses[i].alpha, poses[i].t);
  ImageStack out(C, Image(images.front().side()));
  std::vector<int> counts(C, 0);
  for (int i = 0; i < n; ++i) {
    Image& acc = out[labels[i]];
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += warped[i][p];
    ++counts[labels[i]];
  }
  for (int c = 0; c < C; ++c)
    if (counts[c] > 0)
      for (double& v : out[c].vec()) v /= counts[c];
  return out;
}

}  // namespace

RunResult classify(const ImageStack& images, const PipelineConfig& cfg, std::ostream* trace) {
  cfg.validate();
  if (images.empty()) throw Error("classify: empty stack");
  const int n = static_cast<int>(images.size());
  const int L = images.front().side();
  for (const auto& im : images)
    if (im.side() != L) throw Error("classify: images differ in size");
  if (cfg.C > n) throw Error("classify: C = " + std::to_string(cfg.C) + " exceeds the number of images");

  RunResult res;
  ImageStack centered;
  if (cfg.centering_enabled()) {
    CenteredStack cs = center_stack(images, cfg.n_citer);
    centered = std::move(cs.images);
    res.centering_shifts = std::move(cs.shifts);
  } else {
    centered = images;
    res.centering_shifts.assign(n, Vec2{});
  }

  BandLimitSpec spec;
  spec.image_side = L;
  spec.radius_ratio = cfg.radius_ratio;
  spec.truncation = cfg.truncation;
  res.model = fit(centered, spec, cfg.m);
  const FbModel& model = res.model;
  const Eigen::MatrixXcd z = encode_stack(model, centered);
  centered.clear();
  centered.shrink_to_fit();

  std::vector<CachedTranslation> caches;
  if (cfg.enable_translation) caches = build_caches(model, make_translation_grid(cfg.max_shift, cfg.n_r));

  std::vector<PolarCoeff> unaligned(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Complex> col(z.col(i).data(), z.col(i).data() + model.m());
    unaligned[i] = PolarCoeff::from_complex(col);
  }
  MixtureParams theta = init_kmeanspp(unaligned, cfg.C, cfg.seed);

  for (int it = 0; it < cfg.n_iter; ++it) {
    const std::vector<int> batch = batch_indices(n, cfg.B, cfg.seed, it);
    const Eigen::MatrixXcd zb = select_columns(z, batch);
    std::vector<PoseEstimate> poses;
    if (cfg.freeze_align) {
      poses.assign(batch.size(), PoseEstimate{});
    } else {
      const RotationGrid rot = iteration_rotation_grid(cfg.n_alpha, cfg.seed, it);
      poses = align_batch(zb, theta, rot, caches, model.omega);
    }
    const std::vector<PolarCoeff> aligned = aligned_samples(zb, poses, caches, model.omega);
    std::vector<double> ll;
    theta = fit_batch(aligned, theta, 1, &ll);
    res.trace.push_back(ll.back());
    if (trace) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "ITER\t%d\tLOGLIK\t%.17g\n", it, ll.back());
      *trace << buf << std::flush;
    }
  }

  std::vector<PoseEstimate> final_poses;
  if (cfg.freeze_align) {
    final_poses = identity_poses(z, theta, model.omega);
  } else {
    const RotationGrid rot = iteration_rotation_grid(cfg.n_alpha, cfg.seed, cfg.n_iter);
    final_poses = align_batch(z, theta, rot, caches, model.omega);
  }
  res.theta = theta;
  res.labels.resize(n);
  res.poses.resize(n);
  for (int i = 0; i < n; ++i) {
    res.labels[i] = final_poses[i].cluster_hint;
    res.poses[i] = image_pose(final_poses[i], res.centering_shifts[i]);
  }

  res.averages = class_averages(images, res.labels, res.poses, cfg.C);
  if (cfg.enable_translation) {
    // Class means may drift under translation search; re-center each average
    // and fold its offset s into the member poses.
    std::vector<Vec2> drift(cfg.C);
    bool any = false;
    for (int c = 0; c < cfg.C; ++c) {
      if (std::find(res.labels.begin(), res.labels.end(), c) == res.labels.end()) continue;
      const CenterFit f = fit_center(res.averages[c], cfg.n_citer);
      if (f.degenerate) continue;
      drift[c] = f.offset;
      any = true;
    }
    if (any) {
      for (int i = 0; i < n; ++i)
        res.poses[i].t = res.poses[i].t + rotate_vec(drift[res.labels[i]], -res.poses[i].alpha);
      res.averages = class_averages(images, res.labels, res.poses, cfg.C);
    }
  }
  return res;
}

}  // namespace pgmm
