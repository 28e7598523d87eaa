#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "pgmm/aligner.hpp"
#include "pgmm/em_center.hpp"
#include "pgmm/fbspca.hpp"
#include "pgmm/metrics.hpp"
#include "pgmm/polargmm.hpp"
#include "pgmm/simulate.hpp"

namespace pgmm {

/// Bad command-line or configuration input (CLI exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// key=value lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> read_config_file(const std::string& path);

struct PipelineConfig {
  double radius_ratio = 0.6;
  double truncation = 10.0;
  int m = 50;
  int C = 10;
  int B = 5000;
  int n_alpha = 60;
  int n_r = 4;
  double max_shift = 15.0;  ///< translation grid radius R, pixels
  int n_citer = 10;
  int n_iter = 10;
  std::uint64_t seed = 1;
  bool enable_translation = true;
  bool no_center = false;     ///< with enable_translation false: skip EM centering
  bool freeze_align = false;  ///< identity poses throughout (diagnostic)

  /// Applies one config key; throws UsageError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  bool centering_enabled() const { return enable_translation && !no_center; }
};

/// Applies a simulate-subcommand config key to a dataset spec.
void set_dataset_key(DatasetSpec& spec, const std::string& key, const std::string& value);

struct RunResult {
  std::vector<int> labels;
  std::vector<Pose> poses;   ///< image-space poses: input(p) ~ average(R_alpha (p - t))
  ImageStack averages;       ///< exactly C images
  std::vector<Vec2> centering_shifts;
  FbModel model;
  MixtureParams theta;
  std::vector<double> trace;  ///< batch log-likelihood after each outer update
};

/// Centering, steerable basis fit, n_iter rounds of (align batch, one EM
/// update), final full alignment and hard assignment, class averages.
/// When `trace` is set, one line per outer iteration is written to it.
RunResult classify(const ImageStack& images, const PipelineConfig& cfg, std::ostream* trace = nullptr);

/// Converts a coefficient-space pose and the centering shift c into the
/// image-space pose of the raw input.
Pose image_pose(const PoseEstimate& pose, Vec2 centering_shift);

/// Batch of B indices for outer iteration `iteration` (all indices when B >= n), ascending.
std::vector<int> batch_indices(int n, int B, std::uint64_t seed, int iteration);

}  // namespace pgmm
