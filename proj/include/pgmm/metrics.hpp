#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pgmm/image.hpp"

namespace pgmm {

/// Best-match accuracy over injective maps from predicted to true labels.
double accuracy(std::span<const int> truth, std::span<const int> pred);

/// Adjusted mutual information, arithmetic-mean normalization, natural log.
double adjusted_mutual_information(std::span<const int> truth, std::span<const int> pred);

struct HomogeneityCompleteness {
  double h = 1.0;
  double c = 1.0;
};
/// h = 1 - H(C|K)/H(C), c = 1 - H(K|C)/H(K).
HomogeneityCompleteness homogeneity_completeness(std::span<const int> truth, std::span<const int> pred);

struct Pose {
  double alpha = 0.0;
  Vec2 t;
};

struct AlignmentErrors {
  double ae2 = 0.0;
  double te2 = 0.0;
  long long n_pairs = 0;  ///< ordered pairs (i != j) assigned jointly by both clusterings
};

/// RMS relative rotation / translation mismatch over jointly assigned pairs.
AlignmentErrors relative_alignment_errors(std::span<const Pose> truth_poses,
                                          std::span<const Pose> pred_poses,
                                          std::span<const int> truth, std::span<const int> pred);

struct MetricReport {
  double acc = 0.0, ami = 0.0, h = 0.0, c = 0.0;
  std::optional<double> ae2, te2;  ///< te2 empty when no translation was predicted
  long long n_pairs = 0;
};

MetricReport evaluate(std::span<const int> truth, std::span<const int> pred,
                      std::span<const Pose> truth_poses, std::span<const Pose> pred_poses,
                      bool translation_predicted);

/// "NAME\tvalue" lines with 9 significant digits; missing values print as NA.
void write_report(std::ostream& os, const MetricReport& r);
std::string format_metric(const std::string& name, double value);

}  // namespace pgmm
