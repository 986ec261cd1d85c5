#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectraldip/texture.hpp"

namespace spectraldip {

/// Width predictor over texture features. RuleBased thresholds the mean of
/// the upper-half radial PSD bins; Linear is a one-vs-rest linear
/// hinge-loss model over the standardized feature vector.
struct WidthClassifier {
  enum class Mode { RuleBased, Linear };

  Mode mode = Mode::RuleBased;
  std::vector<int> classes = {32, 64, 128};

  // RuleBased: two thresholds on mean log10 power of the upper PSD bins.
  double rule_low = 1.2;
  double rule_high = 2.6;

  // Linear: per-class rows over the standardized features.
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  std::vector<double> feature_mean;
  std::vector<double> feature_std;

  std::string to_json() const;
  static WidthClassifier from_json(const std::string& text);

  /// Per-class decision scores (Linear mode only).
  std::vector<double> scores(const TextureFeatures& f) const;
};

/// Predicted width. Linear mode returns the argmax class with ties broken
/// toward the smaller width; an undefined correlation feature falls back to
/// the rule-based path.
int classify_width(const TextureFeatures& f, const WidthClassifier& model);

struct TrainOptions {
  std::uint64_t seed = 0;
  int epochs = 400;
  double learning_rate = 0.05;
  double l2 = 1e-3;
  int cv_folds = 5;
};

struct TrainedClassifier {
  WidthClassifier model;
  double cv_micro_auc = 0.0;  // 5-fold cross-validated, micro-average
};

/// One-vs-rest linear SVMs fitted by full-batch subgradient descent on the
/// hinge loss with L2 penalty. The dataset is canonically ordered and then
/// shuffled with the seed, so permuting the input order does not change the
/// result.
TrainedClassifier train_width_classifier(
    const std::vector<std::pair<TextureFeatures, int>>& dataset,
    const TrainOptions& opts = {});

/// Micro-average AUC over pooled one-vs-rest scores.
double micro_average_auc(const std::vector<std::vector<double>>& scores,
                         const std::vector<int>& label_index, int n_classes);

}  // namespace spectraldip
