#include "spectraldip/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace spectraldip {

using nlohmann::json;

std::string WidthClassifier::to_json() const {
  json j;
  j["version"] = 1;
  j["mode"] = mode == Mode::RuleBased ? "rule_based" : "linear";
  j["classes"] = classes;
  j["rule_low"] = rule_low;
  j["rule_high"] = rule_high;
  if (mode == Mode::Linear) {
    j["weights"] = weights;
    j["bias"] = bias;
    j["feature_mean"] = feature_mean;
    j["feature_std"] = feature_std;
  }
  return j.dump(2);
}

WidthClassifier WidthClassifier::from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("version").get<int>() != 1)
    throw std::invalid_argument("classifier: unsupported version");
  WidthClassifier m;
  m.mode = j.at("mode").get<std::string>() == "linear" ? Mode::Linear : Mode::RuleBased;
  m.classes = j.at("classes").get<std::vector<int>>();
  m.rule_low = j.value("rule_low", m.rule_low);
  m.rule_high = j.value("rule_high", m.rule_high);
  if (m.mode == Mode::Linear) {
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.bias = j.at("bias").get<std::vector<double>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_std = j.at("feature_std").get<std::vector<double>>();
  }
  return m;
}

namespace {

double upper_psd_mean(const TextureFeatures& f) {
  const std::size_t n = f.radial_psd.size();
  if (n == 0) throw std::invalid_argument("classify_width: empty radial_psd");
  double s = 0.0;
  std::size_t c = 0;
  for (std::size_t i = n / 2; i < n; ++i) {
    s += f.radial_psd[i];
    ++c;
  }
  return s / static_cast<double>(c);
}

std::vector<double> standardize(const std::vector<double>& x,
                                const std::vector<double>& mean,
                                const std::vector<double>& sd) {
  if (x.size() != mean.size())
    throw std::invalid_argument("classifier: feature dimensionality mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = (x[i] - mean[i]) / (sd[i] > 1e-12 ? sd[i] : 1.0);
  return out;
}

}  // namespace

std::vector<double> WidthClassifier::scores(const TextureFeatures& f) const {
  const std::vector<double> z = standardize(f.flatten(), feature_mean, feature_std);
  std::vector<double> s(classes.size(), 0.0);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    double acc = bias[c];
    for (std::size_t i = 0; i < z.size(); ++i) acc += weights[c][i] * z[i];
    s[c] = acc;
  }
  return s;
}

int classify_width(const TextureFeatures& f, const WidthClassifier& model) {
  if (model.mode == WidthClassifier::Mode::Linear && f.glcm_correlation_0) {
    const std::vector<double> s = model.scores(f);
    std::size_t best = 0;
    for (std::size_t c = 1; c < s.size(); ++c)
      if (s[c] > s[best]) best = c;  // ties keep the smaller width
    return model.classes[best];
  }
  // Rule-based: threshold the mean of the upper-half PSD bins.
  const double m = upper_psd_mean(f);
  if (m < model.rule_low) return model.classes[0];
  if (m < model.rule_high) return model.classes[1];
  return model.classes[2];
}

namespace {

struct Standardizer {
  std::vector<double> mean, sd;
  void fit(const std::vector<std::vector<double>>& xs) {
    const std::size_t d = xs[0].size();
    mean.assign(d, 0.0);
    sd.assign(d, 0.0);
    for (const auto& x : xs)
      for (std::size_t i = 0; i < d; ++i) mean[i] += x[i];
    for (std::size_t i = 0; i < d; ++i) mean[i] /= static_cast<double>(xs.size());
    for (const auto& x : xs)
      for (std::size_t i = 0; i < d; ++i) {
        const double v = x[i] - mean[i];
        sd[i] += v * v;
      }
    for (std::size_t i = 0; i < d; ++i)
      sd[i] = std::sqrt(sd[i] / static_cast<double>(xs.size()));
  }
};

struct LinearFit {
  std::vector<std::vector<double>> w;
  std::vector<double> b;
};

// One-vs-rest hinge loss, full-batch subgradient descent.
LinearFit fit_linear(const std::vector<std::vector<double>>& xs,
                     const std::vector<int>& yidx, int n_classes,
                     const TrainOptions& opts) {
  const std::size_t d = xs[0].size();
  LinearFit fit;
  fit.w.assign(static_cast<std::size_t>(n_classes), std::vector<double>(d, 0.0));
  fit.b.assign(static_cast<std::size_t>(n_classes), 0.0);

  for (int c = 0; c < n_classes; ++c) {
    auto& w = fit.w[static_cast<std::size_t>(c)];
    double& b = fit.b[static_cast<std::size_t>(c)];
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      std::vector<double> gw(d, 0.0);
      double gb = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y = yidx[i] == c ? 1.0 : -1.0;
        double margin = b;
        for (std::size_t k = 0; k < d; ++k) margin += w[k] * xs[i][k];
        if (y * margin < 1.0) {
          for (std::size_t k = 0; k < d; ++k) gw[k] -= y * xs[i][k];
          gb -= y;
        }
      }
      const double inv_n = 1.0 / static_cast<double>(xs.size());
      for (std::size_t k = 0; k < d; ++k)
        w[k] -= opts.learning_rate * (gw[k] * inv_n + opts.l2 * w[k]);
      b -= opts.learning_rate * gb * inv_n;
    }
  }
  return fit;
}

}  // namespace

double micro_average_auc(const std::vector<std::vector<double>>& scores,
                         const std::vector<int>& label_index, int n_classes) {
  // Pool all (score, is_positive) pairs across classes, then the
  // Mann-Whitney rank statistic.
  std::vector<std::pair<double, int>> pool;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (int c = 0; c < n_classes; ++c)
      pool.emplace_back(scores[i][static_cast<std::size_t>(c)],
                        label_index[i] == c ? 1 : 0);

  std::stable_sort(pool.begin(), pool.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  // Average ranks across ties.
  const std::size_t n = pool.size();
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pool[j + 1].first == pool[i].first) ++j;
    const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[k] = r;
    i = j + 1;
  }

  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (pool[k].second == 1) {
      pos_rank_sum += rank[k];
      ++n_pos;
    }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("micro_average_auc: need both classes");
  const double u = pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

TrainedClassifier train_width_classifier(
    const std::vector<std::pair<TextureFeatures, int>>& dataset,
    const TrainOptions& opts) {
  if (dataset.size() < 2)
    throw std::invalid_argument("train_width_classifier: dataset too small");

  const std::vector<int> classes = {32, 64, 128};
  std::vector<std::vector<double>> xs;
  std::vector<int> yidx;
  for (const auto& [f, label] : dataset) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end())
      throw std::invalid_argument("train_width_classifier: label must be 32/64/128");
    xs.push_back(f.flatten());
    yidx.push_back(static_cast<int>(it - classes.begin()));
  }
  {
    std::vector<int> present(yidx.begin(), yidx.end());
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    if (present.size() < 2)
      throw std::invalid_argument("train_width_classifier: need at least 2 classes");
  }

  // Canonical order, then a seeded shuffle: invariant to input permutation.
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (yidx[a] != yidx[b]) return yidx[a] < yidx[b];
    return xs[a] < xs[b];
  });
  std::mt19937_64 rng(opts.seed);
  for (std::size_t k = order.size() - 1; k > 0; --k) {
    const std::size_t j = rng() % (k + 1);
    std::swap(order[k], order[j]);
  }
  std::vector<std::vector<double>> sx;
  std::vector<int> sy;
  for (std::size_t k : order) {
    sx.push_back(xs[k]);
    sy.push_back(yidx[k]);
  }

  // Cross-validated AUC with per-fold standardization and fitting.
  const int folds = std::min<int>(opts.cv_folds, static_cast<int>(sx.size()));
  std::vector<std::vector<double>> cv_scores;
  std::vector<int> cv_labels;
  if (folds >= 2) {
    for (int f = 0; f < folds; ++f) {
      std::vector<std::vector<double>> trx, tex;
      std::vector<int> trl, tel;
      for (std::size_t k = 0; k < sx.size(); ++k) {
        if (static_cast<int>(k % static_cast<std::size_t>(folds)) == f) {
          tex.push_back(sx[k]);
          tel.push_back(sy[k]);
        } else {
          trx.push_back(sx[k]);
          trl.push_back(sy[k]);
        }
      }
      if (trx.empty() || tex.empty()) continue;
      Standardizer st;
      st.fit(trx);
      std::vector<std::vector<double>> trz, tez;
      for (const auto& x : trx) trz.push_back(standardize(x, st.mean, st.sd));
      for (const auto& x : tex) tez.push_back(standardize(x, st.mean, st.sd));
      const LinearFit fit = fit_linear(trz, trl, 3, opts);
      for (std::size_t k = 0; k < tez.size(); ++k) {
        std::vector<double> sc(3, 0.0);
        for (int c = 0; c < 3; ++c) {
          double acc = fit.b[static_cast<std::size_t>(c)];
          for (std::size_t i = 0; i < tez[k].size(); ++i)
            acc += fit.w[static_cast<std::size_t>(c)][i] * tez[k][i];
          sc[static_cast<std::size_t>(c)] = acc;
        }
        cv_scores.push_back(std::move(sc));
        cv_labels.push_back(tel[k]);
      }
    }
  }

  // Final model on all data.
  Standardizer st;
  st.fit(sx);
  std::vector<std::vector<double>> sz;
  for (const auto& x : sx) sz.push_back(standardize(x, st.mean, st.sd));
  const LinearFit fit = fit_linear(sz, sy, 3, opts);

  TrainedClassifier out;
  out.model.mode = WidthClassifier::Mode::Linear;
  out.model.classes = classes;
  out.model.weights = fit.w;
  out.model.bias = fit.b;
  out.model.feature_mean = st.mean;
  out.model.feature_std = st.sd;
  out.cv_micro_auc =
      cv_scores.empty() ? 0.0 : micro_average_auc(cv_scores, cv_labels, 3);
  return out;
}

}  // namespace spectraldip
