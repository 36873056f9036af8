/*
 * Copyright 2026 The wmlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Cross-model source attribution: features, multinomial logistic regression,
// and F1 bookkeeping.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wmlab/common.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/ngram.hpp"
#include "wmlab/random.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

inline constexpr std::size_t kDefaultHistogramSize = 512;

struct RegisteredScheme {
  std::string name;
  SchemeConfig scheme;
};

// What a feature vector is computed against. Layout, in order:
//   hist:<token>     relative frequency of each of the `histogram_size` most
//                    frequent vocabulary tokens (ids 2, 3, ...)
//   log_ppl:<model>  log perplexity of the text under each model
//   z:<scheme>       detector score under each registered scheme (omitted
//                    when scheme features are disabled)
//   rank:<model>     mean rank of the observed token under each model
struct FeatureRegistry {
  std::vector<std::shared_ptr<const NGramModel>> models;
  std::vector<RegisteredScheme> schemes;
  std::shared_ptr<const SynonymTable> synonyms;
  std::size_t histogram_size = kDefaultHistogramSize;
  bool scheme_features = true;

  std::vector<std::string> layout() const {
    require(!models.empty(), ErrorCode::kInvalidParameter, "feature registry has no models");
    const Vocabulary& vocab = models.front()->vocab();
    std::vector<std::string> names;
    for (std::size_t i = 0; i < histogram_size; ++i) {
      const std::size_t id = i + 2;
      names.push_back("hist:" + (id < vocab.size() ? vocab.lookup(static_cast<TokenId>(id))
                                                   : std::string("<none>")));
    }
    for (const auto& m : models) names.push_back("log_ppl:" + m->model_id());
    if (scheme_features) {
      for (const auto& s : schemes) names.push_back("z:" + s.name);
    }
    for (const auto& m : models) names.push_back("rank:" + m->model_id());
    return names;
  }
};

// Holds per-scheme detectors so partition caches persist across texts.
// Not thread-safe; use one extractor per thread.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureRegistry registry) : registry_(std::move(registry)) {
    require(!registry_.models.empty(), ErrorCode::kInvalidParameter,
            "feature registry has no models");
    const std::size_t v = registry_.models.front()->vocab_size();
    for (const auto& m : registry_.models) {
      require(m->vocab_size() == v, ErrorCode::kInvalidParameter,
              "registered models must share a vocabulary");
    }
    if (registry_.scheme_features) {
      for (const auto& s : registry_.schemes) {
        detectors_.emplace_back(s.scheme, v, registry_.synonyms);
      }
    }
  }

  const FeatureRegistry& registry() const noexcept { return registry_; }
  std::size_t dimension() const {
    return registry_.histogram_size + 2 * registry_.models.size() +
           (registry_.scheme_features ? registry_.schemes.size() : 0);
  }

  std::vector<double> extract(std::span<const TokenId> text) {
    require(text.size() >= 2, ErrorCode::kInvalidInput,
            "feature extraction needs at least 2 tokens");
    std::vector<double> f;
    f.reserve(dimension());
    const double inv_len = 1.0 / static_cast<double>(text.size());
    std::vector<double> hist(registry_.histogram_size, 0.0);
    for (TokenId id : text) {
      if (id >= 2 && id - 2 < hist.size()) hist[id - 2] += inv_len;
    }
    f.insert(f.end(), hist.begin(), hist.end());
    for (const auto& m : registry_.models) f.push_back(std::log(perplexity(*m, text)));
    for (auto& d : detectors_) f.push_back(d.score(text));
    for (const auto& m : registry_.models) {
      double rank_sum = 0.0;
      for (std::size_t i = 0; i < text.size(); ++i) {
        rank_sum += static_cast<double>(m->rank_of(text.first(i), text[i]));
      }
      f.push_back(rank_sum * inv_len);
    }
    return f;
  }

 private:
  FeatureRegistry registry_;
  std::vector<Detector> detectors_;
};

inline std::vector<double> extract_features(std::span<const TokenId> text,
                                            const FeatureRegistry& registry) {
  FeatureExtractor fx(registry);
  return fx.extract(text);
}

struct LabeledExample {
  std::vector<double> features;
  std::string label;
};

struct TrainOptions {
  std::size_t epochs = 300;
  double learning_rate = 0.5;
  double l2 = 1e-3;
  std::uint64_t rng_seed = 0;
};

// Row-major [classes x dim] weights over standardized features.
struct ClassifierModel {
  std::vector<std::string> class_labels;
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::vector<double> loss_history;

  std::size_t num_classes() const noexcept { return class_labels.size(); }

  std::vector<double> standardize(std::span<const double> x) const {
    require(x.size() == dim, ErrorCode::kInvalidInput, "feature dimension mismatch");
    std::vector<double> z(dim);
    for (std::size_t j = 0; j < dim; ++j) z[j] = (x[j] - feature_mean[j]) / feature_scale[j];
    return z;
  }

  std::vector<double> logits(std::span<const double> x) const {
    const auto z = standardize(x);
    std::vector<double> out(num_classes());
    for (std::size_t c = 0; c < out.size(); ++c) {
      double s = bias[c];
      const double* w = &weights[c * dim];
      for (std::size_t j = 0; j < dim; ++j) s += w[j] * z[j];
      out[c] = s;
    }
    return out;
  }

  // Lowest class index wins ties.
  std::size_t predict_index(std::span<const double> x) const {
    const auto l = logits(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < l.size(); ++c) {
      if (l[c] > l[best]) best = c;
    }
    return best;
  }

  const std::string& predict(std::span<const double> x) const {
    return class_labels[predict_index(x)];
  }

  bool operator==(const ClassifierModel&) const = default;
};

// Mean cross-entropy plus (l2 / 2) ||W||^2 over standardized inputs `xs`
// (row-major [n x dim]); fills the gradient w.r.t. weights and bias.
inline double softmax_loss_and_gradient(std::span<const double> weights,
                                        std::span<const double> bias,
                                        std::span<const double> xs,
                                        std::span<const std::size_t> ys, std::size_t dim,
                                        double l2, std::vector<double>* grad_w,
                                        std::vector<double>* grad_b) {
  const std::size_t classes = bias.size();
  const std::size_t n = ys.size();
  if (grad_w) grad_w->assign(weights.size(), 0.0);
  if (grad_b) grad_b->assign(classes, 0.0);
  std::vector<double> logit(classes);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = &xs[i * dim];
    for (std::size_t c = 0; c < classes; ++c) {
      double s = bias[c];
      const double* w = &weights[c * dim];
      for (std::size_t j = 0; j < dim; ++j) s += w[j] * x[j];
      logit[c] = s;
    }
    const double mx = *std::max_element(logit.begin(), logit.end());
    double total = 0.0;
    for (double& l : logit) total += l = std::exp(l - mx);
    loss -= std::log(logit[ys[i]] / total);
    if (!grad_w) continue;
    for (std::size_t c = 0; c < classes; ++c) {
      const double r = logit[c] / total - (c == ys[i] ? 1.0 : 0.0);
      (*grad_b)[c] += r;
      double* g = &(*grad_w)[c * dim];
      for (std::size_t j = 0; j < dim; ++j) g[j] += r * x[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  loss = loss * inv_n + 0.5 * l2 * reg;
  if (grad_w) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      (*grad_w)[k] = (*grad_w)[k] * inv_n + l2 * weights[k];
    }
    for (double& g : *grad_b) g *= inv_n;
  }
  return loss;
}

// Multinomial logistic regression by full-batch gradient descent. A step that
// would raise the loss is rejected and the learning rate halved, so the
// recorded loss never increases.
inline ClassifierModel train_classifier(std::span<const LabeledExample> dataset,
                                        const TrainOptions& opts = {}) {
  require(!dataset.empty(), ErrorCode::kInvalidDataset, "empty training set");
  std::map<std::string, std::size_t> support;
  for (const auto& ex : dataset) ++support[ex.label];
  require(support.size() >= 2, ErrorCode::kInvalidDataset,
          "training set has a single class '" + dataset.front().label + "'");
  for (const auto& [label, n] : support) {
    require(n >= 10, ErrorCode::kInvalidDataset,
            "class '" + label + "' has " + std::to_string(n) + " examples, need >= 10");
  }
  require(opts.learning_rate > 0.0 && opts.l2 >= 0.0, ErrorCode::kInvalidParameter,
          "learning rate must be positive and l2 non-negative");

  ClassifierModel model;
  for (const auto& entry : support) model.class_labels.push_back(entry.first);
  model.dim = dataset.front().features.size();
  const std::size_t dim = model.dim;
  const std::size_t n = dataset.size();
  const std::size_t classes = model.class_labels.size();

  model.feature_mean.assign(dim, 0.0);
  model.feature_scale.assign(dim, 0.0);
  for (const auto& ex : dataset) {
    require(ex.features.size() == dim, ErrorCode::kInvalidDataset, "ragged feature vectors");
    for (std::size_t j = 0; j < dim; ++j) {
      require(std::isfinite(ex.features[j]), ErrorCode::kInvalidDataset, "non-finite feature");
      model.feature_mean[j] += ex.features[j];
    }
  }
  for (double& m : model.feature_mean) m /= static_cast<double>(n);
  for (const auto& ex : dataset) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = ex.features[j] - model.feature_mean[j];
      model.feature_scale[j] += d * d;
    }
  }
  for (double& s : model.feature_scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }

  std::vector<double> xs(n * dim);
  std::vector<std::size_t> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = model.standardize(dataset[i].features);
    std::copy(z.begin(), z.end(), xs.begin() + static_cast<std::ptrdiff_t>(i * dim));
    ys[i] = static_cast<std::size_t>(support.find(dataset[i].label) == support.end()
                                         ? 0
                                         : std::distance(support.begin(),
                                                         support.find(dataset[i].label)));
  }

  Rng rng(opts.rng_seed);
  model.weights.resize(classes * dim);
  for (double& w : model.weights) w = (rng.uniform() - 0.5) * 0.02;
  model.bias.assign(classes, 0.0);

  std::vector<double> gw, gb, cand_gw, cand_gb;
  double loss = softmax_loss_and_gradient(model.weights, model.bias, xs, ys, dim, opts.l2, &gw, &gb);
  model.loss_history.push_back(loss);
  double lr = opts.learning_rate;
  std::vector<double> cand_w(model.weights.size()), cand_b(classes);
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      for (std::size_t k = 0; k < cand_w.size(); ++k) cand_w[k] = model.weights[k] - lr * gw[k];
      for (std::size_t c = 0; c < classes; ++c) cand_b[c] = model.bias[c] - lr * gb[c];
      const double cand_loss =
          softmax_loss_and_gradient(cand_w, cand_b, xs, ys, dim, opts.l2, &cand_gw, &cand_gb);
      if (cand_loss <= loss) {
        model.weights.swap(cand_w);
        model.bias.swap(cand_b);
        gw.swap(cand_gw);
        gb.swap(cand_gb);
        loss = cand_loss;
        accepted = true;
      } else {
        lr *= 0.5;
      }
    }
    model.loss_history.push_back(loss);
    if (!accepted) break;
  }
  return model;
}

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalMetrics {
  std::vector<ClassMetrics> per_class;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  // confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;

  const ClassMetrics& for_label(const std::string& label) const {
    for (const auto& c : per_class) {
      if (c.label == label) return c;
    }
    fail(ErrorCode::kInvalidInput, "no metrics for class '" + label + "'");
  }
};

inline double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

inline EvalMetrics metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion,
                                          const std::vector<std::string>& labels) {
  const std::size_t k = labels.size();
  require(confusion.size() == k, ErrorCode::kInvalidInput, "confusion matrix shape mismatch");
  EvalMetrics m;
  m.confusion = confusion;
  std::size_t correct = 0, total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    require(confusion[c].size() == k, ErrorCode::kInvalidInput, "confusion matrix not square");
    std::size_t tp = confusion[c][c], fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += confusion[o][c];
      fn += confusion[c][o];
      total += confusion[c][o];
    }
    total += tp;
    correct += tp;
    ClassMetrics cm;
    cm.label = labels[c];
    cm.support = tp + fn;
    cm.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    cm.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    cm.f1 = f1_score(cm.precision, cm.recall);
    m.macro_f1 += cm.f1;
    m.per_class.push_back(cm);
  }
  m.macro_f1 = k ? m.macro_f1 / static_cast<double>(k) : 0.0;
  m.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return m;
}

inline EvalMetrics evaluate(const ClassifierModel& model, std::span<const LabeledExample> test) {
  require(!test.empty(), ErrorCode::kInvalidInput, "empty test set");
  const std::size_t k = model.num_classes();
  std::vector<std::vector<std::size_t>> confusion(k, std::vector<std::size_t>(k, 0));
  for (const auto& ex : test) {
    const auto it = std::find(model.class_labels.begin(), model.class_labels.end(), ex.label);
    require(it != model.class_labels.end(), ErrorCode::kInvalidInput,
            "unknown label '" + ex.label + "'");
    const auto truth = static_cast<std::size_t>(it - model.class_labels.begin());
    ++confusion[truth][model.predict_index(ex.features)];
  }
  return metrics_from_confusion(confusion, model.class_labels);
}

// Relative F1 change (F1_wm - F1_nw) / F1_nw.
inline double f1_change(double f1_wm, double f1_nw) {
  require(f1_nw > 0.0, ErrorCode::kUndefinedBaseline,
          "F1 change is undefined for a zero baseline F1");
  return (f1_wm - f1_nw) / f1_nw;
}

}  // namespace wmlab
