#ifndef EVIDEX_TRAINER_HPP
#define EVIDEX_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "evidex/classifier.hpp"
#include "evidex/corpus.hpp"
#include "evidex/crf.hpp"
#include "evidex/features.hpp"

namespace evidex {

enum class Conditioning : std::uint32_t { kNone = 0, kGoldLabel = 1 };

enum class Variant : std::uint32_t {
  kClassifyOnly = 0,
  kExtractOnly = 1,
  kClassifyExtract = 2,            // joint, no label conditioning
  kClassifyExtractPredicted = 3,   // conditioned; decode with predicted label
  kClassifyExtractOracle = 4,      // conditioned; decode with gold label
  kTopkSalience = 5,               // classifier + top-k salience decoding
};

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kClassifyOnly: return "classify_only";
    case Variant::kExtractOnly: return "extract_only";
    case Variant::kClassifyExtract: return "classify_extract";
    case Variant::kClassifyExtractPredicted: return "classify_extract_predicted";
    case Variant::kClassifyExtractOracle: return "classify_extract_oracle";
    case Variant::kTopkSalience: return "topk_salience";
  }
  return "unknown";
}

inline std::optional<Variant> variant_from_name(const std::string& s) {
  for (Variant v : {Variant::kClassifyOnly, Variant::kExtractOnly,
                    Variant::kClassifyExtract, Variant::kClassifyExtractPredicted,
                    Variant::kClassifyExtractOracle, Variant::kTopkSalience})
    if (s == variant_name(v)) return v;
  return std::nullopt;
}

struct TrainConfig {
  double lambda_extract = 1.0;
  double learning_rate = 0.5;
  int epochs = 10;
  int batch_size = 16;
  std::uint64_t seed = 0;
  int patience = 0;  // 0 disables early stopping
  EmissionMode emission_mode = EmissionMode::kSharedEmbeddings;
  Conditioning conditioning = Conditioning::kNone;
  bool class_condition_transitions = false;
  bool include_empty_masks = true;  // all-zero masks assert "no evidence"
  int embedding_dim = 16;
  int min_token_freq = 2;
  double clip_norm = 5.0;
  double l2 = 0.0;  // decoupled weight decay; embeddings and bias exempt
  double embedding_init = 0.1;  // uniform init half-width for embeddings

  void validate() const {
    if (lambda_extract < 0) throw std::runtime_error("lambda_extract < 0");
    if (l2 < 0) throw std::runtime_error("l2 < 0");
    if (embedding_init <= 0) throw std::runtime_error("embedding_init <= 0");
    if (learning_rate <= 0) throw std::runtime_error("learning_rate <= 0");
    if (epochs < 0) throw std::runtime_error("epochs < 0");
    if (batch_size < 1) throw std::runtime_error("batch_size < 1");
    if (patience < 0) throw std::runtime_error("patience < 0");
    if (embedding_dim < 1) throw std::runtime_error("embedding_dim < 1");
    if (clip_norm <= 0) throw std::runtime_error("clip_norm <= 0");
  }
};

inline bool variant_has_classifier(Variant v) {
  return v != Variant::kExtractOnly;
}
inline bool variant_has_crf(Variant v) {
  return v == Variant::kExtractOnly || v == Variant::kClassifyExtract ||
         v == Variant::kClassifyExtractPredicted ||
         v == Variant::kClassifyExtractOracle;
}
inline bool variant_supports_extraction(Variant v) {
  return variant_has_crf(v) || v == Variant::kTopkSalience;
}
/// Conditioned variants train emission blocks per class; the base
/// classify-and-extract variant honours the config flag.
inline Conditioning variant_conditioning(Variant v, const TrainConfig& cfg) {
  switch (v) {
    case Variant::kClassifyExtractPredicted:
    case Variant::kClassifyExtractOracle:
      return Conditioning::kGoldLabel;
    case Variant::kClassifyExtract:
      return cfg.conditioning;
    default:
      return Conditioning::kNone;
  }
}

struct Model {
  static constexpr std::uint32_t kFormatVersion = 1;

  FeatureSpace feature_space;
  ClassifierParams classifier;
  CrfParams crf;
  TrainConfig config;
  Variant variant = Variant::kClassifyExtractPredicted;
  int num_classes = 2;
  double evidence_fraction = 0.1;  // dev-estimated, used by top-k decoding

  bool has_crf() const { return variant_has_crf(variant); }
  bool supports_extraction() const { return variant_supports_extraction(variant); }
};

/// Gradient buffers for one batch. CRF-side gradients are accumulated
/// unscaled; finalize() applies lambda and folds the CRF's shared
/// embedding gradient into the classifier embedding gradient.
struct Gradients {
  ClassifierParams cls;
  CrfParams crf;
  Matrix crf_embeddings;  // CRF contribution to shared embedding table

  static Gradients zeros_like(const Model& m) {
    Gradients g;
    g.cls = ClassifierParams::zeros(m.feature_space.vocab_size(),
                                    m.feature_space.embedding_dim(),
                                    m.num_classes, m.feature_space.num_sparse());
    g.crf = CrfParams::zeros(m.crf.num_blocks, m.crf.num_sparse(),
                             m.feature_space.embedding_dim(),
                             m.crf.condition_transitions);
    g.crf_embeddings = Matrix(m.feature_space.vocab_size(),
                              static_cast<std::size_t>(m.feature_space.embedding_dim()));
    return g;
  }

  void zero() {
    cls.embeddings.fill(0);
    cls.class_weights.fill(0);
    cls.sparse_weights.fill(0);
    std::fill(cls.bias.begin(), cls.bias.end(), 0.0);
    crf.emission.fill(0);
    crf.projection.fill(0);
    crf.salience_w.fill(0);
    crf.transition.fill(0);
    std::fill(crf.start.begin(), crf.start.end(), 0.0);
    crf_embeddings.fill(0);
  }

  void finalize(double lambda) {
    auto scale = [lambda](std::vector<double>& v) {
      for (double& x : v) x *= lambda;
    };
    scale(crf.emission.data());
    scale(crf.projection.data());
    scale(crf.salience_w.data());
    scale(crf.transition.data());
    scale(crf.start);
    scale(crf_embeddings.data());
    axpy(1.0, crf_embeddings.data(), cls.embeddings.data());
    crf_embeddings.fill(0);
  }

  double squared_norm() const {
    auto sq = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x * x;
      return s;
    };
    return sq(cls.embeddings.data()) + sq(cls.class_weights.data()) +
           sq(cls.sparse_weights.data()) + sq(cls.bias) +
           sq(crf.emission.data()) + sq(crf.projection.data()) +
           sq(crf.salience_w.data()) + sq(crf.transition.data()) +
           sq(crf.start);
  }

  /// Rescales the whole gradient so its global norm is at most max_norm.
  void clip(double max_norm) {
    double n = std::sqrt(squared_norm());
    if (n <= max_norm || n == 0.0) return;
    const double f = max_norm / n;
    auto scale = [f](std::vector<double>& v) {
      for (double& x : v) x *= f;
    };
    scale(cls.embeddings.data());
    scale(cls.class_weights.data());
    scale(cls.sparse_weights.data());
    scale(cls.bias);
    scale(crf.emission.data());
    scale(crf.projection.data());
    scale(crf.salience_w.data());
    scale(crf.transition.data());
    scale(crf.start);
  }
};

namespace detail {

inline bool all_zero(const std::vector<std::uint8_t>& mask) {
  for (auto v : mask)
    if (v) return false;
  return true;
}

inline void sgd_step(Model& m, const Gradients& g, double lr, double l2 = 0.0) {
  if (l2 > 0.0) {
    // decoupled weight decay; shared embeddings and class bias exempt
    const double shrink = 1.0 - lr * l2;
    for (Matrix* w : {&m.classifier.class_weights, &m.classifier.sparse_weights,
                      &m.crf.emission, &m.crf.projection, &m.crf.salience_w,
                      &m.crf.transition})
      for (double& v : w->data()) v *= shrink;
    for (double& v : m.crf.start) v *= shrink;
  }
  axpy(-lr, g.cls.embeddings.data(), m.classifier.embeddings.data());
  axpy(-lr, g.cls.class_weights.data(), m.classifier.class_weights.data());
  axpy(-lr, g.cls.sparse_weights.data(), m.classifier.sparse_weights.data());
  axpy(-lr, g.cls.bias, m.classifier.bias);
  axpy(-lr, g.crf.emission.data(), m.crf.emission.data());
  axpy(-lr, g.crf.projection.data(), m.crf.projection.data());
  axpy(-lr, g.crf.salience_w.data(), m.crf.salience_w.data());
  axpy(-lr, g.crf.transition.data(), m.crf.transition.data());
  axpy(-lr, g.crf.start, m.crf.start);
}

}  // namespace detail

/// Joint objective over one batch:
///   sum over labeled docs of -log p(y|x)
///   + lambda * sum over annotated docs of -log p(e|y,x)
/// Extraction is conditioned on the GOLD label during training.
/// Salience emission features are treated as constants for gradients.
/// Gradients accumulate unfinalized into `grads` (call finalize()).
/// Returns the (lambda-weighted) batch loss.
inline double joint_loss_grad(const std::vector<const Document*>& docs,
                              const std::vector<const FeaturizedDoc*>& feats,
                              const Model& model, const TrainConfig& cfg,
                              Gradients& grads,
                              std::vector<std::string>* extraction_docs = nullptr) {
  double cls_loss = 0.0, crf_loss = 0.0;
  const bool use_cls = variant_has_classifier(model.variant);
  const bool use_crf = variant_has_crf(model.variant);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const Document& d = *docs[i];
    const FeaturizedDoc& f = *feats[i];
    if (f.empty()) continue;
    if (use_cls && d.label)
      cls_loss += classification_nll_grad_doc(f, *d.label, model.classifier, grads.cls);
    if (use_crf && d.evidence && cfg.lambda_extract > 0.0) {
      if (!cfg.include_empty_masks && detail::all_zero(*d.evidence)) continue;
      if (!d.label) throw std::runtime_error("annotated document without label");
      const int block = model.crf.num_blocks > 1 ? *d.label : 0;
      std::vector<double> sal;
      const std::vector<double>* sal_ptr = nullptr;
      if (cfg.emission_mode == EmissionMode::kSalienceFeature) {
        sal = salience(f, model.classifier, *d.label);
        sal_ptr = &sal;
      }
      crf_loss += crf_nll_grad_doc(
          f, *d.evidence, block, model.crf, model.classifier.embeddings,
          cfg.emission_mode, grads.crf,
          cfg.emission_mode == EmissionMode::kSharedEmbeddings
              ? &grads.crf_embeddings
              : nullptr,
          sal_ptr);
      if (extraction_docs) extraction_docs->push_back(d.id);
    }
  }
  return cls_loss + cfg.lambda_extract * crf_loss;
}

struct Prediction {
  int label = 0;
  std::vector<double> class_probs;
  std::optional<std::vector<std::uint8_t>> evidence;  // absent for classify-only
};

namespace detail {

inline std::vector<std::uint8_t> topk_mask(const std::vector<double>& scores,
                                           double fraction) {
  const std::size_t T = scores.size();
  std::size_t k = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(T) + 0.5));
  if (k < 1) k = 1;
  if (k > T) k = T;
  std::vector<std::size_t> idx(T);
  for (std::size_t i = 0; i < T; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<std::uint8_t> mask(T, 0);
  for (std::size_t i = 0; i < k; ++i) mask[idx[i]] = 1;
  return mask;
}

/// Viterbi mask conditioned on class `cls` (ignored by unconditioned
/// models, which have one block).
inline std::vector<std::uint8_t> decode_mask(const Model& m,
                                             const FeaturizedDoc& f, int cls) {
  const int block = m.crf.num_blocks > 1 ? cls : 0;
  std::vector<double> sal;
  const std::vector<double>* sal_ptr = nullptr;
  if (m.config.emission_mode == EmissionMode::kSalienceFeature) {
    sal = salience(f, m.classifier, cls);
    sal_ptr = &sal;
  }
  return viterbi(build_potentials(f, block, m.crf, m.classifier.embeddings,
                                  m.config.emission_mode, sal_ptr));
}

}  // namespace detail

/// Predicts the label, then decodes evidence conditioned on it (or on
/// the gold label for oracle models). Deterministic.
inline Prediction predict(const Model& m, const Document& doc) {
  FeaturizedDoc f = featurize(doc, m.feature_space);
  if (f.empty()) throw std::runtime_error("empty document");
  Prediction out;
  out.class_probs = predict_proba(f, m.classifier);
  out.label = predict_label(f, m.classifier);
  if (m.variant == Variant::kClassifyOnly) return out;
  if (m.variant == Variant::kTopkSalience) {
    out.evidence = detail::topk_mask(salience(f, m.classifier, out.label),
                                     m.evidence_fraction);
    return out;
  }
  int cond = out.label;
  if (m.variant == Variant::kClassifyExtractOracle && doc.label)
    cond = *doc.label;
  out.evidence = detail::decode_mask(m, f, cond);
  return out;
}

/// One evidence mask per class, decoded under each conditioning label
/// regardless of the predicted one.
inline std::vector<std::vector<std::uint8_t>> extract_per_class(
    const Model& m, const Document& doc) {
  if (!m.supports_extraction())
    throw std::runtime_error(
        "model was trained classification-only and cannot extract evidence");
  FeaturizedDoc f = featurize(doc, m.feature_space);
  if (f.empty()) throw std::runtime_error("empty document");
  std::vector<std::vector<std::uint8_t>> masks;
  for (int c = 0; c < m.num_classes; ++c) {
    if (m.variant == Variant::kTopkSalience)
      masks.push_back(detail::topk_mask(salience(f, m.classifier, c),
                                        m.evidence_fraction));
    else
      masks.push_back(detail::decode_mask(m, f, c));
  }
  return masks;
}

struct TrainResult {
  Model model;
  std::vector<double> epoch_loss;        // total training loss per epoch
  std::vector<double> dev_metric;        // per-epoch selection metric
  int best_epoch = -1;                   // -1: no dev evaluation happened
  std::vector<std::string> extraction_doc_ids;  // docs that fed the CRF loss
};

namespace detail {

inline double dev_selection_metric(const Model& m, const Corpus& dev);

inline double estimate_evidence_fraction(const Corpus& dev, const Corpus& train) {
  for (const Corpus* c : {&dev, &train}) {
    std::size_t ev = 0, total = 0;
    for (const auto& d : c->documents) {
      if (!d.evidence) continue;
      total += d.tokens.size();
      for (auto v : *d.evidence) ev += v;
    }
    if (total > 0) return static_cast<double>(ev) / static_cast<double>(total);
  }
  return 0.1;
}

}  // namespace detail

/// Mini-batch SGD over the joint objective. Returns parameters from the
/// best dev epoch (final epoch when dev is empty). Fully deterministic
/// given the seed.
inline TrainResult train_detailed(const Corpus& corpus, const Corpus& dev,
                                  TrainConfig cfg,
                                  Variant variant = Variant::kClassifyExtractPredicted) {
  cfg.validate();
  corpus.validate();
  dev.validate();
  if (corpus.documents.empty()) throw std::runtime_error("empty training corpus");
  if (variant == Variant::kExtractOnly && corpus.num_annotated() == 0)
    throw std::runtime_error("extract_only requires annotated documents (m = 0)");
  cfg.conditioning = variant_conditioning(variant, cfg);

  TrainResult result;
  Model& m = result.model;
  m.feature_space = FeatureSpace::build(corpus, cfg.embedding_dim, cfg.min_token_freq);
  m.num_classes = corpus.num_classes;
  m.variant = variant;
  m.config = cfg;
  const int blocks =
      cfg.conditioning == Conditioning::kGoldLabel ? corpus.num_classes : 1;
  m.classifier = ClassifierParams::zeros(m.feature_space.vocab_size(),
                                         cfg.embedding_dim, corpus.num_classes,
                                         m.feature_space.num_sparse());
  m.crf = CrfParams::zeros(blocks, m.feature_space.num_sparse(),
                           cfg.embedding_dim, cfg.class_condition_transitions);
  {
    std::mt19937_64 rng(mix_seed(cfg.seed, 1));
    std::uniform_real_distribution<double> u(-cfg.embedding_init, cfg.embedding_init);
    for (double& v : m.classifier.embeddings.data()) v = u(rng);
  }
  m.evidence_fraction = detail::estimate_evidence_fraction(dev, corpus);

  std::vector<FeaturizedDoc> feats;
  feats.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) feats.push_back(featurize(d, m.feature_space));

  std::vector<std::size_t> order(corpus.documents.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 2));

  Gradients grads = Gradients::zeros_like(m);
  Model best = m;
  double best_metric = -1.0;
  int best_epoch = -1;
  int since_best = 0;
  std::vector<std::string> extraction_ids;

  const bool have_dev = !dev.documents.empty();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<const Document*> docs;
      std::vector<const FeaturizedDoc*> bf;
      for (std::size_t i = b;
           i < std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size)); ++i) {
        docs.push_back(&corpus.documents[order[i]]);
        bf.push_back(&feats[order[i]]);
      }
      grads.zero();
      double loss = joint_loss_grad(docs, bf, m, cfg, grads,
                                    epoch == 0 ? &extraction_ids : nullptr);
      if (!std::isfinite(loss))
        throw std::runtime_error("training diverged at epoch " +
                                 std::to_string(epoch));
      grads.finalize(cfg.lambda_extract);
      grads.clip(cfg.clip_norm);
      detail::sgd_step(m, grads, cfg.learning_rate, cfg.l2);
      epoch_loss += loss;
    }
    if (!m.classifier.all_finite() || !m.crf.all_finite())
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
    result.epoch_loss.push_back(epoch_loss);

    if (have_dev) {
      double metric = detail::dev_selection_metric(m, dev);
      result.dev_metric.push_back(metric);
      if (metric > best_metric) {
        best_metric = metric;
        best = m;
        best_epoch = epoch;
        since_best = 0;
      } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
        break;
      }
    }
  }
  if (have_dev && best_epoch >= 0) {
    result.model = best;
    result.best_epoch = best_epoch;
  }
  std::sort(extraction_ids.begin(), extraction_ids.end());
  extraction_ids.erase(std::unique(extraction_ids.begin(), extraction_ids.end()),
                       extraction_ids.end());
  result.extraction_doc_ids = std::move(extraction_ids);
  return result;
}

inline Model train(const Corpus& corpus, const Corpus& dev, const TrainConfig& cfg,
                   Variant variant = Variant::kClassifyExtractPredicted) {
  return train_detailed(corpus, dev, cfg, variant).model;
}

inline Model train_variant(const Corpus& corpus, const Corpus& dev,
                           Variant variant, TrainConfig cfg = {}) {
  return train(corpus, dev, cfg, variant);
}

}  // namespace evidex

// Dev-metric needs the metric helpers; kept out of eval.hpp to avoid a
// header cycle.
#include "evidex/metrics_core.hpp"

namespace evidex::detail {

inline double dev_selection_metric(const Model& m, const Corpus& dev) {
  // Token F1 on annotated dev docs for extraction-capable variants,
  // falling back to accuracy when the dev split has no annotations.
  if (variant_supports_extraction(m.variant) && dev.num_annotated() > 0) {
    std::vector<std::vector<std::uint8_t>> pred, gold;
    for (const auto& d : dev.documents) {
      if (!d.evidence || d.tokens.empty()) continue;
      auto p = predict(m, d);
      pred.push_back(p.evidence ? *p.evidence
                                : std::vector<std::uint8_t>(d.tokens.size(), 0));
      gold.push_back(*d.evidence);
    }
    return token_f1(pred, gold).f1;
  }
  std::vector<int> pl, gl;
  for (const auto& d : dev.documents) {
    if (!d.label || d.tokens.empty()) continue;
    pl.push_back(predict(m, d).label);
    gl.push_back(*d.label);
  }
  if (pl.empty()) return 0.0;
  return accuracy(pl, gl);
}

}  // namespace evidex::detail

#endif  // EVIDEX_TRAINER_HPP
