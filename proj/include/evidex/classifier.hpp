#ifndef EVIDEX_CLASSIFIER_HPP
#define EVIDEX_CLASSIFIER_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "evidex/features.hpp"
#include "evidex/matrix.hpp"

namespace evidex {

/// Linear classifier over mean-pooled embeddings plus summed sparse
/// counts. The embedding table is shared with the CRF.
struct ClassifierParams {
  Matrix embeddings;      // |V| x D (shared)
  Matrix class_weights;   // C x D
  Matrix sparse_weights;  // C x K
  std::vector<double> bias;  // C

  int num_classes() const { return static_cast<int>(class_weights.rows()); }

  static ClassifierParams zeros(int vocab, int dim, int num_classes, int k) {
    ClassifierParams p;
    p.embeddings = Matrix(vocab, dim);
    p.class_weights = Matrix(num_classes, dim);
    p.sparse_weights = Matrix(num_classes, k);
    p.bias.assign(num_classes, 0.0);
    return p;
  }

  bool all_finite() const {
    if (!embeddings.all_finite() || !class_weights.all_finite() ||
        !sparse_weights.all_finite())
      return false;
    for (double b : bias)
      if (!std::isfinite(b)) return false;
    return true;
  }
};

/// score_c = W_c . meanpool(embeddings) + U_c . summed sparse counts + b_c
inline std::vector<double> class_scores(const FeaturizedDoc& doc,
                                        const ClassifierParams& p) {
  if (doc.empty()) throw std::runtime_error("empty document");
  const int C = p.num_classes();
  const std::size_t D = p.class_weights.cols();
  std::vector<double> pooled(D, 0.0);
  for (const auto& tf : doc) {
    const double* e = p.embeddings.row(static_cast<std::size_t>(tf.embedding_row));
    for (std::size_t d = 0; d < D; ++d) pooled[d] += e[d];
  }
  const double inv_t = 1.0 / static_cast<double>(doc.size());
  std::vector<double> scores(static_cast<std::size_t>(C), 0.0);
  for (int c = 0; c < C; ++c) {
    double s = p.bias[static_cast<std::size_t>(c)];
    s += inv_t * dot(p.class_weights.row(static_cast<std::size_t>(c)),
                     pooled.data(), D);
    const double* u = p.sparse_weights.row(static_cast<std::size_t>(c));
    for (const auto& tf : doc)
      for (int k : tf.sparse) s += u[k];
    scores[static_cast<std::size_t>(c)] = s;
  }
  return scores;
}

inline std::vector<double> softmax(std::vector<double> scores) {
  double lz = log_sum_exp(scores.data(), scores.size());
  for (double& s : scores) s = std::exp(s - lz);
  return scores;
}

inline std::vector<double> predict_proba(const FeaturizedDoc& doc,
                                         const ClassifierParams& p) {
  return softmax(class_scores(doc, p));
}

/// Lowest class index wins exact score ties.
inline int predict_label(const FeaturizedDoc& doc, const ClassifierParams& p) {
  auto scores = class_scores(doc, p);
  int best = 0;
  for (int c = 1; c < static_cast<int>(scores.size()); ++c)
    if (scores[static_cast<std::size_t>(c)] > scores[static_cast<std::size_t>(best)])
      best = c;
  return best;
}

/// Per-token additive contribution to the class-c score:
///   score_t = W_c . E(x_t) / T + sparse weights firing on token t.
/// Summing over tokens recovers score_c minus the bias.
inline std::vector<double> salience(const FeaturizedDoc& doc,
                                    const ClassifierParams& p, int c) {
  if (doc.empty()) throw std::runtime_error("empty document");
  if (c < 0 || c >= p.num_classes())
    throw std::runtime_error("salience: class out of range");
  const std::size_t D = p.class_weights.cols();
  const double inv_t = 1.0 / static_cast<double>(doc.size());
  const double* w = p.class_weights.row(static_cast<std::size_t>(c));
  const double* u = p.sparse_weights.row(static_cast<std::size_t>(c));
  std::vector<double> out;
  out.reserve(doc.size());
  for (const auto& tf : doc) {
    double s = inv_t * dot(w, p.embeddings.row(static_cast<std::size_t>(tf.embedding_row)), D);
    for (int k : tf.sparse) s += u[k];
    out.push_back(s);
  }
  return out;
}

/// Accumulates -log p(y|x) and its gradient for one labeled document.
/// Gradient buffers must match the parameter shapes.
inline double classification_nll_grad_doc(const FeaturizedDoc& doc, int label,
                                          const ClassifierParams& p,
                                          ClassifierParams& grad) {
  const int C = p.num_classes();
  if (label < 0 || label >= C)
    throw std::runtime_error("classification: label out of range");
  auto probs = predict_proba(doc, p);
  const double loss = -std::log(probs[static_cast<std::size_t>(label)]);
  const std::size_t D = p.class_weights.cols();
  const double inv_t = 1.0 / static_cast<double>(doc.size());

  std::vector<double> pooled(D, 0.0);
  for (const auto& tf : doc) {
    const double* e = p.embeddings.row(static_cast<std::size_t>(tf.embedding_row));
    for (std::size_t d = 0; d < D; ++d) pooled[d] += e[d];
  }
  for (std::size_t d = 0; d < D; ++d) pooled[d] *= inv_t;

  for (int c = 0; c < C; ++c) {
    const double g = probs[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0);
    grad.bias[static_cast<std::size_t>(c)] += g;
    double* gw = grad.class_weights.row(static_cast<std::size_t>(c));
    for (std::size_t d = 0; d < D; ++d) gw[d] += g * pooled[d];
    double* gu = grad.sparse_weights.row(static_cast<std::size_t>(c));
    for (const auto& tf : doc)
      for (int k : tf.sparse) gu[k] += g;
    // d score_c / d E(x_t) = W_c / T
    const double* w = p.class_weights.row(static_cast<std::size_t>(c));
    for (const auto& tf : doc) {
      double* ge = grad.embeddings.row(static_cast<std::size_t>(tf.embedding_row));
      for (std::size_t d = 0; d < D; ++d) ge[d] += g * inv_t * w[d];
    }
  }
  return loss;
}

}  // namespace evidex

#endif  // EVIDEX_CLASSIFIER_HPP
