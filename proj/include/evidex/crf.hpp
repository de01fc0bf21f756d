#ifndef EVIDEX_CRF_HPP
#define EVIDEX_CRF_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "evidex/features.hpp"
#include "evidex/matrix.hpp"

namespace evidex {

/// Binary tag set: O (not evidence) = 0, E (evidence) = 1.
constexpr int kNumTags = 2;
constexpr int kTagO = 0;
constexpr int kTagE = 1;

/// Which signals enter the emission score besides sparse features.
enum class EmissionMode : std::uint32_t {
  kSparseOnly = 0,
  kSharedEmbeddings = 1,   // projection of the shared embedding table
  kSalienceFeature = 2,    // classifier salience score as a scalar feature
};

/// Label-conditioned CRF weights. Emission (and optionally transition)
/// weights are laid out in contiguous per-class blocks; block c is the
/// only emission block touched by a document conditioned on class c.
/// An unconditioned model has a single block.
struct CrfParams {
  int num_blocks = 1;
  bool condition_transitions = false;
  Matrix emission;    // (num_blocks * S) x K, row = block * S + tag
  Matrix projection;  // (num_blocks * S) x D
  Matrix salience_w;  // num_blocks x S
  Matrix transition;  // (tblocks * S) x S, tblocks = condition_transitions ? num_blocks : 1
  std::vector<double> start;  // S, shared across classes

  int num_sparse() const { return static_cast<int>(emission.cols()); }

  static CrfParams zeros(int num_blocks, int k, int dim,
                         bool condition_transitions = false) {
    CrfParams p;
    p.num_blocks = num_blocks;
    p.condition_transitions = condition_transitions;
    const std::size_t rows = static_cast<std::size_t>(num_blocks) * kNumTags;
    p.emission = Matrix(rows, static_cast<std::size_t>(k));
    p.projection = Matrix(rows, static_cast<std::size_t>(dim));
    p.salience_w = Matrix(static_cast<std::size_t>(num_blocks), kNumTags);
    const int tblocks = condition_transitions ? num_blocks : 1;
    p.transition = Matrix(static_cast<std::size_t>(tblocks) * kNumTags, kNumTags);
    p.start.assign(kNumTags, 0.0);
    return p;
  }

  bool all_finite() const {
    if (!emission.all_finite() || !projection.all_finite() ||
        !salience_w.all_finite() || !transition.all_finite())
      return false;
    for (double s : start)
      if (!std::isfinite(s)) return false;
    return true;
  }
};

/// Base emission feature index k conditioned on class y: block layout
/// y * K_base + k. For C = 2 this is an index permutation of the
/// even/odd interleaving.
inline int condition_features(int k, int y, int k_base, int num_classes) {
  if (y < 0 || y >= num_classes)
    throw std::runtime_error("condition_features: class out of range");
  if (k < 0 || k >= k_base)
    throw std::runtime_error("condition_features: feature index out of range");
  return y * k_base + k;
}

/// Log-domain potentials of one sequence.
struct PotentialTable {
  Matrix emission;    // T x S
  Matrix transition;  // S x S
  std::array<double, kNumTags> start{0.0, 0.0};

  std::size_t length() const { return emission.rows(); }
};

/// Builds the potential table for a document conditioned on class
/// `block` (0 for unconditioned models). `salience_scores` is required
/// in salience mode and ignored otherwise.
inline PotentialTable build_potentials(
    const FeaturizedDoc& doc, int block, const CrfParams& params,
    const Matrix& embeddings, EmissionMode mode,
    const std::vector<double>* salience_scores = nullptr) {
  if (doc.empty()) throw std::runtime_error("empty document");
  if (block < 0 || block >= params.num_blocks)
    throw std::runtime_error("build_potentials: class block out of range");
  if (mode == EmissionMode::kSalienceFeature &&
      (!salience_scores || salience_scores->size() != doc.size()))
    throw std::runtime_error("build_potentials: salience scores missing");

  const std::size_t T = doc.size();
  const std::size_t D = params.projection.cols();
  PotentialTable pt;
  pt.emission = Matrix(T, kNumTags);
  for (std::size_t t = 0; t < T; ++t) {
    for (int s = 0; s < kNumTags; ++s) {
      const std::size_t row = static_cast<std::size_t>(block) * kNumTags +
                              static_cast<std::size_t>(s);
      double score = 0.0;
      const double* em = params.emission.row(row);
      for (int k : doc[t].sparse) score += em[k];
      if (mode == EmissionMode::kSharedEmbeddings)
        score += dot(params.projection.row(row),
                     embeddings.row(static_cast<std::size_t>(doc[t].embedding_row)), D);
      else if (mode == EmissionMode::kSalienceFeature)
        score += params.salience_w(static_cast<std::size_t>(block),
                                   static_cast<std::size_t>(s)) *
                 (*salience_scores)[t];
      pt.emission(t, static_cast<std::size_t>(s)) = score;
    }
  }
  pt.transition = Matrix(kNumTags, kNumTags);
  const int tb = params.condition_transitions ? block : 0;
  for (int s = 0; s < kNumTags; ++s)
    for (int s2 = 0; s2 < kNumTags; ++s2)
      pt.transition(static_cast<std::size_t>(s), static_cast<std::size_t>(s2)) =
          params.transition(static_cast<std::size_t>(tb) * kNumTags + s,
                            static_cast<std::size_t>(s2));
  pt.start = {params.start[0], params.start[1]};
  return pt;
}

/// Forward recursion in log space. alpha(t, s) = log sum over all tag
/// prefixes ending in s at position t.
inline Matrix forward_scores(const PotentialTable& pt) {
  const std::size_t T = pt.length();
  Matrix alpha(T, kNumTags);
  for (int s = 0; s < kNumTags; ++s)
    alpha(0, static_cast<std::size_t>(s)) =
        pt.start[static_cast<std::size_t>(s)] + pt.emission(0, static_cast<std::size_t>(s));
  for (std::size_t t = 1; t < T; ++t) {
    for (int s = 0; s < kNumTags; ++s) {
      double acc[kNumTags];
      for (int s0 = 0; s0 < kNumTags; ++s0)
        acc[s0] = alpha(t - 1, static_cast<std::size_t>(s0)) +
                  pt.transition(static_cast<std::size_t>(s0), static_cast<std::size_t>(s));
      alpha(t, static_cast<std::size_t>(s)) =
          log_sum_exp(acc, kNumTags) + pt.emission(t, static_cast<std::size_t>(s));
    }
  }
  return alpha;
}

inline Matrix backward_scores(const PotentialTable& pt) {
  const std::size_t T = pt.length();
  Matrix beta(T, kNumTags);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (int s = 0; s < kNumTags; ++s) {
      double acc[kNumTags];
      for (int s2 = 0; s2 < kNumTags; ++s2)
        acc[s2] = pt.transition(static_cast<std::size_t>(s), static_cast<std::size_t>(s2)) +
                  pt.emission(t + 1, static_cast<std::size_t>(s2)) +
                  beta(t + 1, static_cast<std::size_t>(s2));
      beta(t, static_cast<std::size_t>(s)) = log_sum_exp(acc, kNumTags);
    }
  }
  return beta;
}

inline double log_partition(const PotentialTable& pt) {
  Matrix alpha = forward_scores(pt);
  const std::size_t T = pt.length();
  return log_sum_exp(alpha.row(T - 1), kNumTags);
}

struct Marginals {
  Matrix node;                 // T x S
  std::vector<Matrix> edge;    // T-1 entries, each S x S
  double log_z = 0.0;
};

inline Marginals marginals(const PotentialTable& pt) {
  const std::size_t T = pt.length();
  Matrix alpha = forward_scores(pt);
  Matrix beta = backward_scores(pt);
  Marginals m;
  m.log_z = log_sum_exp(alpha.row(T - 1), kNumTags);
  m.node = Matrix(T, kNumTags);
  for (std::size_t t = 0; t < T; ++t)
    for (int s = 0; s < kNumTags; ++s)
      m.node(t, static_cast<std::size_t>(s)) =
          std::exp(alpha(t, static_cast<std::size_t>(s)) +
                   beta(t, static_cast<std::size_t>(s)) - m.log_z);
  m.edge.reserve(T - 1);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    Matrix e(kNumTags, kNumTags);
    for (int s = 0; s < kNumTags; ++s)
      for (int s2 = 0; s2 < kNumTags; ++s2)
        e(static_cast<std::size_t>(s), static_cast<std::size_t>(s2)) =
            std::exp(alpha(t, static_cast<std::size_t>(s)) +
                     pt.transition(static_cast<std::size_t>(s), static_cast<std::size_t>(s2)) +
                     pt.emission(t + 1, static_cast<std::size_t>(s2)) +
                     beta(t + 1, static_cast<std::size_t>(s2)) - m.log_z);
    m.edge.push_back(std::move(e));
  }
  return m;
}

/// Unnormalized log score of one tag sequence under the table.
inline double sequence_score(const PotentialTable& pt,
                             const std::vector<std::uint8_t>& tags) {
  if (tags.size() != pt.length())
    throw std::runtime_error("sequence_score: length mismatch");
  double s = pt.start[tags[0]] + pt.emission(0, tags[0]);
  for (std::size_t t = 1; t < tags.size(); ++t)
    s += pt.transition(tags[t - 1], tags[t]) + pt.emission(t, tags[t]);
  return s;
}

/// Max-scoring tag sequence; ties prefer tag O (lower index) so output
/// is deterministic and the zero table decodes to all-O.
inline std::vector<std::uint8_t> viterbi(const PotentialTable& pt) {
  const std::size_t T = pt.length();
  Matrix delta(T, kNumTags);
  Matrix back(T, kNumTags);
  for (int s = 0; s < kNumTags; ++s)
    delta(0, static_cast<std::size_t>(s)) =
        pt.start[static_cast<std::size_t>(s)] + pt.emission(0, static_cast<std::size_t>(s));
  for (std::size_t t = 1; t < T; ++t) {
    for (int s = 0; s < kNumTags; ++s) {
      int best = 0;
      double best_score = delta(t - 1, 0) + pt.transition(0, static_cast<std::size_t>(s));
      for (int s0 = 1; s0 < kNumTags; ++s0) {
        double sc = delta(t - 1, static_cast<std::size_t>(s0)) +
                    pt.transition(static_cast<std::size_t>(s0), static_cast<std::size_t>(s));
        if (sc > best_score) {  // strict: ties keep the lower index
          best_score = sc;
          best = s0;
        }
      }
      delta(t, static_cast<std::size_t>(s)) =
          best_score + pt.emission(t, static_cast<std::size_t>(s));
      back(t, static_cast<std::size_t>(s)) = best;
    }
  }
  int last = 0;
  for (int s = 1; s < kNumTags; ++s)
    if (delta(T - 1, static_cast<std::size_t>(s)) > delta(T - 1, static_cast<std::size_t>(last)))
      last = s;
  std::vector<std::uint8_t> tags(T);
  tags[T - 1] = static_cast<std::uint8_t>(last);
  for (std::size_t t = T - 1; t > 0; --t)
    tags[t - 1] = static_cast<std::uint8_t>(back(t, tags[t]));
  return tags;
}

/// -log p(e | y, x) plus gradients: expected feature counts (from
/// marginals) minus empirical counts. Gradients accumulate into `grad`;
/// the shared-embedding gradient accumulates into `grad_embeddings`
/// when the mode uses embeddings and the pointer is non-null.
inline double crf_nll_grad_doc(const FeaturizedDoc& doc,
                               const std::vector<std::uint8_t>& gold, int block,
                               const CrfParams& params, const Matrix& embeddings,
                               EmissionMode mode, CrfParams& grad,
                               Matrix* grad_embeddings = nullptr,
                               const std::vector<double>* salience_scores = nullptr) {
  if (gold.size() != doc.size())
    throw std::runtime_error("crf_nll_grad: mask length mismatch");
  PotentialTable pt =
      build_potentials(doc, block, params, embeddings, mode, salience_scores);
  Marginals m = marginals(pt);
  const double loss = m.log_z - sequence_score(pt, gold);

  const std::size_t T = doc.size();
  const std::size_t D = params.projection.cols();
  for (std::size_t t = 0; t < T; ++t) {
    for (int s = 0; s < kNumTags; ++s) {
      const double g = m.node(t, static_cast<std::size_t>(s)) -
                       (gold[t] == s ? 1.0 : 0.0);
      if (g == 0.0) continue;
      const std::size_t row = static_cast<std::size_t>(block) * kNumTags +
                              static_cast<std::size_t>(s);
      double* gem = grad.emission.row(row);
      for (int k : doc[t].sparse) gem[k] += g;
      if (mode == EmissionMode::kSharedEmbeddings) {
        const double* e = embeddings.row(static_cast<std::size_t>(doc[t].embedding_row));
        double* gp = grad.projection.row(row);
        for (std::size_t d = 0; d < D; ++d) gp[d] += g * e[d];
        if (grad_embeddings) {
          const double* p = params.projection.row(row);
          double* ge = grad_embeddings->row(static_cast<std::size_t>(doc[t].embedding_row));
          for (std::size_t d = 0; d < D; ++d) ge[d] += g * p[d];
        }
      } else if (mode == EmissionMode::kSalienceFeature) {
        grad.salience_w(static_cast<std::size_t>(block), static_cast<std::size_t>(s)) +=
            g * (*salience_scores)[t];
      }
    }
  }
  const int tb = params.condition_transitions ? block : 0;
  for (std::size_t t = 0; t + 1 < T; ++t)
    for (int s = 0; s < kNumTags; ++s)
      for (int s2 = 0; s2 < kNumTags; ++s2)
        grad.transition(static_cast<std::size_t>(tb) * kNumTags + s,
                        static_cast<std::size_t>(s2)) +=
            m.edge[t](static_cast<std::size_t>(s), static_cast<std::size_t>(s2)) -
            ((gold[t] == s && gold[t + 1] == s2) ? 1.0 : 0.0);
  for (int s = 0; s < kNumTags; ++s)
    grad.start[static_cast<std::size_t>(s)] +=
        m.node(0, static_cast<std::size_t>(s)) - (gold[0] == s ? 1.0 : 0.0);
  return loss;
}

}  // namespace evidex

#endif  // EVIDEX_CRF_HPP
