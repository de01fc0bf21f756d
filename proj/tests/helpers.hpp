// Test-only oracles: exhaustive enumeration over tag sequences and
// central finite differences. Independent of the forward-backward and
// analytic-gradient paths they check.
#ifndef EVIDEX_TESTS_HELPERS_HPP
#define EVIDEX_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "evidex/classifier.hpp"
#include "evidex/crf.hpp"
#include "evidex/features.hpp"
#include "evidex/matrix.hpp"

namespace evidex::testing {

struct EnumerationResult {
  double log_z = 0.0;
  Matrix node;               // T x S
  std::vector<Matrix> edge;  // T-1 of S x S
  double max_score = 0.0;
  std::vector<std::uint8_t> argmax;  // first max in O-first order
};

/// Sums and maximizes over all 2^T tag sequences by brute force.
inline EnumerationResult enumerate_sequences(const PotentialTable& pt) {
  const std::size_t T = pt.length();
  EnumerationResult res;
  res.node = Matrix(T, kNumTags);
  for (std::size_t t = 0; t + 1 < T; ++t) res.edge.emplace_back(kNumTags, kNumTags);

  std::vector<double> scores;
  std::vector<std::vector<std::uint8_t>> seqs;
  const std::uint64_t total = 1ULL << T;
  scores.reserve(total);
  double best = -1e300;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    std::vector<std::uint8_t> tags(T);
    for (std::size_t t = 0; t < T; ++t) tags[t] = (bits >> t) & 1;
    const double s = sequence_score(pt, tags);
    scores.push_back(s);
    seqs.push_back(tags);
    if (s > best) {
      best = s;
      res.argmax = tags;
    }
  }
  res.max_score = best;
  res.log_z = log_sum_exp(scores.data(), scores.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const double p = std::exp(scores[i] - res.log_z);
    for (std::size_t t = 0; t < T; ++t)
      res.node(t, seqs[i][t]) += p;
    for (std::size_t t = 0; t + 1 < T; ++t)
      res.edge[t](seqs[i][t], seqs[i][t + 1]) += p;
  }
  return res;
}

inline PotentialTable random_table(std::mt19937_64& rng, std::size_t T,
                                   double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PotentialTable pt;
  pt.emission = Matrix(T, kNumTags);
  for (double& v : pt.emission.data()) v = u(rng);
  pt.transition = Matrix(kNumTags, kNumTags);
  for (double& v : pt.transition.data()) v = u(rng);
  pt.start = {u(rng), u(rng)};
  return pt;
}

/// Central finite differences against an analytic gradient, over a set
/// of parameter buffers. Returns the max relative error.
inline double fd_max_rel_error(const std::vector<std::pair<double*, const double*>>& params_and_grads,
                               const std::vector<std::size_t>& sizes,
                               const std::function<double()>& loss,
                               double eps = 1e-5) {
  double worst = 0.0;
  for (std::size_t b = 0; b < params_and_grads.size(); ++b) {
    double* p = params_and_grads[b].first;
    const double* g = params_and_grads[b].second;
    for (std::size_t i = 0; i < sizes[b]; ++i) {
      const double orig = p[i];
      p[i] = orig + eps;
      const double lp = loss();
      p[i] = orig - eps;
      const double lm = loss();
      p[i] = orig;
      const double fd = (lp - lm) / (2 * eps);
      const double denom = std::max({std::abs(g[i]), std::abs(fd), 1e-3});
      const double rel = std::abs(g[i] - fd) / denom;
      if (rel > worst) worst = rel;
    }
  }
  return worst;
}

/// A random featurized document over a synthetic feature universe.
inline FeaturizedDoc random_featurized_doc(std::mt19937_64& rng, std::size_t T,
                                           int vocab, int k) {
  std::uniform_int_distribution<int> row(0, vocab - 1);
  std::uniform_int_distribution<int> feat(0, k - 1);
  std::uniform_int_distribution<int> nfeat(1, 3);
  FeaturizedDoc doc(T);
  for (auto& tf : doc) {
    tf.embedding_row = row(rng);
    int n = nfeat(rng);
    for (int i = 0; i < n; ++i) tf.sparse.push_back(feat(rng));
  }
  return doc;
}

inline void randomize(Matrix& m, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : m.data()) v = u(rng);
}

inline void randomize(std::vector<double>& v, std::mt19937_64& rng,
                      double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& x : v) x = u(rng);
}

}  // namespace evidex::testing

#endif  // EVIDEX_TESTS_HELPERS_HPP
