#ifndef EVIDEX_METRICS_CORE_HPP
#define EVIDEX_METRICS_CORE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace evidex {

/// Token-level extraction metrics with E as the positive class.
/// Micro-averaged: computed from corpus-level token counts, not from
/// per-document F1 means.
struct ExtractionReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double macro_f1 = 0.0;  // mean of per-document F1, reported only
  std::vector<double> per_class_f1;  // filled by corpus-level evaluation
  std::uint64_t tp = 0, fp = 0, fn = 0;
};

inline double f1_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const double p = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double r = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  return (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline ExtractionReport token_f1(
    const std::vector<std::vector<std::uint8_t>>& predicted,
    const std::vector<std::vector<std::uint8_t>>& gold) {
  if (predicted.size() != gold.size())
    throw std::runtime_error("token_f1: document count mismatch");
  ExtractionReport r;
  double macro_sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].size() != gold[i].size())
      throw std::runtime_error("token_f1: length mismatch in document " +
                               std::to_string(i));
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t t = 0; t < predicted[i].size(); ++t) {
      if (predicted[i][t] && gold[i][t]) ++tp;
      else if (predicted[i][t] && !gold[i][t]) ++fp;
      else if (!predicted[i][t] && gold[i][t]) ++fn;
    }
    r.tp += tp;
    r.fp += fp;
    r.fn += fn;
    macro_sum += f1_from_counts(tp, fp, fn);
  }
  r.precision = (r.tp + r.fp) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = (r.tp + r.fn) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0
             ? 2 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.macro_f1 = predicted.empty() ? 0.0 : macro_sum / static_cast<double>(predicted.size());
  return r;
}

inline double accuracy(const std::vector<int>& predicted,
                       const std::vector<int>& gold) {
  if (predicted.size() != gold.size())
    throw std::runtime_error("accuracy: length mismatch");
  if (predicted.empty()) throw std::runtime_error("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == gold[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace evidex

#endif  // EVIDEX_METRICS_CORE_HPP
