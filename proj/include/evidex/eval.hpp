#ifndef EVIDEX_EVAL_HPP
#define EVIDEX_EVAL_HPP

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "evidex/metrics_core.hpp"
#include "evidex/trainer.hpp"

namespace evidex {

struct EvalResult {
  double accuracy = 0.0;
  ExtractionReport extraction;
  std::size_t docs_classified = 0;
  std::size_t docs_annotated = 0;
};

/// Runs the model over a corpus; accuracy over labeled docs, extraction
/// metrics over annotated docs (per-class F1 keyed by gold label).
inline EvalResult evaluate_model(const Model& model, const Corpus& corpus) {
  EvalResult res;
  std::vector<int> pl, gl;
  std::vector<std::vector<std::uint8_t>> pred, gold;
  std::map<int, std::pair<std::vector<std::vector<std::uint8_t>>,
                          std::vector<std::vector<std::uint8_t>>>> by_class;
  for (const auto& d : corpus.documents) {
    if (d.tokens.empty()) continue;
    Prediction p = predict(model, d);
    if (d.label) {
      pl.push_back(p.label);
      gl.push_back(*d.label);
    }
    if (d.evidence) {
      auto mask = p.evidence ? *p.evidence
                             : std::vector<std::uint8_t>(d.tokens.size(), 0);
      pred.push_back(mask);
      gold.push_back(*d.evidence);
      by_class[*d.label].first.push_back(mask);
      by_class[*d.label].second.push_back(*d.evidence);
    }
  }
  res.docs_classified = pl.size();
  res.docs_annotated = pred.size();
  if (!pl.empty()) res.accuracy = accuracy(pl, gl);
  if (!pred.empty()) {
    res.extraction = token_f1(pred, gold);
    res.extraction.per_class_f1.assign(static_cast<std::size_t>(corpus.num_classes), 0.0);
    for (auto& [c, masks] : by_class)
      res.extraction.per_class_f1[static_cast<std::size_t>(c)] =
          token_f1(masks.first, masks.second).f1;
  }
  return res;
}

struct GridCell {
  std::string variant;
  std::uint64_t seed = 0;
  std::size_t m_used = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct GridRow {
  std::string variant;
  std::size_t m_used = 0;
  int seeds = 0;
  double mean_accuracy = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  double f1_stderr = 0.0;
};

/// Learning-curve point: mean and standard error over seeds.
struct CurvePoint {
  std::string variant;
  std::size_t m_used = 0;
  double mean_f1 = 0.0;
  double std_error = 0.0;
  int seeds = 0;
};

namespace detail {

inline GridRow summarize(const std::vector<GridCell>& cells) {
  GridRow row;
  if (cells.empty()) return row;
  row.variant = cells.front().variant;
  row.m_used = cells.front().m_used;
  row.seeds = static_cast<int>(cells.size());
  double sum_f1 = 0, sumsq_f1 = 0;
  for (const auto& c : cells) {
    row.mean_accuracy += c.accuracy;
    row.mean_precision += c.precision;
    row.mean_recall += c.recall;
    sum_f1 += c.f1;
    sumsq_f1 += c.f1 * c.f1;
  }
  const double n = static_cast<double>(cells.size());
  row.mean_accuracy /= n;
  row.mean_precision /= n;
  row.mean_recall /= n;
  row.mean_f1 = sum_f1 / n;
  if (cells.size() > 1) {
    double var = (sumsq_f1 - sum_f1 * sum_f1 / n) / (n - 1);
    if (var < 0) var = 0;
    row.f1_stderr = std::sqrt(var / n);
  }
  return row;
}

inline std::uint64_t variant_hash(const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Keeps the first `m` annotated documents of a seeded shuffle of the
/// annotated indices; the rest lose their mask but keep the label.
/// Nested by construction: the subset at m is a prefix of the one at m'.
inline Corpus subsample_annotations(const Corpus& corpus, std::size_t m,
                                    std::uint64_t subset_seed) {
  std::vector<std::size_t> annotated;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i)
    if (corpus.documents[i].evidence) annotated.push_back(i);
  if (m > annotated.size())
    throw std::runtime_error("m = " + std::to_string(m) +
                             " exceeds available annotations (" +
                             std::to_string(annotated.size()) + ")");
  std::mt19937_64 rng(mix_seed(subset_seed, 0x5B5EULL));
  std::shuffle(annotated.begin(), annotated.end(), rng);
  std::unordered_set<std::size_t> keep(annotated.begin(), annotated.begin() + m);
  Corpus out = corpus;
  for (std::size_t i = 0; i < out.documents.size(); ++i)
    if (out.documents[i].evidence && !keep.count(i))
      out.documents[i].evidence.reset();
  return out;
}

/// The ids of annotated docs kept at (subset_seed, m); used by tests to
/// check the nesting contract.
inline std::vector<std::string> subsample_ids(const Corpus& corpus, std::size_t m,
                                              std::uint64_t subset_seed) {
  Corpus sub = subsample_annotations(corpus, m, subset_seed);
  std::vector<std::string> ids;
  for (const auto& d : sub.documents)
    if (d.evidence) ids.push_back(d.id);
  return ids;
}

}  // namespace detail

/// Trains one grid cell. All cell randomness derives from
/// (base seed, variant name, m, seed index) so cells are independently
/// reproducible.
inline GridCell run_cell(const Corpus& train_corpus, const Corpus& dev,
                         const Corpus& test, Variant variant, TrainConfig cfg,
                         std::uint64_t base_seed, int seed_index,
                         std::size_t m = SIZE_MAX) {
  const std::string name = variant_name(variant);
  std::uint64_t cell_seed = mix_seed(
      mix_seed(base_seed, detail::variant_hash(name)),
      mix_seed(static_cast<std::uint64_t>(m),
               static_cast<std::uint64_t>(seed_index)));
  cfg.seed = cell_seed;
  const Corpus* tc = &train_corpus;
  Corpus subsampled;
  std::size_t m_used = train_corpus.num_annotated();
  if (m != SIZE_MAX && m < train_corpus.num_annotated()) {
    // Subset choice depends on (base seed, seed index) but not the
    // variant, so variants at the same cell see the same annotations;
    // it is independent of m so subsets nest.
    subsampled = detail::subsample_annotations(
        train_corpus, m, mix_seed(base_seed, static_cast<std::uint64_t>(seed_index)));
    tc = &subsampled;
    m_used = m;
  }
  Model model = train(*tc, dev, cfg, variant);
  EvalResult ev = evaluate_model(model, test);
  GridCell cell;
  cell.variant = name;
  cell.seed = cell_seed;
  cell.m_used = m_used;
  cell.accuracy = ev.accuracy;
  cell.precision = ev.extraction.precision;
  cell.recall = ev.extraction.recall;
  cell.f1 = ev.extraction.f1;
  return cell;
}

/// Variant ablation: each variant trained per seed, evaluated on
/// test, means reported per variant.
inline std::vector<GridRow> ablation_grid(const Corpus& train_corpus,
                                          const Corpus& dev, const Corpus& test,
                                          const std::vector<Variant>& variants,
                                          int seeds, const TrainConfig& cfg,
                                          std::vector<GridCell>* cells_out = nullptr) {
  if (variants.empty()) throw std::runtime_error("ablation_grid: no variants");
  std::vector<GridRow> rows;
  for (Variant v : variants) {
    std::vector<GridCell> cells;
    for (int s = 0; s < seeds; ++s)
      cells.push_back(run_cell(train_corpus, dev, test, v, cfg, cfg.seed, s));
    if (cells_out)
      cells_out->insert(cells_out->end(), cells.begin(), cells.end());
    rows.push_back(detail::summarize(cells));
  }
  return rows;
}

/// Learning curve over nested annotation subsets.
inline std::vector<CurvePoint> learning_curve(
    const Corpus& train_corpus, const Corpus& dev, const Corpus& test,
    const std::vector<std::size_t>& m_grid, const std::vector<Variant>& variants,
    int seeds, const TrainConfig& cfg,
    std::vector<GridCell>* cells_out = nullptr) {
  for (std::size_t m : m_grid)
    if (m > train_corpus.num_annotated())
      throw std::runtime_error("m = " + std::to_string(m) +
                               " exceeds available annotations (" +
                               std::to_string(train_corpus.num_annotated()) + ")");
  std::vector<CurvePoint> points;
  for (Variant v : variants) {
    for (std::size_t m : m_grid) {
      std::vector<GridCell> cells;
      for (int s = 0; s < seeds; ++s)
        cells.push_back(run_cell(train_corpus, dev, test, v, cfg, cfg.seed, s, m));
      if (cells_out)
        cells_out->insert(cells_out->end(), cells.begin(), cells.end());
      GridRow row = detail::summarize(cells);
      CurvePoint pt;
      pt.variant = row.variant;
      pt.m_used = m;
      pt.mean_f1 = row.mean_f1;
      pt.std_error = row.f1_stderr;
      pt.seeds = row.seeds;
      points.push_back(pt);
    }
  }
  return points;
}

inline void write_cells_csv(const std::vector<GridCell>& cells, std::ostream& out) {
  out << "variant,seed,m,accuracy,precision,recall,f1\n";
  for (const auto& c : cells)
    out << c.variant << ',' << c.seed << ',' << c.m_used << ',' << c.accuracy
        << ',' << c.precision << ',' << c.recall << ',' << c.f1 << '\n';
}

inline void print_grid(const std::vector<GridRow>& rows, std::ostream& out) {
  out << std::left << std::setw(30) << "variant" << std::right << std::setw(6)
      << "m" << std::setw(7) << "seeds" << std::setw(10) << "acc"
      << std::setw(10) << "P" << std::setw(10) << "R" << std::setw(10) << "F1"
      << std::setw(10) << "se(F1)" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& r : rows)
    out << std::left << std::setw(30) << r.variant << std::right << std::setw(6)
        << r.m_used << std::setw(7) << r.seeds << std::setw(10)
        << r.mean_accuracy << std::setw(10) << r.mean_precision
        << std::setw(10) << r.mean_recall << std::setw(10) << r.mean_f1
        << std::setw(10) << r.f1_stderr << '\n';
  out.unsetf(std::ios::fixed);
}

/// Spearman rank correlation; average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::runtime_error("spearman: need two equal-length vectors");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  auto rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0 || dy == 0) return 0.0;
  return num / std::sqrt(dx * dy);
}

}  // namespace evidex

#endif  // EVIDEX_EVAL_HPP
