#ifndef EVIDEX_CORPUS_HPP
#define EVIDEX_CORPUS_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "evidex/matrix.hpp"

namespace evidex {

/// One training/evaluation example: a token sequence with an optional
/// class label and an optional binary evidence mask (1 = evidence token).
struct Document {
  std::string id;
  std::vector<std::string> tokens;
  std::optional<int> label;
  std::optional<std::vector<std::uint8_t>> evidence;

  bool annotated() const { return evidence.has_value(); }
};

struct Corpus {
  std::vector<Document> documents;
  int num_classes = 2;

  /// n: documents carrying a class label.
  std::size_t num_labeled() const {
    std::size_t n = 0;
    for (const auto& d : documents)
      if (d.label) ++n;
    return n;
  }

  /// m: documents carrying an evidence mask.
  std::size_t num_annotated() const {
    std::size_t m = 0;
    for (const auto& d : documents)
      if (d.evidence) ++m;
    return m;
  }

  void validate() const {
    for (const auto& d : documents) {
      if (d.label && (*d.label < 0 || *d.label >= num_classes))
        throw std::runtime_error("document " + d.id + ": label " +
                                 std::to_string(*d.label) +
                                 " out of range for C=" +
                                 std::to_string(num_classes));
      if (d.evidence) {
        if (!d.label)
          throw std::runtime_error("document " + d.id +
                                   ": evidence without label");
        if (d.evidence->size() != d.tokens.size())
          throw std::runtime_error("document " + d.id +
                                   ": evidence length mismatch");
        for (auto v : *d.evidence)
          if (v != 0 && v != 1)
            throw std::runtime_error("document " + d.id +
                                     ": evidence entry not 0/1");
      }
    }
  }
};

/// Lowercases, splits on whitespace, then peels leading/trailing
/// punctuation off each chunk into separate tokens. Deterministic.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  auto is_punct = [](unsigned char c) { return std::ispunct(c) != 0; };
  std::istringstream in(text);
  std::string chunk;
  while (in >> chunk) {
    for (char& c : chunk) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::size_t b = 0, e = chunk.size();
    std::vector<std::string> lead;
    while (b < e && is_punct(static_cast<unsigned char>(chunk[b])))
      lead.push_back(std::string(1, chunk[b++]));
    std::vector<std::string> trail;
    while (e > b && is_punct(static_cast<unsigned char>(chunk[e - 1])))
      trail.push_back(std::string(1, chunk[--e]));
    for (auto& t : lead) out.push_back(std::move(t));
    if (e > b) out.push_back(chunk.substr(b, e - b));
    for (auto it = trail.rbegin(); it != trail.rend(); ++it)
      out.push_back(std::move(*it));
  }
  return out;
}

using Span = std::array<std::size_t, 2>;  // [start, end) token indices

inline std::vector<std::uint8_t> spans_to_mask(const std::vector<Span>& spans,
                                               std::size_t num_tokens) {
  std::vector<std::uint8_t> mask(num_tokens, 0);
  for (const auto& s : spans) {
    if (s[1] > num_tokens || s[0] > s[1])
      throw std::runtime_error("span [" + std::to_string(s[0]) + "," +
                               std::to_string(s[1]) + ") exceeds token count " +
                               std::to_string(num_tokens));
    for (std::size_t t = s[0]; t < s[1]; ++t) mask[t] = 1;
  }
  return mask;
}

/// Maximal runs of 1s, as [start, end) spans.
inline std::vector<Span> mask_to_spans(const std::vector<std::uint8_t>& mask) {
  std::vector<Span> spans;
  std::size_t t = 0;
  while (t < mask.size()) {
    if (mask[t]) {
      std::size_t s = t;
      while (t < mask.size() && mask[t]) ++t;
      spans.push_back({s, t});
    } else {
      ++t;
    }
  }
  return spans;
}

/// One JSON object per line: `text` (string), optional `label` (int),
/// optional `evidence` (array of [start, end) token spans). Unknown
/// fields ignored. Evidence requires a label.
inline Corpus load_jsonl(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  Corpus corpus;
  corpus.num_classes = num_classes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("malformed JSON on line " +
                               std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("text") || !j["text"].is_string())
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": missing string field 'text'");
    Document doc;
    doc.id = j.contains("id") && j["id"].is_string()
                 ? j["id"].get<std::string>()
                 : "line" + std::to_string(lineno);
    doc.tokens = tokenize(j["text"].get<std::string>());
    if (j.contains("label") && !j["label"].is_null())
      doc.label = j["label"].get<int>();
    if (j.contains("evidence") && !j["evidence"].is_null()) {
      if (!doc.label)
        throw std::runtime_error("document " + doc.id +
                                 ": evidence without label");
      std::vector<Span> spans;
      for (const auto& s : j["evidence"])
        spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
      try {
        doc.evidence = spans_to_mask(spans, doc.tokens.size());
      } catch (const std::exception& e) {
        throw std::runtime_error("document " + doc.id + ": " + e.what());
      }
    }
    corpus.documents.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

inline void save_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& d : corpus.documents) {
    nlohmann::json j;
    j["id"] = d.id;
    std::string text;
    for (std::size_t t = 0; t < d.tokens.size(); ++t) {
      if (t) text += ' ';
      text += d.tokens[t];
    }
    j["text"] = text;
    if (d.label) j["label"] = *d.label;
    if (d.evidence) {
      auto spans = mask_to_spans(*d.evidence);
      auto arr = nlohmann::json::array();
      for (const auto& s : spans) arr.push_back({s[0], s[1]});
      j["evidence"] = arr;
    }
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic corpus generation.
//
// Each document mixes background tokens with contiguous spans from a
// class-specific lexicon (gold evidence) and distractor tokens drawn
// from the *other* classes' lexicons, which never count as evidence in
// this document. The same surface form is therefore evidence under one
// label and not under another, so extraction genuinely depends on the
// label. Token surface forms are random letter strings so character
// templates carry no class signal.
// ---------------------------------------------------------------------------

struct SyntheticConfig {
  int n = 2000;                  // documents generated (all labeled)
  int m = 200;                   // first m documents carry evidence masks
  int num_classes = 2;
  int background_vocab = 600;
  int lexicon_vocab = 1000;      // per class
  int min_len = 18;
  int max_len = 40;
  double evidence_rate = 0.15;   // P(slot starts an own-class evidence span)
  double noise_rate = 0.1;       // P(slot is a cross-class lexicon token)
  std::uint64_t seed = 0;

  void validate() const {
    if (m > n) throw std::runtime_error("synthetic config: m > n");
    if (evidence_rate < 0 || evidence_rate > 1 || noise_rate < 0 ||
        noise_rate > 1 || evidence_rate + noise_rate > 1)
      throw std::runtime_error("synthetic config: rates outside [0,1]");
    if (num_classes < 2) throw std::runtime_error("synthetic config: C < 2");
    if (min_len < 1 || max_len < min_len)
      throw std::runtime_error("synthetic config: bad length range");
  }
};

struct SyntheticVocab {
  std::vector<std::string> background;
  std::vector<std::vector<std::string>> lexicon;  // per class
};

namespace detail {
inline std::string random_word(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(5, 9);
  std::uniform_int_distribution<int> ch(0, 25);
  int n = len(rng);
  std::string w(static_cast<std::size_t>(n), 'a');
  for (char& c : w) c = static_cast<char>('a' + ch(rng));
  return w;
}
}  // namespace detail

/// Vocabulary lists are a pure function of (seed, sizes) so tests can
/// recover lexicon membership without the generated corpus carrying it.
inline SyntheticVocab synthetic_vocab(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(mix_seed(cfg.seed, 0xC0FFEEULL));
  SyntheticVocab v;
  // Distinct surface forms across all lists.
  std::vector<std::string> pool;
  std::size_t total = static_cast<std::size_t>(cfg.background_vocab) +
                      static_cast<std::size_t>(cfg.num_classes) *
                          static_cast<std::size_t>(cfg.lexicon_vocab);
  std::unordered_set<std::string> seen;
  while (pool.size() < total) {
    std::string w = detail::random_word(rng);
    if (seen.insert(w).second) pool.push_back(std::move(w));
  }
  std::size_t p = 0;
  v.background.assign(pool.begin(), pool.begin() + cfg.background_vocab);
  p += cfg.background_vocab;
  for (int c = 0; c < cfg.num_classes; ++c) {
    v.lexicon.emplace_back(pool.begin() + p, pool.begin() + p + cfg.lexicon_vocab);
    p += cfg.lexicon_vocab;
  }
  return v;
}

inline Corpus generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  SyntheticVocab vocab = synthetic_vocab(cfg);
  std::mt19937_64 rng(mix_seed(cfg.seed, 0xD0C5ULL));
  std::uniform_int_distribution<int> cls(0, cfg.num_classes - 1);
  std::uniform_int_distribution<int> len(cfg.min_len, cfg.max_len);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> bg(0, vocab.background.size() - 1);
  std::uniform_int_distribution<std::size_t> lex(0, vocab.lexicon[0].size() - 1);
  std::uniform_int_distribution<int> other(1, cfg.num_classes - 1);

  Corpus corpus;
  corpus.num_classes = cfg.num_classes;
  for (int i = 0; i < cfg.n; ++i) {
    Document doc;
    doc.id = "synth" + std::to_string(i);
    int y = cls(rng);
    doc.label = y;
    int T = len(rng);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(T), 0);
    // evidence comes as contiguous spans of 2-4 lexicon tokens; the
    // start probability is scaled so the expected evidence fraction
    // stays ~evidence_rate
    std::uniform_int_distribution<int> span(2, 4);
    for (int t = 0; t < T;) {
      double r = u(rng);
      if (r < cfg.evidence_rate / 3.0) {
        int L = std::min(span(rng), T - t);
        for (int j = 0; j < L; ++j, ++t) {
          doc.tokens.push_back(vocab.lexicon[y][lex(rng)]);
          mask[static_cast<std::size_t>(t)] = 1;
        }
      } else if (r < cfg.evidence_rate / 3.0 + cfg.noise_rate) {
        const int c = (y + other(rng)) % cfg.num_classes;
        doc.tokens.push_back(vocab.lexicon[static_cast<std::size_t>(c)][lex(rng)]);
        ++t;
      } else {
        doc.tokens.push_back(vocab.background[bg(rng)]);
        ++t;
      }
    }
    if (i < cfg.m) doc.evidence = std::move(mask);
    corpus.documents.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

}  // namespace evidex

#endif  // EVIDEX_CORPUS_HPP
