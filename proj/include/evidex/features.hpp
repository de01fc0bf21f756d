#ifndef EVIDEX_FEATURES_HPP
#define EVIDEX_FEATURES_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "evidex/corpus.hpp"

namespace evidex {

/// Maps tokens to a dense embedding row plus sparse emission feature
/// indices drawn from four templates: word identity, lowercased word,
/// 3-char prefix, 3-char suffix. Index assignment is first-seen order
/// over the training corpus, so it is stable across save/load.
class FeatureSpace {
public:
  static constexpr int kUnkRow = 0;

  FeatureSpace() = default;

  static FeatureSpace build(const Corpus& train, int embedding_dim,
                            int min_token_freq = 2) {
    FeatureSpace fs;
    fs.embedding_dim_ = embedding_dim;
    std::unordered_map<std::string, int> freq;
    for (const auto& d : train.documents)
      for (const auto& tok : d.tokens) ++freq[tok];
    fs.vocab_list_.push_back("<unk>");
    fs.vocab_["<unk>"] = kUnkRow;
    for (const auto& d : train.documents) {
      for (const auto& tok : d.tokens) {
        if (freq[tok] >= min_token_freq && !fs.vocab_.count(tok)) {
          fs.vocab_[tok] = static_cast<int>(fs.vocab_list_.size());
          fs.vocab_list_.push_back(tok);
        }
        for (const auto& name : template_names(tok)) fs.intern(name);
      }
    }
    return fs;
  }

  int embedding_dim() const { return embedding_dim_; }
  int vocab_size() const { return static_cast<int>(vocab_list_.size()); }
  /// K: total sparse emission feature count.
  int num_sparse() const { return static_cast<int>(sparse_list_.size()); }

  int embedding_row(const std::string& tok) const {
    auto it = vocab_.find(tok);
    return it == vocab_.end() ? kUnkRow : it->second;
  }

  /// Sparse indices firing on a token; only features seen at build time.
  std::vector<int> sparse_features(const std::string& tok) const {
    std::vector<int> out;
    for (const auto& name : template_names(tok)) {
      auto it = sparse_index_.find(name);
      if (it != sparse_index_.end()) out.push_back(it->second);
    }
    return out;
  }

  const std::vector<std::string>& vocab_list() const { return vocab_list_; }
  const std::vector<std::string>& sparse_list() const { return sparse_list_; }

  /// Rebuild lookup maps from serialized lists.
  static FeatureSpace from_lists(std::vector<std::string> vocab_list,
                                 std::vector<std::string> sparse_list,
                                 int embedding_dim) {
    FeatureSpace fs;
    fs.embedding_dim_ = embedding_dim;
    fs.vocab_list_ = std::move(vocab_list);
    fs.sparse_list_ = std::move(sparse_list);
    for (std::size_t i = 0; i < fs.vocab_list_.size(); ++i)
      fs.vocab_[fs.vocab_list_[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < fs.sparse_list_.size(); ++i)
      fs.sparse_index_[fs.sparse_list_[i]] = static_cast<int>(i);
    return fs;
  }

private:
  static std::vector<std::string> template_names(const std::string& tok) {
    std::string lower = tok;
    for (char& c : lower)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::vector<std::string> names;
    names.push_back("W=" + tok);
    names.push_back("L=" + lower);
    names.push_back("P3=" + tok.substr(0, std::min<std::size_t>(3, tok.size())));
    names.push_back("S3=" + (tok.size() <= 3 ? tok : tok.substr(tok.size() - 3)));
    return names;
  }

  void intern(const std::string& name) {
    if (!sparse_index_.count(name)) {
      sparse_index_[name] = static_cast<int>(sparse_list_.size());
      sparse_list_.push_back(name);
    }
  }

  int embedding_dim_ = 16;
  std::unordered_map<std::string, int> vocab_;
  std::vector<std::string> vocab_list_;
  std::unordered_map<std::string, int> sparse_index_;
  std::vector<std::string> sparse_list_;
};

struct TokenFeatures {
  int embedding_row = FeatureSpace::kUnkRow;
  std::vector<int> sparse;  // indices in [0, K)
};

using FeaturizedDoc = std::vector<TokenFeatures>;

/// Pure function of (doc, fs); one entry per token.
inline FeaturizedDoc featurize(const Document& doc, const FeatureSpace& fs) {
  FeaturizedDoc out;
  out.reserve(doc.tokens.size());
  for (const auto& tok : doc.tokens) {
    TokenFeatures tf;
    tf.embedding_row = fs.embedding_row(tok);
    tf.sparse = fs.sparse_features(tok);
    out.push_back(std::move(tf));
  }
  return out;
}

}  // namespace evidex

#endif  // EVIDEX_FEATURES_HPP
