#ifndef EVIDEX_SERIALIZE_HPP
#define EVIDEX_SERIALIZE_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evidex/trainer.hpp"

namespace evidex {

// Model file: magic "EVDX", u32 format version, then feature space,
// parameter tensors and the config snapshot in a fixed field order.
// Little-endian doubles written raw, so identical models are
// byte-identical on disk.

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline void write_string_list(std::ostream& out, const std::vector<std::string>& v) {
  write_u64(out, v.size());
  for (const auto& s : v) write_string(out, s);
}
inline void write_vec(std::ostream& out, const std::vector<double>& v) {
  write_u64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}
inline void write_matrix(std::ostream& out, const Matrix& m) {
  write_u64(out, m.rows());
  write_u64(out, m.cols());
  out.write(reinterpret_cast<const char*>(m.data().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

inline std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("model file truncated");
  return v;
}
inline std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("model file truncated");
  return v;
}
inline double read_f64(std::istream& in) {
  double v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("model file truncated");
  return v;
}
inline std::string read_string(std::istream& in) {
  std::uint64_t n = read_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("model file truncated");
  return s;
}
inline std::vector<std::string> read_string_list(std::istream& in) {
  std::uint64_t n = read_u64(in);
  std::vector<std::string> v;
  v.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) v.push_back(read_string(in));
  return v;
}
inline std::vector<double> read_vec(std::istream& in) {
  std::uint64_t n = read_u64(in);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("model file truncated");
  return v;
}
inline Matrix read_matrix(std::istream& in) {
  std::uint64_t r = read_u64(in);
  std::uint64_t c = read_u64(in);
  Matrix m(r, c);
  in.read(reinterpret_cast<char*>(m.data().data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw std::runtime_error("model file truncated");
  return m;
}

}  // namespace detail

inline void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out.write("EVDX", 4);
  detail::write_u32(out, Model::kFormatVersion);
  // feature space
  detail::write_u32(out, static_cast<std::uint32_t>(m.feature_space.embedding_dim()));
  detail::write_string_list(out, m.feature_space.vocab_list());
  detail::write_string_list(out, m.feature_space.sparse_list());
  // classifier
  detail::write_matrix(out, m.classifier.embeddings);
  detail::write_matrix(out, m.classifier.class_weights);
  detail::write_matrix(out, m.classifier.sparse_weights);
  detail::write_vec(out, m.classifier.bias);
  // crf
  detail::write_u32(out, static_cast<std::uint32_t>(m.crf.num_blocks));
  detail::write_u32(out, m.crf.condition_transitions ? 1 : 0);
  detail::write_matrix(out, m.crf.emission);
  detail::write_matrix(out, m.crf.projection);
  detail::write_matrix(out, m.crf.salience_w);
  detail::write_matrix(out, m.crf.transition);
  detail::write_vec(out, m.crf.start);
  // config snapshot
  detail::write_f64(out, m.config.lambda_extract);
  detail::write_f64(out, m.config.learning_rate);
  detail::write_u32(out, static_cast<std::uint32_t>(m.config.epochs));
  detail::write_u32(out, static_cast<std::uint32_t>(m.config.batch_size));
  detail::write_u64(out, m.config.seed);
  detail::write_u32(out, static_cast<std::uint32_t>(m.config.patience));
  detail::write_u32(out, static_cast<std::uint32_t>(m.config.emission_mode));
  detail::write_u32(out, static_cast<std::uint32_t>(m.config.conditioning));
  detail::write_u32(out, m.config.class_condition_transitions ? 1 : 0);
  detail::write_u32(out, m.config.include_empty_masks ? 1 : 0);
  detail::write_u32(out, static_cast<std::uint32_t>(m.config.embedding_dim));
  detail::write_u32(out, static_cast<std::uint32_t>(m.config.min_token_freq));
  detail::write_f64(out, m.config.clip_norm);
  detail::write_f64(out, m.config.l2);
  detail::write_f64(out, m.config.embedding_init);
  // model-level fields
  detail::write_u32(out, static_cast<std::uint32_t>(m.variant));
  detail::write_u32(out, static_cast<std::uint32_t>(m.num_classes));
  detail::write_f64(out, m.evidence_fraction);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "EVDX", 4) != 0)
    throw std::runtime_error("not a model file (bad magic): " + path);
  std::uint32_t version = detail::read_u32(in);
  if (version != Model::kFormatVersion)
    throw std::runtime_error("unsupported model format version " +
                             std::to_string(version));
  Model m;
  int dim = static_cast<int>(detail::read_u32(in));
  auto vocab = detail::read_string_list(in);
  auto sparse = detail::read_string_list(in);
  m.feature_space = FeatureSpace::from_lists(std::move(vocab), std::move(sparse), dim);
  m.classifier.embeddings = detail::read_matrix(in);
  m.classifier.class_weights = detail::read_matrix(in);
  m.classifier.sparse_weights = detail::read_matrix(in);
  m.classifier.bias = detail::read_vec(in);
  m.crf.num_blocks = static_cast<int>(detail::read_u32(in));
  m.crf.condition_transitions = detail::read_u32(in) != 0;
  m.crf.emission = detail::read_matrix(in);
  m.crf.projection = detail::read_matrix(in);
  m.crf.salience_w = detail::read_matrix(in);
  m.crf.transition = detail::read_matrix(in);
  m.crf.start = detail::read_vec(in);
  m.config.lambda_extract = detail::read_f64(in);
  m.config.learning_rate = detail::read_f64(in);
  m.config.epochs = static_cast<int>(detail::read_u32(in));
  m.config.batch_size = static_cast<int>(detail::read_u32(in));
  m.config.seed = detail::read_u64(in);
  m.config.patience = static_cast<int>(detail::read_u32(in));
  m.config.emission_mode = static_cast<EmissionMode>(detail::read_u32(in));
  m.config.conditioning = static_cast<Conditioning>(detail::read_u32(in));
  m.config.class_condition_transitions = detail::read_u32(in) != 0;
  m.config.include_empty_masks = detail::read_u32(in) != 0;
  m.config.embedding_dim = static_cast<int>(detail::read_u32(in));
  m.config.min_token_freq = static_cast<int>(detail::read_u32(in));
  m.config.clip_norm = detail::read_f64(in);
  m.config.l2 = detail::read_f64(in);
  m.config.embedding_init = detail::read_f64(in);
  m.variant = static_cast<Variant>(detail::read_u32(in));
  m.num_classes = static_cast<int>(detail::read_u32(in));
  m.evidence_fraction = detail::read_f64(in);
  return m;
}

}  // namespace evidex

#endif  // EVIDEX_SERIALIZE_HPP
