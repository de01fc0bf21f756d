// evidex: train, apply and evaluate classify-then-extract evidence models.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evidex/corpus.hpp"
#include "evidex/eval.hpp"
#include "evidex/serialize.hpp"
#include "evidex/trainer.hpp"

namespace {

using namespace evidex;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const std::string& flag) {
  if (!std::filesystem::exists(path))
    throw UsageError(flag + ": file not found: " + path);
}

Variant parse_variant(const std::string& name) {
  auto v = variant_from_name(name);
  if (!v)
    throw UsageError("--variant: unknown variant '" + name +
                     "' (expected one of classify_only, extract_only, "
                     "classify_extract, classify_extract_predicted, "
                     "classify_extract_oracle, topk_salience)");
  return *v;
}

EmissionMode parse_emission_mode(const std::string& name) {
  if (name == "sparse") return EmissionMode::kSparseOnly;
  if (name == "embeddings") return EmissionMode::kSharedEmbeddings;
  if (name == "salience") return EmissionMode::kSalienceFeature;
  throw UsageError("--emission: expected sparse, embeddings or salience");
}

std::vector<std::size_t> parse_m_grid(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  if (out.empty()) throw UsageError("--m-grid: empty grid");
  return out;
}

std::uint64_t env_seed() {
  const char* env = std::getenv("EVIDEX_SEED");
  if (!env) return 0;
  return std::strtoull(env, nullptr, 10);
}

nlohmann::json spans_json(const std::vector<std::uint8_t>& mask) {
  auto arr = nlohmann::json::array();
  for (const auto& s : mask_to_spans(mask)) arr.push_back({s[0], s[1]});
  return arr;
}

nlohmann::json prediction_json(const Model& model, const Document& doc,
                               bool per_class) {
  Prediction p = predict(model, doc);
  nlohmann::json j;
  j["id"] = doc.id;
  std::string text;
  for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
    if (t) text += ' ';
    text += doc.tokens[t];
  }
  j["text"] = text;
  j["label"] = p.label;
  j["class_probs"] = p.class_probs;
  if (p.evidence) j["evidence"] = spans_json(*p.evidence);
  if (per_class && model.supports_extraction()) {
    auto arr = nlohmann::json::array();
    for (const auto& mask : extract_per_class(model, doc))
      arr.push_back(spans_json(mask));
    j["per_class_spans"] = arr;
  }
  return j;
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// --- subcommands -----------------------------------------------------------

int cmd_synth(const std::string& out_path, const SyntheticConfig& cfg) {
  Corpus corpus = generate_synthetic(cfg);
  save_jsonl(corpus, out_path);
  std::cout << "wrote " << corpus.documents.size() << " documents (n="
            << corpus.num_labeled() << ", m=" << corpus.num_annotated()
            << ") to " << out_path << '\n';
  return 0;
}

int cmd_train(const std::string& train_path, const std::string& dev_path,
              const std::string& model_out, int num_classes,
              const std::string& variant_name_str, const TrainConfig& cfg) {
  Variant variant = parse_variant(variant_name_str);
  require_file(train_path, "--train");
  if (!dev_path.empty()) require_file(dev_path, "--dev");
  Corpus train_corpus = load_jsonl(train_path, num_classes);
  Corpus dev;
  dev.num_classes = num_classes;
  if (!dev_path.empty()) dev = load_jsonl(dev_path, num_classes);
  TrainResult result = train_detailed(train_corpus, dev, cfg, variant);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::cout << "epoch " << e << "  loss " << result.epoch_loss[e];
    if (e < result.dev_metric.size())
      std::cout << "  dev " << result.dev_metric[e];
    std::cout << '\n';
  }
  if (result.best_epoch >= 0)
    std::cout << "best epoch: " << result.best_epoch << '\n';
  save_model(result.model, model_out);
  std::cout << "model written to " << model_out << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& out_path, bool per_class) {
  require_file(model_path, "--model-in");
  require_file(input_path, "--test");
  Model model = load_model(model_path);
  Corpus corpus = load_jsonl(input_path, model.num_classes);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write: " + out_path);
    out = &file;
  }
  for (const auto& doc : corpus.documents) {
    if (doc.tokens.empty()) continue;
    *out << prediction_json(model, doc, per_class).dump() << '\n';
  }
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& test_path,
                 bool extraction, const std::string& out_path,
                 const std::string& train_path, const std::string& dev_path,
                 const std::vector<std::string>& variant_names, int seeds,
                 const TrainConfig& cfg, int num_classes) {
  require_file(test_path, "--test");
  const bool grid_mode = !variant_names.empty();
  if (grid_mode) {
    if (train_path.empty())
      throw UsageError("--variant grid evaluation requires --train");
    std::vector<Variant> variants;
    for (const auto& n : variant_names) variants.push_back(parse_variant(n));
    require_file(train_path, "--train");
    if (!dev_path.empty()) require_file(dev_path, "--dev");
    Corpus train_corpus = load_jsonl(train_path, num_classes);
    Corpus dev;
    dev.num_classes = num_classes;
    if (!dev_path.empty()) dev = load_jsonl(dev_path, num_classes);
    Corpus test = load_jsonl(test_path, num_classes);
    std::vector<GridCell> cells;
    auto rows = ablation_grid(train_corpus, dev, test, variants, seeds, cfg, &cells);
    print_grid(rows, std::cout);
    if (!out_path.empty()) {
      std::ofstream csv(out_path);
      if (!csv) throw std::runtime_error("cannot write: " + out_path);
      write_cells_csv(cells, csv);
    }
    return 0;
  }
  require_file(model_path, "--model-in");
  Model model = load_model(model_path);
  Corpus test = load_jsonl(test_path, model.num_classes);
  if (extraction && test.num_annotated() == 0)
    throw std::runtime_error(
        "--extraction requested but the test corpus carries no gold evidence masks");
  EvalResult res = evaluate_model(model, test);
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "documents: " << test.documents.size() << " (labeled "
            << res.docs_classified << ", annotated " << res.docs_annotated << ")\n";
  if (res.docs_classified > 0)
    std::cout << "accuracy:  " << res.accuracy << '\n';
  if (res.docs_annotated > 0) {
    const auto& x = res.extraction;
    std::cout << "precision: " << x.precision << "\nrecall:    " << x.recall
              << "\nmicro F1:  " << x.f1 << "\nmacro F1:  " << x.macro_f1 << '\n';
    for (std::size_t c = 0; c < x.per_class_f1.size(); ++c)
      std::cout << "F1[class " << c << "]: " << x.per_class_f1[c] << '\n';
  }
  if (!out_path.empty()) {
    std::ofstream csv(out_path);
    if (!csv) throw std::runtime_error("cannot write: " + out_path);
    csv << "accuracy,precision,recall,f1,macro_f1\n"
        << res.accuracy << ',' << res.extraction.precision << ','
        << res.extraction.recall << ',' << res.extraction.f1 << ','
        << res.extraction.macro_f1 << '\n';
  }
  return 0;
}

int cmd_curve(const std::string& train_path, const std::string& dev_path,
              const std::string& test_path, const std::string& m_grid_str,
              const std::vector<std::string>& variant_names, int seeds,
              const TrainConfig& cfg, int num_classes,
              const std::string& out_path) {
  auto m_grid = parse_m_grid(m_grid_str);
  std::vector<Variant> variants;
  for (const auto& n : variant_names) variants.push_back(parse_variant(n));
  if (variants.empty()) variants = {Variant::kClassifyExtractPredicted,
                                    Variant::kExtractOnly};
  require_file(train_path, "--train");
  require_file(test_path, "--test");
  if (!dev_path.empty()) require_file(dev_path, "--dev");
  Corpus train_corpus = load_jsonl(train_path, num_classes);
  Corpus dev;
  dev.num_classes = num_classes;
  if (!dev_path.empty()) dev = load_jsonl(dev_path, num_classes);
  Corpus test = load_jsonl(test_path, num_classes);
  std::vector<GridCell> cells;
  auto points = learning_curve(train_corpus, dev, test, m_grid, variants, seeds,
                               cfg, &cells);
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& p : points)
    std::cout << p.variant << "  m=" << p.m_used << "  F1 " << p.mean_f1
              << " +/- " << p.std_error << " (" << p.seeds << " seeds)\n";
  if (!out_path.empty()) {
    std::ofstream csv(out_path);
    if (!csv) throw std::runtime_error("cannot write: " + out_path);
    write_cells_csv(cells, csv);
  }
  return 0;
}

int cmd_inspect(const std::string& model_path, const std::string& input_path,
                const std::string& format, const std::string& out_path) {
  if (format != "ansi" && format != "html" && format != "json")
    throw UsageError("--format: expected ansi, html or json");
  require_file(model_path, "--model-in");
  require_file(input_path, "--test");
  Model model = load_model(model_path);
  Corpus corpus = load_jsonl(input_path, model.num_classes);
  std::ofstream file;
  std::ostream* outp = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write: " + out_path);
    outp = &file;
  }
  std::ostream& out = *outp;

  if (format == "json") {
    for (const auto& doc : corpus.documents) {
      if (doc.tokens.empty()) continue;
      out << prediction_json(model, doc, true).dump() << '\n';
    }
    return 0;
  }

  if (format == "html") {
    out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
        << "<title>evidence report</title>\n<style>\n"
        << "body{font-family:sans-serif;max-width:60em;margin:2em auto;}\n"
        << ".doc{border-bottom:1px solid #ccc;padding:1em 0;}\n"
        << ".cond{margin:0.4em 0;}\n"
        << ".ev{background:#ffe08a;padding:0 2px;border-radius:2px;}\n"
        << ".meta{color:#666;font-size:0.9em;}\n</style>\n</head>\n<body>\n";
  }
  for (const auto& doc : corpus.documents) {
    if (doc.tokens.empty()) continue;
    Prediction p = predict(model, doc);
    std::vector<std::vector<std::uint8_t>> masks;
    if (model.supports_extraction()) masks = extract_per_class(model, doc);
    if (format == "html") {
      out << "<div class=\"doc\">\n<div class=\"meta\">" << html_escape(doc.id)
          << " &mdash; predicted class " << p.label << "</div>\n";
      for (std::size_t c = 0; c < masks.size(); ++c) {
        out << "<div class=\"cond\"><b>class " << c << ":</b> ";
        for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
          if (t) out << ' ';
          if (masks[c][t])
            out << "<span class=\"ev\">" << html_escape(doc.tokens[t]) << "</span>";
          else
            out << html_escape(doc.tokens[t]);
        }
        out << "</div>\n";
      }
      out << "</div>\n";
    } else {  // ansi
      out << doc.id << " (predicted class " << p.label << ")\n";
      for (std::size_t c = 0; c < masks.size(); ++c) {
        out << "  class " << c << ": ";
        for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
          if (t) out << ' ';
          if (masks[c][t])
            out << "\x1b[43;30m" << doc.tokens[t] << "\x1b[0m";
          else
            out << doc.tokens[t];
        }
        out << '\n';
      }
    }
  }
  if (format == "html") out << "</body>\n</html>\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"classify-then-extract evidence models"};
  app.require_subcommand(1);

  // shared option storage
  std::string train_path, dev_path, test_path, model_in, model_out, out_path;
  std::string variant_str = "classify_extract_predicted";
  std::vector<std::string> variant_list;
  std::string emission = "embeddings";
  std::string format = "ansi";
  std::string m_grid_str;
  int num_classes = 2;
  int seeds = 5;
  bool per_class = false;
  bool extraction = false;
  TrainConfig cfg;
  cfg.seed = env_seed();
  SyntheticConfig synth_cfg;

  auto add_train_opts = [&](CLI::App* sub) {
    sub->add_option("--lambda", cfg.lambda_extract, "extraction loss weight");
    sub->add_option("--lr", cfg.learning_rate, "SGD learning rate");
    sub->add_option("--epochs", cfg.epochs, "training epochs");
    sub->add_option("--batch", cfg.batch_size, "mini-batch size");
    sub->add_option("--l2", cfg.l2, "decoupled weight decay");
    sub->add_option("--seed", cfg.seed, "random seed (EVIDEX_SEED fallback)");
    sub->add_option("--patience", cfg.patience, "early stopping patience (0 = off)");
    sub->add_option("--emission", emission, "emission mode: sparse|embeddings|salience");
    sub->add_option("--dim", cfg.embedding_dim, "embedding dimension");
    sub->add_flag("--condition-transitions", cfg.class_condition_transitions,
                  "class-condition transition weights too");
    sub->add_flag("--skip-empty-masks",
                  [&cfg](std::int64_t) { cfg.include_empty_masks = false; },
                  "drop all-zero evidence masks from the extraction loss");
    sub->add_option("--classes", num_classes, "number of classes");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", out_path, "output JSONL path")->required();
  synth->add_option("--n", synth_cfg.n, "documents");
  synth->add_option("--m", synth_cfg.m, "annotated documents");
  synth->add_option("--classes", synth_cfg.num_classes, "number of classes");
  synth->add_option("--evidence-rate", synth_cfg.evidence_rate, "evidence token rate");
  synth->add_option("--noise-rate", synth_cfg.noise_rate, "cross-class distractor token rate");
  synth->add_option("--seed", synth_cfg.seed, "generator seed");

  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--train", train_path, "training corpus (JSONL)")->required();
  train_cmd->add_option("--dev", dev_path, "development corpus (JSONL)");
  train_cmd->add_option("--model-out", model_out, "output model path")->required();
  train_cmd->add_option("--variant", variant_str, "training variant");
  add_train_opts(train_cmd);

  auto* predict_cmd = app.add_subcommand("predict", "label and extract evidence");
  predict_cmd->add_option("--model-in", model_in, "model path")->required();
  predict_cmd->add_option("--test", test_path, "input corpus (JSONL)")->required();
  predict_cmd->add_option("--out", out_path, "output JSONL (default stdout)");
  predict_cmd->add_flag("--per-class", per_class, "emit spans for every class");

  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a model or run the ablation grid");
  eval_cmd->add_option("--model-in", model_in, "model path (single-model mode)");
  eval_cmd->add_option("--test", test_path, "test corpus (JSONL)")->required();
  eval_cmd->add_flag("--extraction", extraction, "require gold evidence masks");
  eval_cmd->add_option("--out", out_path, "CSV output path");
  eval_cmd->add_option("--train", train_path, "training corpus (grid mode)");
  eval_cmd->add_option("--dev", dev_path, "development corpus (grid mode)");
  eval_cmd->add_option("--variant", variant_list, "grid variants (repeatable)");
  eval_cmd->add_option("--seeds", seeds, "seeds per grid cell");
  add_train_opts(eval_cmd);

  auto* curve_cmd = app.add_subcommand("curve", "learning curve over annotation budgets");
  curve_cmd->add_option("--train", train_path, "training corpus")->required();
  curve_cmd->add_option("--dev", dev_path, "development corpus");
  curve_cmd->add_option("--test", test_path, "test corpus")->required();
  curve_cmd->add_option("--m-grid", m_grid_str, "comma-separated annotation budgets")->required();
  curve_cmd->add_option("--variant", variant_list, "variants (repeatable)");
  curve_cmd->add_option("--seeds", seeds, "seeds per point");
  curve_cmd->add_option("--out", out_path, "CSV output path");
  add_train_opts(curve_cmd);

  auto* inspect_cmd = app.add_subcommand("inspect", "render highlighted evidence");
  inspect_cmd->add_option("--model-in", model_in, "model path")->required();
  inspect_cmd->add_option("--test", test_path, "input corpus")->required();
  inspect_cmd->add_option("--format", format, "ansi|html|json");
  inspect_cmd->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    cfg.emission_mode = parse_emission_mode(emission);
    if (synth->parsed()) return cmd_synth(out_path, synth_cfg);
    if (train_cmd->parsed())
      return cmd_train(train_path, dev_path, model_out, num_classes, variant_str, cfg);
    if (predict_cmd->parsed())
      return cmd_predict(model_in, test_path, out_path, per_class);
    if (eval_cmd->parsed())
      return cmd_evaluate(model_in, test_path, extraction, out_path, train_path,
                          dev_path, variant_list, seeds, cfg, num_classes);
    if (curve_cmd->parsed())
      return cmd_curve(train_path, dev_path, test_path, m_grid_str, variant_list,
                       seeds, cfg, num_classes, out_path);
    if (inspect_cmd->parsed())
      return cmd_inspect(model_in, test_path, format, out_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
