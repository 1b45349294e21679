#include "cli.hpp"

#include "transrank/dump_format.hpp"
#include "transrank/error.hpp"
#include "transrank/fixtures.hpp"
#include "transrank/metrics.hpp"
#include "transrank/ranker.hpp"
#include "transrank/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace transrank::cli {
namespace {

using nlohmann::json;

struct EstimatorFlags {
  std::string estimator = "hscore";
  std::string aggregation = "layermean";
  std::string word_pooling = "mean";
  std::string sentence_pooling;
  std::string shrinkage = "ledoit_wolf";
  double downsample = 1.0;
  std::uint64_t seed = 42;
  std::size_t knn_k = 3;
  std::size_t knn_batch_size = 1024;
  bool include_embedding_layer = false;

  RankerConfig to_config() const {
    RankerConfig cfg;
    cfg.estimator.kind = parse_estimator(estimator);
    cfg.estimator.knn.k = knn_k;
    cfg.estimator.knn.batch_size = knn_batch_size;
    cfg.estimator.knn.threads = 0;
    cfg.estimator.hscore.shrinkage = parse_shrinkage(shrinkage);
    cfg.aggregation.strategy = parse_layer_strategy(aggregation);
    cfg.aggregation.include_embedding_layer = include_embedding_layer;
    cfg.word_pooling = parse_word_pooling(word_pooling);
    if (!sentence_pooling.empty()) {
      cfg.sentence_pooling = parse_sentence_pooling(sentence_pooling);
    }
    cfg.downsample_fraction = downsample;
    cfg.seed = seed;
    return cfg;
  }
};

void add_estimator_flags(CLI::App& cmd, EstimatorFlags& f) {
  cmd.add_option("--estimator", f.estimator, "Transferability estimator")
      ->check(CLI::IsMember({"hscore", "logme", "knn"}))
      ->capture_default_str();
  cmd.add_option("--aggregation,--layer-aggregation", f.aggregation,
                 "Layer aggregation")
      ->check(CLI::IsMember({"lastlayer", "layermean", "bestlayer"}))
      ->capture_default_str();
  cmd.add_option("--downsample,--dataset-downsample", f.downsample,
                 "Fraction of items kept, in (0, 1]")
      ->capture_default_str();
  cmd.add_option("--seed", f.seed, "Seed for downsampling")->capture_default_str();
  cmd.add_option("--knn-k", f.knn_k, "Neighbours for the kNN estimator")
      ->capture_default_str();
  cmd.add_option("--knn-batch-size,--batch-size", f.knn_batch_size,
                 "Rows per kNN distance block")
      ->capture_default_str();
  cmd.add_flag("--include-embedding-layer", f.include_embedding_layer,
               "Let layer 0 take part in layermean/bestlayer");
  cmd.add_option("--word-pooling", f.word_pooling, "Subword to word pooling")
      ->check(CLI::IsMember({"first", "mean"}))
      ->capture_default_str();
  cmd.add_option("--sentence-pooling", f.sentence_pooling,
                 "Word to sentence pooling (sequence tasks; default mean)")
      ->check(CLI::IsMember({"first", "mean", "last"}));
  cmd.add_option("--shrinkage", f.shrinkage, "Covariance shrinkage for hscore")
      ->check(CLI::IsMember({"ledoit_wolf", "none"}))
      ->capture_default_str();
}

void add_output_flags(CLI::App& cmd, std::string& format, std::string& output) {
  cmd.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd.add_option("--output", output, "Write to FILE instead of stdout");
}

void emit(const std::string& text, const std::string& output, std::ostream& out) {
  if (output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(output, std::ios::binary);
  if (!file) throw IoError("cannot write '" + output + "'");
  file << text;
  if (!file) throw IoError("write to '" + output + "' failed");
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int cmd_rank(const EstimatorFlags& flags, const std::string& dir,
             const std::string& format, const std::string& output, std::ostream& out) {
  const RankerConfig cfg = flags.to_config();
  cfg.validate();
  const auto dumps = find_dumps(dir);
  if (dumps.empty()) throw IoError("no .trdf files in '" + dir + "'");
  const RankingResult result = rank(dumps, cfg);
  emit(format == "json" ? to_json(result).dump(2) + "\n" : format_ranking(result),
       output, out);
  return 0;
}

int cmd_score(const EstimatorFlags& flags, const std::string& file,
              const std::string& format, const std::string& output, std::ostream& out) {
  const RankerConfig cfg = flags.to_config();
  cfg.validate();
  DumpReader reader = DumpReader::open(file);
  const auto retained =
      downsample(reader.header().num_items, cfg.downsample_fraction, cfg.seed);
  ModelScore score = score_model(reader, cfg, retained);
  score.source = file;
  if (format == "json") {
    json j = to_json(score);
    j["config"] = to_json(cfg);
    emit(j.dump(2) + "\n", output, out);
  } else {
    emit(format_model_score(score), output, out);
  }
  return 0;
}

int cmd_eval(const std::string& predicted, const std::string& gold,
             const std::string& format, const std::string& output, std::ostream& out) {
  const auto report =
      correlate(scores_from_json(load_json(predicted)), scores_from_json(load_json(gold)));
  if (format == "json") {
    const json j = {{"pearson_rho", report.pearson_rho},
                    {"weighted_kendall_tau", report.weighted_kendall_tau},
                    {"n_models", report.n_models},
                    {"missing_models", report.missing_models}};
    emit(j.dump(2) + "\n", output, out);
    return 0;
  }
  std::string text = "models: " + std::to_string(report.n_models) + "\n" +
                     "pearson_rho: " + fixed(report.pearson_rho) + "\n" +
                     "weighted_kendall_tau: " + fixed(report.weighted_kendall_tau) + "\n";
  std::string missing;
  for (const auto& m : report.missing_models) missing += (missing.empty() ? "" : ", ") + m;
  text += "missing: " + (missing.empty() ? std::string("none") : missing) + "\n";
  emit(text, output, out);
  return 0;
}

struct Range {
  std::uint64_t min = UINT64_MAX;
  std::uint64_t max = 0;
  std::uint64_t sum = 0;

  void add(std::uint64_t v) {
    min = std::min(min, v);
    max = std::max(max, v);
    sum += v;
  }
  std::string describe(std::uint64_t count) const {
    return "min " + std::to_string(min) + ", mean " +
           fixed(static_cast<double>(sum) / static_cast<double>(count)) + ", max " +
           std::to_string(max);
  }
};

int cmd_inspect(const std::string& file, std::ostream& out) {
  DumpReader reader = DumpReader::open(file);
  const DumpHeader& h = reader.header();
  Range tokens;
  Range words;
  std::uint64_t special = 0;
  std::vector<std::uint64_t> label_counts(h.label_names.size(), 0);
  while (auto r = reader.next()) {
    tokens.add(r->num_tokens);
    words.add(r->num_words);
    special += static_cast<std::uint64_t>(
        std::count(r->word_ids.begin(), r->word_ids.end(), -1));
    for (const auto l : r->labels) ++label_counts[l];
  }

  std::ostringstream s;
  s << "header: " << h.to_json() << "\n";
  s << "model_name: " << h.model_name << "\n";
  s << "task_type: " << to_string(h.task_type) << "\n";
  s << "num_items: " << h.num_items << "\n";
  s << "num_layers: " << h.num_layers << "\n";
  s << "hidden_dim: " << h.hidden_dim << "\n";
  s << "dtype: " << h.dtype << "\n";
  s << "tokens per item: " << tokens.describe(h.num_items) << "\n";
  s << "words per item: " << words.describe(h.num_items) << "\n";
  s << "special tokens: " << special << "\n";
  s << "label counts:";
  for (std::size_t c = 0; c < label_counts.size(); ++c) {
    s << " " << h.label_names[c] << "=" << label_counts[c];
  }
  s << "\n";
  out << s.str();
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank pre-trained language models by transferability of their "
               "frozen hidden states."};
  app.name("transrank");
  app.require_subcommand(1);

  EstimatorFlags rank_flags;
  std::string embeddings_dir;
  std::string rank_format = "text";
  std::string rank_output;
  auto* rank_cmd = app.add_subcommand("rank", "Rank every dump in a directory");
  rank_cmd->add_option("--embeddings-dir", embeddings_dir, "Directory of .trdf dumps")
      ->required();
  add_estimator_flags(*rank_cmd, rank_flags);
  add_output_flags(*rank_cmd, rank_format, rank_output);

  EstimatorFlags score_flags;
  std::string score_file;
  std::string score_format = "text";
  std::string score_output;
  auto* score_cmd = app.add_subcommand("score", "Score a single dump");
  score_cmd->add_option("--file", score_file, "TRDF dump")->required();
  add_estimator_flags(*score_cmd, score_flags);
  add_output_flags(*score_cmd, score_format, score_output);

  std::string predicted;
  std::string gold;
  std::string eval_format = "text";
  std::string eval_output;
  auto* eval_cmd =
      app.add_subcommand("eval", "Correlate estimated scores with fine-tuned scores");
  eval_cmd->add_option("--predicted", predicted,
                       "Ranking JSON report or {model: score} object")
      ->required();
  eval_cmd->add_option("--gold", gold, "{model: fine-tuned score} object")->required();
  add_output_flags(*eval_cmd, eval_format, eval_output);

  std::string inspect_file;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print a dump's header and statistics");
  inspect_cmd->add_option("--file", inspect_file, "TRDF dump")->required();

  FixtureSpec fixture;
  std::string fixture_out;
  std::string fixture_task = "sequence";
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Write a synthetic dump");
  fixtures_cmd->group("");
  fixtures_cmd->add_option("--out", fixture_out, "Output file")->required();
  fixtures_cmd->add_option("--name", fixture.model_name)->capture_default_str();
  fixtures_cmd->add_option("--task", fixture_task)
      ->check(CLI::IsMember({"token", "sequence"}))
      ->capture_default_str();
  fixtures_cmd->add_option("--items", fixture.n_items)->capture_default_str();
  fixtures_cmd->add_option("--classes", fixture.n_classes)->capture_default_str();
  fixtures_cmd->add_option("--dim", fixture.hidden_dim)->capture_default_str();
  fixtures_cmd->add_option("--layers", fixture.n_layers)->capture_default_str();
  fixtures_cmd->add_option("--signal-layer", fixture.signal_layer)->capture_default_str();
  fixtures_cmd->add_option("--snr", fixture.signal_to_noise)->capture_default_str();
  fixtures_cmd->add_option("--seed", fixture.seed)->capture_default_str();
  fixtures_cmd->add_option("--label-seed", fixture.label_seed)->capture_default_str();
  fixtures_cmd->add_option("--words", fixture.words_per_item)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*rank_cmd) {
      return cmd_rank(rank_flags, embeddings_dir, rank_format, rank_output, out);
    }
    if (*score_cmd) {
      return cmd_score(score_flags, score_file, score_format, score_output, out);
    }
    if (*eval_cmd) return cmd_eval(predicted, gold, eval_format, eval_output, out);
    if (*inspect_cmd) return cmd_inspect(inspect_file, out);
    if (*fixtures_cmd) {
      fixture.task_type = parse_task_type(fixture_task);
      fixture.validate();
      std::ofstream file(fixture_out, std::ios::binary);
      if (!file) throw IoError("cannot write '" + fixture_out + "'");
      write_fixture(fixture, file);
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace transrank::cli
