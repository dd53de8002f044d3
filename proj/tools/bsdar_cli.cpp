// Command line front end: synthetic corpus generation, corpus decoding with
// an oracle or replayed traces, standalone evaluation, config sweeps, and
// annotation dumps.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bsdar/corpus.hpp"
#include "bsdar/engine.hpp"
#include "bsdar/eval.hpp"
#include "bsdar/model.hpp"
#include "bsdar/search.hpp"
#include "bsdar/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Rounds to 6 decimals; +0.0 folds a negative zero back to positive.
double round6(double v) { return std::round(v * 1e6) / 1e6 + 0.0; }

struct LoadedCorpus {
  std::vector<bsdar::CorpusRecord> records;
  bsdar::Vocabulary vocab;
  std::vector<bsdar::SourceDocument> docs;
  std::vector<std::vector<bsdar::TokenSeq>> golds;
};

LoadedCorpus load_corpus(const std::string& path, std::size_t word_cap) {
  LoadedCorpus lc;
  lc.records = bsdar::read_corpus(path);
  if (lc.records.empty()) {
    throw std::runtime_error(path + ": corpus is empty");
  }
  lc.vocab = bsdar::build_vocabulary(lc.records, word_cap);
  lc.docs.reserve(lc.records.size());
  lc.golds.reserve(lc.records.size());
  for (const auto& rec : lc.records) {
    lc.docs.push_back(bsdar::document_from_record(rec, lc.vocab));
    lc.golds.push_back(bsdar::keyphrase_ids(rec, lc.vocab));
  }
  return lc;
}

bsdar::OracleSetModel build_oracle_set(const LoadedCorpus& lc,
                                       const std::string& oracle_path,
                                       int max_prefix_len) {
  bsdar::OracleSpecFile file = bsdar::read_oracle_spec(oracle_path);
  std::map<std::string, const bsdar::DocPhrases*> by_id;
  for (const auto& doc : file.docs) {
    by_id.emplace(doc.doc_id, &doc);
  }
  bsdar::OracleSetModel set;
  for (const auto& doc : lc.docs) {
    auto it = by_id.find(doc.id);
    if (it == by_id.end()) {
      throw std::runtime_error(oracle_path + ": no oracle entry for document " +
                               doc.id);
    }
    bsdar::OracleSpec spec =
        bsdar::resolve_oracle_spec(*it->second, file.params, lc.vocab);
    set.add(doc.id,
            bsdar::OracleModel(static_cast<int>(lc.vocab.size()),
                               std::move(spec), max_prefix_len));
  }
  return set;
}

bsdar::TraceSetModel build_trace_set(const LoadedCorpus& lc,
                                     const std::string& dir) {
  bsdar::TraceSetModel set;
  for (const auto& doc : lc.docs) {
    fs::path p = fs::path(dir) / (doc.id + ".trace.jsonl");
    if (!fs::exists(p)) {
      throw std::runtime_error("no trace for document " + doc.id + ": " +
                               p.string());
    }
    set.add(doc.id,
            bsdar::load_trace(p.string(), static_cast<int>(lc.vocab.size())));
  }
  return set;
}

std::vector<bsdar::DecodeMode> parse_modes(
    const std::vector<std::string>& names) {
  if (names.empty()) {
    throw std::runtime_error("no decode modes given");
  }
  std::vector<bsdar::DecodeMode> modes;
  for (const auto& name : names) {
    bsdar::DecodeMode m = bsdar::mode_from_name(name);
    if (std::find(modes.begin(), modes.end(), m) != modes.end()) {
      throw std::runtime_error("duplicate decode mode " + name);
    }
    modes.push_back(m);
  }
  return modes;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
  out.close();
  if (out.fail()) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

void write_predictions(const fs::path& path, const LoadedCorpus& lc,
                       const std::vector<bsdar::RankedPhrases>& per_doc) {
  std::ostringstream out;
  for (std::size_t i = 0; i < lc.docs.size(); ++i) {
    json line;
    line["id"] = lc.docs[i].id;
    json phrases = json::array();
    for (const auto& rp : per_doc[i]) {
      json p;
      p["penalized"] = rp.penalized;
      p["score"] = round6(rp.score);
      json toks = json::array();
      for (bsdar::TokenId t : rp.tokens) {
        toks.push_back(lc.vocab.word(t));
      }
      p["tokens"] = std::move(toks);
      phrases.push_back(std::move(p));
    }
    line["phrases"] = std::move(phrases);
    out << line.dump() << "\n";
  }
  write_text(path, out.str());
}

std::vector<bsdar::RankedPhrases> read_predictions(const std::string& path,
                                                   const LoadedCorpus& lc) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::map<std::string, bsdar::RankedPhrases> by_id;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    try {
      std::string id = j.at("id").get<std::string>();
      if (by_id.count(id) != 0) {
        throw std::runtime_error("duplicate document " + id);
      }
      bsdar::RankedPhrases phrases;
      for (const auto& pj : j.at("phrases")) {
        bsdar::RankedPhrase rp;
        for (const auto& tj : pj.at("tokens")) {
          std::string w = tj.get<std::string>();
          if (!lc.vocab.contains(w)) {
            throw std::runtime_error("token not in corpus vocabulary: " + w);
          }
          rp.tokens.push_back(lc.vocab.id(w));
        }
        rp.score = pj.at("score").get<double>();
        rp.penalized = pj.at("penalized").get<bool>();
        phrases.push_back(std::move(rp));
      }
      by_id.emplace(std::move(id), std::move(phrases));
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  std::set<std::string> corpus_ids;
  std::vector<bsdar::RankedPhrases> out;
  out.reserve(lc.docs.size());
  for (const auto& doc : lc.docs) {
    corpus_ids.insert(doc.id);
    auto it = by_id.find(doc.id);
    if (it == by_id.end()) {
      throw std::runtime_error(path + ": missing document " + doc.id);
    }
    out.push_back(it->second);
  }
  for (const auto& [id, _] : by_id) {
    if (corpus_ids.count(id) == 0) {
      throw std::runtime_error(path + ": document not in corpus: " + id);
    }
  }
  return out;
}

void write_metrics(const fs::path& out_dir,
                   const bsdar::MetricsReport& report) {
  const std::string table = bsdar::format_metrics_table(report);
  write_text(out_dir / "metrics.txt", table);
  write_text(out_dir / "metrics.jsonl", bsdar::metrics_records(report));
  std::cout << table;
}

// ---------------------------------------------------------------- gen-corpus

struct GenArgs {
  bsdar::GeneratorParams params;
  std::string out_corpus;
  std::string out_oracle;
};

void run_gen(const GenArgs& a) {
  a.params.validate();
  bsdar::GeneratedCorpus gen = bsdar::generate_corpus(a.params);
  bsdar::write_corpus(a.out_corpus, gen.records);
  bsdar::write_oracle_spec(a.out_oracle, gen.oracle);
  std::cout << "wrote " << gen.records.size() << " documents to "
            << a.out_corpus << "\n"
            << "wrote oracle description to " << a.out_oracle << "\n";
}

// -------------------------------------------------------------------- decode

struct DecodeArgs {
  std::string corpus;
  std::string oracle;
  std::string trace_dir;
  std::string out_dir;
  std::string dump_trace;
  std::vector<std::string> modes{"bs", "bs++", "bsdar"};
  std::vector<int> ks{10, 50, 200};
  bsdar::DecodeConfig cfg;
  int workers = 0;
  bool serial = false;
  std::size_t word_cap = 0;
};

void run_decode(const DecodeArgs& a) {
  if (a.oracle.empty() == a.trace_dir.empty()) {
    throw std::runtime_error(
        "exactly one of --oracle and --trace-dir is required");
  }
  bsdar::DecodeConfig cfg = a.cfg;
  cfg.validate();
  LoadedCorpus lc = load_corpus(a.corpus, a.word_cap);
  std::vector<bsdar::DecodeMode> modes = parse_modes(a.modes);

  std::unique_ptr<bsdar::StepModel> model;
  if (!a.oracle.empty()) {
    model = std::make_unique<bsdar::OracleSetModel>(
        build_oracle_set(lc, a.oracle, cfg.max_steps));
  } else {
    model = std::make_unique<bsdar::TraceSetModel>(
        build_trace_set(lc, a.trace_dir));
  }

  std::vector<std::pair<std::string, std::vector<bsdar::RankedPhrases>>>
      mode_results;
  if (!a.dump_trace.empty()) {
    // Recording is stateful, so trace dumps decode serially, one recorder
    // per document shared by every mode.
    fs::create_directories(a.dump_trace);
    for (bsdar::DecodeMode m : modes) {
      mode_results.emplace_back(
          bsdar::mode_name(m),
          std::vector<bsdar::RankedPhrases>(lc.docs.size()));
    }
    for (std::size_t i = 0; i < lc.docs.size(); ++i) {
      bsdar::RecordingModel rec(*model);
      for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        cfg.mode = modes[mi];
        mode_results[mi].second[i] = bsdar::decode(rec, lc.docs[i], cfg);
      }
      bsdar::write_trace(
          (fs::path(a.dump_trace) / (lc.docs[i].id + ".trace.jsonl"))
              .string(),
          rec.recorded());
    }
  } else {
    for (bsdar::DecodeMode m : modes) {
      cfg.mode = m;
      std::vector<bsdar::DocumentResult> res =
          a.serial ? bsdar::decode_corpus(lc.docs, *model, cfg)
                   : bsdar::decode_corpus_parallel(lc.docs, *model, cfg,
                                                   a.workers);
      std::vector<bsdar::RankedPhrases> per_doc;
      per_doc.reserve(res.size());
      for (auto& r : res) {
        per_doc.push_back(std::move(r.phrases));
      }
      mode_results.emplace_back(bsdar::mode_name(m), std::move(per_doc));
    }
  }

  fs::create_directories(a.out_dir);
  for (const auto& [name, per_doc] : mode_results) {
    write_predictions(fs::path(a.out_dir) / ("predictions_" + name + ".jsonl"),
                      lc, per_doc);
  }
  bsdar::MetricsReport report =
      bsdar::compute_metrics(lc.docs, lc.golds, mode_results, a.ks);
  write_metrics(a.out_dir, report);
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
  std::string corpus;
  std::vector<std::string> predictions;  // label=path
  std::vector<int> ks{10, 50, 200};
  std::string out_dir;
  std::size_t word_cap = 0;
};

void run_eval(const EvalArgs& a) {
  LoadedCorpus lc = load_corpus(a.corpus, a.word_cap);
  std::vector<std::pair<std::string, std::vector<bsdar::RankedPhrases>>>
      mode_results;
  std::set<std::string> seen;
  for (const auto& spec : a.predictions) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw std::runtime_error("--predictions wants label=path, got " + spec);
    }
    std::string label = spec.substr(0, eq);
    std::string path = spec.substr(eq + 1);
    if (!seen.insert(label).second) {
      throw std::runtime_error("duplicate predictions label " + label);
    }
    mode_results.emplace_back(label, read_predictions(path, lc));
  }
  bsdar::MetricsReport report =
      bsdar::compute_metrics(lc.docs, lc.golds, mode_results, a.ks);
  if (a.out_dir.empty()) {
    std::cout << bsdar::format_metrics_table(report);
  } else {
    fs::create_directories(a.out_dir);
    write_metrics(a.out_dir, report);
  }
}

// --------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string corpus;
  std::string oracle;
  std::string axis;
  std::vector<int> values;
  std::vector<std::string> modes{"bs", "bs++", "bsdar"};
  std::string out;
  bsdar::DecodeConfig cfg;
  int workers = 0;
  std::size_t word_cap = 0;
};

void run_sweep(const SweepArgs& a) {
  if (a.values.empty()) {
    throw std::runtime_error("--values is empty");
  }
  for (int v : a.values) {
    if (v < 1) {
      throw std::runtime_error("sweep values must be >= 1");
    }
  }
  bsdar::DecodeConfig base = a.cfg;
  base.validate();
  LoadedCorpus lc = load_corpus(a.corpus, a.word_cap);
  std::vector<bsdar::DecodeMode> modes = parse_modes(a.modes);

  int max_prefix_len = base.max_steps;
  if (a.axis == "max-steps") {
    max_prefix_len = std::max(
        max_prefix_len, *std::max_element(a.values.begin(), a.values.end()));
  }
  bsdar::OracleSetModel model = build_oracle_set(lc, a.oracle, max_prefix_len);

  std::ostringstream out;
  out << "# sweep over " << a.axis << "\n";
  out << std::left << std::setw(6) << "mode" << std::right << std::setw(6)
      << "value" << std::setw(12) << "recall@10" << std::setw(12)
      << "recall@50" << std::setw(12) << "diversity" << "\n";
  out << std::fixed << std::setprecision(6);
  for (int v : a.values) {
    bsdar::DecodeConfig cfg = base;
    if (a.axis == "beam-size") {
      cfg.beam_size = v;
      cfg.beam_size_t0 = std::max(cfg.beam_size_t0, v);
      cfg.num_hyps = std::max(cfg.num_hyps, cfg.beam_size_t0);
    } else {
      cfg.max_steps = v;
    }
    for (bsdar::DecodeMode m : modes) {
      cfg.mode = m;
      std::vector<bsdar::DocumentResult> res =
          bsdar::decode_corpus_parallel(lc.docs, model, cfg, a.workers);
      std::vector<std::pair<std::string, std::vector<bsdar::RankedPhrases>>>
          one;
      one.emplace_back(bsdar::mode_name(m), std::vector<bsdar::RankedPhrases>());
      for (auto& r : res) {
        one.back().second.push_back(std::move(r.phrases));
      }
      bsdar::MetricsReport rep =
          bsdar::compute_metrics(lc.docs, lc.golds, one, {10, 50});
      const bsdar::ModeMetrics& mm = rep.modes.front();
      out << std::left << std::setw(6) << mm.mode << std::right << std::setw(6)
          << v << std::setw(12) << mm.recall_all.at(10) << std::setw(12)
          << mm.recall_all.at(50) << std::setw(12) << mm.diversity << "\n";
    }
  }
  std::cout << out.str();
  if (!a.out.empty()) {
    write_text(a.out, out.str());
  }
}

// --------------------------------------------------------- dump-annotations

struct DumpArgs {
  std::string corpus;
  std::string oracle;
  std::string out;
  double percentile = 10.0;
  int max_ngram = 5;
  std::size_t word_cap = 0;
};

void run_dump(const DumpArgs& a) {
  bsdar::DecodeConfig cfg;
  cfg.percentile = a.percentile;
  cfg.max_ngram = a.max_ngram;
  cfg.validate();
  LoadedCorpus lc = load_corpus(a.corpus, a.word_cap);
  // Annotation only queries the empty prefix.
  bsdar::OracleSetModel model = build_oracle_set(lc, a.oracle, 1);
  std::ostringstream out;
  for (const auto& doc : lc.docs) {
    bsdar::AttentionAnnotation annot =
        bsdar::annotation_from_model(model, doc, cfg);
    for (const auto& [ngram, score] : annot.entries) {
      json j;
      j["id"] = doc.id;
      j["ngram"] = ngram;
      j["score"] = round6(score);
      out << j.dump() << "\n";
    }
  }
  if (a.out.empty()) {
    std::cout << out.str();
  } else {
    write_text(a.out, out.str());
  }
}

void add_config_flags(CLI::App* cmd, bsdar::DecodeConfig& cfg) {
  cmd->add_option("--beam-size", cfg.beam_size, "expansion width after step 0")
      ->capture_default_str();
  cmd->add_option("--beam-size-t0", cfg.beam_size_t0,
                  "expansion width at step 0")
      ->capture_default_str();
  cmd->add_option("--num-hyps", cfg.num_hyps, "retained pool per step")
      ->capture_default_str();
  cmd->add_option("--max-steps", cfg.max_steps, "decode step limit")
      ->capture_default_str();
  cmd->add_option("--lambda", cfg.lambda, "attention reward weight")
      ->capture_default_str();
  cmd->add_option("--percentile", cfg.percentile,
                  "attention threshold percentile")
      ->capture_default_str();
  cmd->add_option("--max-ngram", cfg.max_ngram, "longest annotated n-gram")
      ->capture_default_str();
  cmd->add_option("--pre-intra-top", cfg.pre_intra_top,
                  "kept candidates per parent (bs++/bsdar)")
      ->capture_default_str();
  cmd->add_option("--post-intra-top", cfg.post_intra_top,
                  "kept completed per parent and length")
      ->capture_default_str();
  cmd->add_option("--post-inter-top", cfg.post_inter_top,
                  "head slots per first token")
      ->capture_default_str();
}

void add_generator_flags(CLI::App* cmd, bsdar::GeneratorParams& p) {
  cmd->add_option("--num-docs", p.num_docs, "documents to generate")
      ->capture_default_str();
  cmd->add_option("--word-pool", p.word_pool, "distinct word count")
      ->capture_default_str();
  cmd->add_option("--doc-len-min", p.doc_len_min, "shortest document")
      ->capture_default_str();
  cmd->add_option("--doc-len-max", p.doc_len_max, "longest document")
      ->capture_default_str();
  cmd->add_option("--phrases-min", p.phrases_min, "fewest planted phrases")
      ->capture_default_str();
  cmd->add_option("--phrases-max", p.phrases_max, "most planted phrases")
      ->capture_default_str();
  cmd->add_option("--heavy-docs", p.heavy_docs,
                  "leading documents that use the heavy phrase range")
      ->capture_default_str();
  cmd->add_option("--heavy-phrases-min", p.heavy_phrases_min,
                  "fewest phrases in a heavy document")
      ->capture_default_str();
  cmd->add_option("--heavy-phrases-max", p.heavy_phrases_max,
                  "most phrases in a heavy document")
      ->capture_default_str();
  cmd->add_option("--max-phrase-len", p.max_phrase_len, "longest phrase")
      ->capture_default_str();
  cmd->add_option("--absent-per-doc", p.absent_per_doc,
                  "absent gold phrases per document")
      ->capture_default_str();
  cmd->add_option("--attention-gain", p.attention_gain,
                  "oracle attention weight on planted positions")
      ->capture_default_str();
  cmd->add_option("--end-bias", p.end_bias,
                  "oracle end-of-phrase score weight")
      ->capture_default_str();
  cmd->add_option("--distractor-gain", p.distractor_gain,
                  "oracle distractor score weight")
      ->capture_default_str();
  cmd->add_option("--seed", p.seed, "generator seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attention-rewarded beam search keyphrase decoder"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand(
      "gen-corpus", "write a synthetic corpus and its oracle description");
  gen->add_option("--out-corpus", gen_args.out_corpus, "corpus output path")
      ->required();
  gen->add_option("--out-oracle", gen_args.out_oracle,
                  "oracle description output path")
      ->required();
  add_generator_flags(gen, gen_args.params);
  gen->callback([&] { run_gen(gen_args); });

  DecodeArgs dec_args;
  auto* dec = app.add_subcommand("decode",
                                 "decode a corpus and report metrics");
  dec->add_option("--corpus", dec_args.corpus, "corpus path")->required();
  dec->add_option("--oracle", dec_args.oracle, "oracle description path");
  dec->add_option("--trace-dir", dec_args.trace_dir,
                  "directory of per-document trace files");
  dec->add_option("--out-dir", dec_args.out_dir, "output directory")
      ->required();
  dec->add_option("--dump-trace", dec_args.dump_trace,
                  "also record per-document traces into this directory");
  dec->add_option("--modes", dec_args.modes, "decoder modes")
      ->delimiter(',')
      ->capture_default_str();
  dec->add_option("--ks", dec_args.ks, "recall cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  dec->add_option("--workers", dec_args.workers,
                  "decode workers; 0 means BSDAR_WORKERS or hardware")
      ->capture_default_str();
  dec->add_flag("--serial", dec_args.serial, "single-threaded decode");
  dec->add_option("--word-cap", dec_args.word_cap,
                  "vocabulary cap; 0 keeps every word")
      ->capture_default_str();
  add_config_flags(dec, dec_args.cfg);
  dec->callback([&] { run_decode(dec_args); });

  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval",
                                "score prediction files against a corpus");
  ev->add_option("--corpus", eval_args.corpus, "corpus path")->required();
  ev->add_option("--predictions", eval_args.predictions,
                 "label=path, repeatable")
      ->required();
  ev->add_option("--ks", eval_args.ks, "recall cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  ev->add_option("--out-dir", eval_args.out_dir,
                 "output directory; stdout only when omitted");
  ev->add_option("--word-cap", eval_args.word_cap,
                 "vocabulary cap; 0 keeps every word")
      ->capture_default_str();
  ev->callback([&] { run_eval(eval_args); });

  SweepArgs sweep_args;
  auto* sw = app.add_subcommand("sweep",
                                "decode across one config axis and tabulate");
  sw->add_option("--corpus", sweep_args.corpus, "corpus path")->required();
  sw->add_option("--oracle", sweep_args.oracle, "oracle description path")
      ->required();
  sw->add_option("--axis", sweep_args.axis, "swept config field")
      ->required()
      ->check(CLI::IsMember({"beam-size", "max-steps"}));
  sw->add_option("--values", sweep_args.values, "axis values")
      ->required()
      ->delimiter(',');
  sw->add_option("--modes", sweep_args.modes, "decoder modes")
      ->delimiter(',')
      ->capture_default_str();
  sw->add_option("--out", sweep_args.out, "also write the table here");
  sw->add_option("--workers", sweep_args.workers,
                 "decode workers; 0 means BSDAR_WORKERS or hardware")
      ->capture_default_str();
  sw->add_option("--word-cap", sweep_args.word_cap,
                 "vocabulary cap; 0 keeps every word")
      ->capture_default_str();
  add_config_flags(sw, sweep_args.cfg);
  sw->callback([&] { run_sweep(sweep_args); });

  DumpArgs dump_args;
  auto* du = app.add_subcommand("dump-annotations",
                                "write each document's attention annotation");
  du->add_option("--corpus", dump_args.corpus, "corpus path")->required();
  du->add_option("--oracle", dump_args.oracle, "oracle description path")
      ->required();
  du->add_option("--out", dump_args.out,
                 "output path; stdout when omitted");
  du->add_option("--percentile", dump_args.percentile,
                 "attention threshold percentile")
      ->capture_default_str();
  du->add_option("--max-ngram", dump_args.max_ngram,
                 "longest annotated n-gram")
      ->capture_default_str();
  du->add_option("--word-cap", dump_args.word_cap,
                 "vocabulary cap; 0 keeps every word")
      ->capture_default_str();
  du->callback([&] { run_dump(dump_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
