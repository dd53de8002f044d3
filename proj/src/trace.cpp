#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bsdar/model.hpp"

namespace bsdar {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, size_t line,
                       const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

TraceData load_trace(const std::string& path, int vocab_size) {
  if (vocab_size <= 0) {
    throw std::invalid_argument("trace vocab_size must be positive");
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path);

  TraceData data;
  data.vocab_size = vocab_size;
  std::string line;
  size_t line_no = 0;
  size_t doc_len = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      fail(path, line_no, e.what());
    }
    if (!rec.is_object() || !rec.contains("prefix") ||
        !rec.contains("log_scores") || !rec.contains("attention")) {
      fail(path, line_no, "record needs prefix, log_scores, attention");
    }

    TokenSeq prefix;
    for (const auto& v : rec["prefix"]) {
      if (!v.is_number_integer()) fail(path, line_no, "non-integer prefix");
      prefix.push_back(v.get<TokenId>());
    }

    StepOutput out;
    out.log_scores.assign(static_cast<size_t>(vocab_size), kTraceFloor);
    for (const auto& [key, value] : rec["log_scores"].items()) {
      size_t pos = 0;
      int idx = 0;
      try {
        idx = std::stoi(key, &pos);
      } catch (const std::exception&) {
        fail(path, line_no, "bad log_scores index '" + key + "'");
      }
      if (pos != key.size() || idx < 0 || idx >= vocab_size) {
        fail(path, line_no, "log_scores index '" + key + "' out of range");
      }
      if (!value.is_number()) fail(path, line_no, "non-numeric log score");
      out.log_scores[static_cast<size_t>(idx)] = value.get<double>();
    }

    for (const auto& v : rec["attention"]) {
      if (!v.is_number()) fail(path, line_no, "non-numeric attention");
      out.attention.push_back(v.get<double>());
    }
    if (doc_len == 0) {
      doc_len = out.attention.size();
    } else if (out.attention.size() != doc_len) {
      fail(path, line_no, "attention length differs between records");
    }
    try {
      validate_step_output(out, vocab_size, out.attention.size());
    } catch (const std::exception& e) {
      fail(path, line_no, e.what());
    }

    if (!data.steps.emplace(std::move(prefix), std::move(out)).second) {
      fail(path, line_no, "duplicate prefix");
    }
  }
  if (data.steps.find(TokenSeq{}) == data.steps.end()) {
    throw std::runtime_error(path + ": trace lacks the empty-prefix record");
  }
  return data;
}

void write_trace(const std::string& path, const TraceData& data) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace file " + path);
  for (const auto& [prefix, step] : data.steps) {
    json rec;
    rec["prefix"] = prefix;
    json scores = json::object();
    for (size_t i = 0; i < step.log_scores.size(); ++i) {
      if (step.log_scores[i] <= kTraceFloor) continue;
      scores[std::to_string(i)] = step.log_scores[i];
    }
    rec["log_scores"] = std::move(scores);
    rec["attention"] = step.attention;
    out << rec.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing trace file " + path);
}

}  // namespace bsdar
