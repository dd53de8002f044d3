#include "bsdar/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace bsdar {

namespace {

std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Gold phrases can repeat across annotators; count each distinct phrase once.
std::vector<TokenSeq> distinct(const std::vector<TokenSeq>& phrases) {
  std::vector<TokenSeq> out;
  std::set<TokenSeq> seen;
  for (const TokenSeq& p : phrases) {
    if (seen.insert(p).second) out.push_back(p);
  }
  return out;
}

size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<size_t> row(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = 0;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

bool contains_contiguous(const TokenSeq& hay, const TokenSeq& needle) {
  if (needle.empty()) {
    throw std::invalid_argument("empty phrase in containment test");
  }
  if (needle.size() > hay.size()) return false;
  for (size_t start = 0; start + needle.size() <= hay.size(); ++start) {
    if (std::equal(needle.begin(), needle.end(),
                   hay.begin() + static_cast<long>(start))) {
      return true;
    }
  }
  return false;
}

GoldSet split_present_absent(const SourceDocument& doc,
                             const std::vector<TokenSeq>& phrases) {
  GoldSet gold;
  gold.doc_id = doc.id;
  gold.phrases = phrases;
  gold.present.reserve(phrases.size());
  for (const TokenSeq& p : phrases) {
    gold.present.push_back(contains_contiguous(doc.tokens, p));
  }
  return gold;
}

RecallCounts recall_counts(const RankedPhrases& preds,
                           const std::vector<TokenSeq>& gold, int k) {
  if (k < 1) throw std::invalid_argument("recall window must be at least 1");
  size_t window = std::min<size_t>(static_cast<size_t>(k), preds.size());
  std::set<TokenSeq> top;
  for (size_t i = 0; i < window; ++i) top.insert(preds[i].tokens);
  RecallCounts counts;
  for (const TokenSeq& g : gold) {
    counts.total += 1;
    if (top.count(g) != 0) counts.matched += 1;
  }
  return counts;
}

double recall_at_k(const RankedPhrases& preds,
                   const std::vector<TokenSeq>& gold, int k) {
  if (gold.empty()) {
    throw std::invalid_argument("recall undefined for empty gold");
  }
  RecallCounts c = recall_counts(preds, gold, k);
  return static_cast<double>(c.matched) / static_cast<double>(c.total);
}

double micro_avg_recall(const std::vector<RankedPhrases>& preds,
                        const std::vector<std::vector<TokenSeq>>& golds,
                        int k) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument("prediction and gold lists differ in length");
  }
  RecallCounts pooled;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (golds[i].empty()) continue;
    RecallCounts c = recall_counts(preds[i], golds[i], k);
    pooled.matched += c.matched;
    pooled.total += c.total;
  }
  if (pooled.total == 0) return 0.0;
  return static_cast<double>(pooled.matched) / static_cast<double>(pooled.total);
}

double rouge_l_f1(const TokenSeq& pred, const TokenSeq& gold) {
  if (pred.empty() || gold.empty()) {
    throw std::invalid_argument("rouge_l_f1 needs non-empty phrases");
  }
  size_t lcs = lcs_length(pred, gold);
  if (lcs == 0) return 0.0;
  double p = static_cast<double>(lcs) / static_cast<double>(pred.size());
  double r = static_cast<double>(lcs) / static_cast<double>(gold.size());
  return 2.0 * p * r / (p + r);
}

double corpus_rouge_l(const std::vector<RankedPhrases>& preds,
                      const std::vector<std::vector<TokenSeq>>& golds) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument("prediction and gold lists differ in length");
  }
  double sum = 0.0;
  long count = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    for (const TokenSeq& g : golds[i]) {
      double best = 0.0;
      for (const RankedPhrase& p : preds[i]) {
        best = std::max(best, rouge_l_f1(p.tokens, g));
      }
      sum += best;
      count += 1;
    }
  }
  if (count == 0) return 0.0;
  return sum / static_cast<double>(count);
}

double diversity_score(const std::vector<TokenSeq>& phrases) {
  if (phrases.empty()) {
    throw std::invalid_argument("diversity undefined for empty phrase list");
  }
  std::set<TokenId> firsts;
  for (const TokenSeq& p : phrases) {
    if (p.empty()) {
      throw std::invalid_argument("diversity undefined for empty phrase");
    }
    firsts.insert(p.front());
  }
  return static_cast<double>(firsts.size()) /
         static_cast<double>(phrases.size());
}

MetricsReport compute_metrics(
    const std::vector<SourceDocument>& docs,
    const std::vector<std::vector<TokenSeq>>& golds,
    const std::vector<std::pair<std::string, std::vector<RankedPhrases>>>&
        mode_results,
    const std::vector<int>& ks) {
  if (docs.size() != golds.size()) {
    throw std::invalid_argument("document and gold lists differ in length");
  }
  MetricsReport report;
  report.ks = ks;
  std::sort(report.ks.begin(), report.ks.end());
  report.ks.erase(std::unique(report.ks.begin(), report.ks.end()),
                  report.ks.end());

  // Evaluated = documents with at least one gold phrase.
  std::vector<size_t> evaluated;
  std::vector<std::vector<TokenSeq>> gold_all(docs.size());
  std::vector<std::vector<TokenSeq>> gold_present(docs.size());
  std::vector<std::vector<TokenSeq>> gold_absent(docs.size());
  std::vector<TokenSeq> gold_pool;
  for (size_t i = 0; i < docs.size(); ++i) {
    gold_all[i] = distinct(golds[i]);
    if (gold_all[i].empty()) {
      report.docs_skipped += 1;
      continue;
    }
    evaluated.push_back(i);
    GoldSet split = split_present_absent(docs[i], gold_all[i]);
    for (size_t g = 0; g < split.phrases.size(); ++g) {
      (split.present[g] ? gold_present : gold_absent)[i].push_back(
          split.phrases[g]);
      gold_pool.push_back(split.phrases[g]);
    }
    report.gold_total += static_cast<long>(gold_all[i].size());
    report.gold_present += static_cast<long>(gold_present[i].size());
    report.gold_absent += static_cast<long>(gold_absent[i].size());
  }
  report.docs_evaluated = static_cast<long>(evaluated.size());
  if (!gold_pool.empty()) report.gold_diversity = diversity_score(gold_pool);

  for (const auto& [mode, preds] : mode_results) {
    if (preds.size() != docs.size()) {
      throw std::invalid_argument("mode " + mode +
                                  " prediction list differs in length");
    }
    ModeMetrics mm;
    mm.mode = mode;
    std::vector<RankedPhrases> eval_preds;
    std::vector<std::vector<TokenSeq>> eval_all, eval_present, eval_absent;
    std::vector<TokenSeq> pred_pool;
    for (size_t i : evaluated) {
      eval_preds.push_back(preds[i]);
      eval_all.push_back(gold_all[i]);
      eval_present.push_back(gold_present[i]);
      eval_absent.push_back(gold_absent[i]);
      size_t window =
          std::min<size_t>(static_cast<size_t>(kDiversityWindow),
                           preds[i].size());
      for (size_t r = 0; r < window; ++r) {
        pred_pool.push_back(preds[i][r].tokens);
      }
    }
    for (int k : report.ks) {
      mm.recall_all[k] = micro_avg_recall(eval_preds, eval_all, k);
      mm.recall_present[k] = micro_avg_recall(eval_preds, eval_present, k);
      mm.recall_absent[k] = micro_avg_recall(eval_preds, eval_absent, k);
    }
    mm.rouge = corpus_rouge_l(eval_preds, eval_all);
    if (!pred_pool.empty()) mm.diversity = diversity_score(pred_pool);
    report.modes.push_back(std::move(mm));
  }
  return report;
}

std::string format_metrics_table(const MetricsReport& report) {
  std::string out;
  out += "# decoding metrics report\n";
  out +=
      "# reference ground-truth first-token diversity (external benchmark "
      "corpora, pooled): 0.942\n";
  auto row = [&out](const std::string& key, const std::string& value) {
    out += key;
    out.append(key.size() < 24 ? 24 - key.size() : 1, ' ');
    out += value;
    out += '\n';
  };
  row("docs_evaluated", std::to_string(report.docs_evaluated));
  row("docs_skipped", std::to_string(report.docs_skipped));
  row("gold_total", std::to_string(report.gold_total));
  row("gold_present", std::to_string(report.gold_present));
  row("gold_absent", std::to_string(report.gold_absent));
  row("gold_diversity", fixed6(report.gold_diversity));
  for (const ModeMetrics& mm : report.modes) {
    out += "mode " + mm.mode + "\n";
    for (int k : report.ks) {
      row("  recall@" + std::to_string(k), fixed6(mm.recall_all.at(k)));
    }
    for (int k : report.ks) {
      row("  present_recall@" + std::to_string(k),
          report.gold_present > 0 ? fixed6(mm.recall_present.at(k)) : "n/a");
    }
    for (int k : report.ks) {
      row("  absent_recall@" + std::to_string(k),
          report.gold_absent > 0 ? fixed6(mm.recall_absent.at(k)) : "n/a");
    }
    row("  rouge_l_f1", fixed6(mm.rouge));
    row("  diversity", fixed6(mm.diversity));
  }
  return out;
}

std::string metrics_records(const MetricsReport& report) {
  std::string out;
  for (const ModeMetrics& mm : report.modes) {
    std::string rec = "{\"mode\":\"" + mm.mode + "\"";
    rec += ",\"docs_evaluated\":" + std::to_string(report.docs_evaluated);
    rec += ",\"docs_skipped\":" + std::to_string(report.docs_skipped);
    rec += ",\"gold_total\":" + std::to_string(report.gold_total);
    rec += ",\"gold_present\":" + std::to_string(report.gold_present);
    rec += ",\"gold_absent\":" + std::to_string(report.gold_absent);
    rec += ",\"gold_diversity\":" + fixed6(report.gold_diversity);
    for (int k : report.ks) {
      rec += ",\"recall@" + std::to_string(k) +
             "\":" + fixed6(mm.recall_all.at(k));
    }
    for (int k : report.ks) {
      rec += ",\"present_recall@" + std::to_string(k) + "\":";
      rec += report.gold_present > 0 ? fixed6(mm.recall_present.at(k))
                                     : "null";
    }
    for (int k : report.ks) {
      rec += ",\"absent_recall@" + std::to_string(k) + "\":";
      rec += report.gold_absent > 0 ? fixed6(mm.recall_absent.at(k)) : "null";
    }
    rec += ",\"rouge_l_f1\":" + fixed6(mm.rouge);
    rec += ",\"diversity\":" + fixed6(mm.diversity);
    rec += "}\n";
    out += rec;
  }
  return out;
}

}  // namespace bsdar
