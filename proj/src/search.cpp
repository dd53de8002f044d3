#include "bsdar/search.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

namespace bsdar {

namespace {

std::vector<int> top_indices(const std::vector<double>& scores, int width) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&scores](int a, int b) {
    if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)]) {
      return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    }
    return a < b;
  };
  auto count = std::min<size_t>(static_cast<size_t>(width), idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(count),
                    idx.end(), better);
  idx.resize(count);
  return idx;
}

void sort_candidates(std::vector<Candidate>& cands) {
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.step_score != b.step_score) {
                return a.step_score > b.step_score;
              }
              return a.token < b.token;
            });
}

bool pool_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.score_sum != b.score_sum) return a.score_sum > b.score_sum;
  return lex_less(a.tokens, b.tokens);
}

// Stop once the budgeted number of completions exists and the beam_size-th
// best completed joint is at least the best live running mean. The mean is
// not an upper bound on a continuation's joint (reward steps can exceed it),
// so this is a practical cutoff, not an admissible one; it is mode-agnostic
// and deterministic.
bool should_stop(const std::vector<Hypothesis>& live,
                 const std::vector<Hypothesis>& results,
                 const DecodeConfig& cfg) {
  if (live.empty()) return true;
  if (results.size() < static_cast<size_t>(cfg.beam_size)) return false;
  std::vector<double> joints;
  joints.reserve(results.size());
  for (const Hypothesis& h : results) joints.push_back(joint_score(h));
  auto kth = joints.begin() + (cfg.beam_size - 1);
  std::nth_element(joints.begin(), kth, joints.end(), std::greater<>());
  double gate = *kth;
  double best_live = -std::numeric_limits<double>::infinity();
  for (const Hypothesis& h : live) {
    best_live =
        std::max(best_live, h.score_sum / static_cast<double>(h.tokens.size()));
  }
  return gate >= best_live;
}

RankedPhrases final_ranking(std::vector<Hypothesis>&& results,
                            const DecodeConfig& cfg) {
  std::vector<CompletedEntry> entries;
  entries.reserve(results.size());
  for (Hypothesis& h : results) {
    TokenSeq content = std::move(h.tokens);
    content.pop_back();  // completed hypotheses end with <end>
    if (content.empty()) continue;  // immediate <end> is not a keyphrase
    entries.push_back(
        {std::move(content), joint_score(h), h.penalized, h.parent_id});
  }
  if (cfg.mode == DecodeMode::kBs) {
    std::sort(entries.begin(), entries.end(), entry_before);
  } else {
    entries = post_intra_rerank(std::move(entries), cfg.post_intra_top);
    entries = post_inter_rerank(std::move(entries), cfg.post_inter_top);
  }
  RankedPhrases out;
  out.reserve(entries.size());
  std::set<TokenSeq> seen;
  for (CompletedEntry& e : entries) {
    if (!seen.insert(e.content).second) continue;
    out.push_back({std::move(e.content), e.joint, e.penalized});
  }
  return out;
}

}  // namespace

std::vector<Candidate> expand_plain(const StepOutput& out, int width,
                                    int parent_index) {
  std::vector<Candidate> cands;
  for (int tok : top_indices(out.log_scores, width)) {
    cands.push_back({parent_index, tok,
                     out.log_scores[static_cast<size_t>(tok)], false});
  }
  return cands;
}

std::vector<Candidate> expand_rewarded(const Hypothesis& parent,
                                       int parent_index,
                                       const SourceDocument& doc,
                                       const StepOutput& out, int width,
                                       const AttentionAnnotation& annot,
                                       double lambda) {
  WordAttentionTable table = build_word_attention(doc, out.attention);
  std::vector<double> augmented =
      word_reward_augment(out.log_scores, table, lambda);

  std::vector<Candidate> cands;
  TokenSeq scratch = parent.tokens;
  scratch.push_back(0);
  for (int tok : top_indices(augmented, width)) {
    double base = augmented[static_cast<size_t>(tok)];
    if (parent.penalized) {
      cands.push_back({parent_index, tok, kPenaltyFloor, true});
      continue;
    }
    SeqClassification cls;
    if (tok == kEndId) {
      cls = classify_completion(parent.tokens, annot);
    } else {
      scratch.back() = tok;
      cls = classify_sequence(scratch, annot);
    }
    AdjustResult adj = ngram_adjust(cls, base, lambda, annot);
    cands.push_back({parent_index, tok, adj.score, adj.penalized});
  }
  sort_candidates(cands);
  return cands;
}

std::vector<Candidate> pre_intra_rank(std::vector<Candidate> cands, int keep) {
  sort_candidates(cands);
  if (cands.size() > static_cast<size_t>(keep)) {
    cands.resize(static_cast<size_t>(keep));
  }
  return cands;
}

bool entry_before(const CompletedEntry& a, const CompletedEntry& b) {
  if (a.joint != b.joint) return a.joint > b.joint;
  return lex_less(a.content, b.content);
}

std::vector<CompletedEntry> post_intra_rerank(std::vector<CompletedEntry> entries,
                                              int keep) {
  std::sort(entries.begin(), entries.end(), entry_before);
  std::map<std::pair<std::int64_t, size_t>, int> taken;
  std::vector<CompletedEntry> out;
  out.reserve(entries.size());
  for (CompletedEntry& e : entries) {
    auto key = std::make_pair(e.parent_id, e.content.size());
    if (taken[key]++ < keep) out.push_back(std::move(e));
  }
  return out;
}

std::vector<CompletedEntry> post_inter_rerank(std::vector<CompletedEntry> entries,
                                              int keep) {
  std::sort(entries.begin(), entries.end(), entry_before);
  std::map<TokenId, int> head_taken;
  std::vector<CompletedEntry> head;
  std::vector<CompletedEntry> tail;
  for (CompletedEntry& e : entries) {
    if (head_taken[e.content.front()]++ < keep) {
      head.push_back(std::move(e));
    } else {
      tail.push_back(std::move(e));
    }
  }
  head.insert(head.end(), std::make_move_iterator(tail.begin()),
              std::make_move_iterator(tail.end()));
  return head;
}

AttentionAnnotation annotation_from_model(const StepModel& model,
                                          const SourceDocument& doc,
                                          const DecodeConfig& cfg) {
  StepOutput out = model.step(doc, TokenSeq{});
  return extract_annotations(doc, out.attention, cfg.percentile,
                             cfg.max_ngram);
}

RankedPhrases decode(const StepModel& model, const SourceDocument& doc,
                     const DecodeConfig& cfg) {
  cfg.validate();
  const bool rewarded = cfg.mode == DecodeMode::kBsdar;
  const bool sibling_ranked = cfg.mode != DecodeMode::kBs;

  std::vector<Hypothesis> live;
  live.emplace_back();
  live.back().id = 0;
  std::int64_t next_id = 1;
  std::vector<Hypothesis> results;
  AttentionAnnotation annot;

  for (int step_t = 0; step_t < cfg.max_steps; ++step_t) {
    if (should_stop(live, results, cfg)) break;
    const int width = step_t == 0 ? cfg.beam_size_t0 : cfg.beam_size;

    std::vector<Candidate> cands;
    for (size_t pi = 0; pi < live.size(); ++pi) {
      const Hypothesis& parent = live[pi];
      StepOutput out;
      try {
        out = model.step(doc, parent.tokens);
      } catch (const std::exception& e) {
        throw std::runtime_error("document " + doc.id + ": " + e.what());
      }
      if (rewarded && step_t == 0) {
        annot = extract_annotations(doc, out.attention, cfg.percentile,
                                    cfg.max_ngram);
      }
      std::vector<Candidate> local =
          rewarded ? expand_rewarded(parent, static_cast<int>(pi), doc, out,
                                     width, annot, cfg.lambda)
                   : expand_plain(out, width, static_cast<int>(pi));
      if (sibling_ranked && step_t > 0) {
        local = pre_intra_rank(std::move(local), cfg.pre_intra_top);
      }
      cands.insert(cands.end(), std::make_move_iterator(local.begin()),
                   std::make_move_iterator(local.end()));
    }

    std::vector<Hypothesis> pool;
    pool.reserve(cands.size());
    for (const Candidate& c : cands) {
      const Hypothesis& parent = live[static_cast<size_t>(c.parent_index)];
      Hypothesis h;
      h.tokens = parent.tokens;
      h.tokens.push_back(c.token);
      h.step_scores = parent.step_scores;
      h.step_scores.push_back(c.step_score);
      h.score_sum = parent.score_sum + c.step_score;
      h.parent_id = parent.id;
      h.penalized = c.penalized;
      h.completed = c.token == kEndId;
      pool.push_back(std::move(h));
    }
    std::sort(pool.begin(), pool.end(), pool_before);
    if (pool.size() > static_cast<size_t>(cfg.num_hyps)) {
      pool.resize(static_cast<size_t>(cfg.num_hyps));
    }

    live.clear();
    for (Hypothesis& h : pool) {
      h.id = next_id++;
      (h.completed ? results : live).push_back(std::move(h));
    }
  }

  return final_ranking(std::move(results), cfg);
}

}  // namespace bsdar
