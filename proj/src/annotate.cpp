#include "bsdar/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsdar {

double attention_threshold(std::vector<double> values, double percentile) {
  if (values.empty())
    throw std::invalid_argument("attention threshold of an empty vector");
  std::sort(values.begin(), values.end());
  // Multiply before dividing: integer percentiles then hit exact-percentage
  // boundaries (e.g. 28% of 75) without drifting one rank up.
  auto rank = static_cast<long>(std::ceil(
      percentile * static_cast<double>(values.size()) / 100.0)) - 1;
  rank = std::clamp(rank, 0L, static_cast<long>(values.size()) - 1);
  return values[static_cast<std::size_t>(rank)];
}

std::vector<int> binarize(const std::vector<double>& attention, double tau) {
  std::vector<int> mask(attention.size());
  for (std::size_t i = 0; i < attention.size(); ++i)
    mask[i] = attention[i] > tau ? 1 : -1;
  return mask;
}

AttentionAnnotation extract_annotations(const SourceDocument& doc,
                                        const std::vector<double>& attention,
                                        double percentile, int max_ngram) {
  if (attention.size() != doc.tokens.size())
    throw std::invalid_argument("attention length does not match document");
  if (max_ngram < 1) throw std::invalid_argument("max_ngram must be >= 1");

  double tau = attention_threshold(attention, percentile);
  std::vector<int> mask = binarize(attention, tau);

  AttentionAnnotation annot;
  annot.threshold = tau;
  const int n_pos = static_cast<int>(doc.tokens.size());
  int run_start = 0;
  while (run_start < n_pos) {
    if (mask[static_cast<std::size_t>(run_start)] < 0) {
      ++run_start;
      continue;
    }
    int run_end = run_start;  // inclusive
    while (run_end + 1 < n_pos && mask[static_cast<std::size_t>(run_end + 1)] > 0)
      ++run_end;

    int run_len = run_end - run_start + 1;
    int longest = std::min(run_len, max_ngram);
    for (int start = run_start; start <= run_end; ++start) {
      double sum = 0.0;
      for (int n = 1; n <= longest && start + n - 1 <= run_end; ++n) {
        sum += attention[static_cast<std::size_t>(start + n - 1)];
        TokenSeq ngram(doc.tokens.begin() + start,
                       doc.tokens.begin() + start + n);
        double score = sum / n;  // mean attention over the occurrence positions
        auto [it, inserted] = annot.entries.emplace(std::move(ngram), score);
        if (!inserted && score > it->second) it->second = score;
      }
    }
    run_start = run_end + 1;
  }

  for (const auto& [ngram, score] : annot.entries) {
    annot.max_score = std::max(annot.max_score, score);
    for (TokenId t : ngram) annot.annotated_words.insert(t);
  }
  return annot;
}

}  // namespace bsdar
