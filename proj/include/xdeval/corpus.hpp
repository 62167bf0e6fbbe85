#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace xdeval {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> label;
  std::optional<std::string> domain_tag;
};

// Aggregate token statistics for one corpus.
struct TermStats {
  std::map<std::string, std::int64_t> counts;
  std::int64_t total_tokens = 0;
  std::int64_t vocab_size = 0;
  std::int64_t doc_count = 0;
  std::map<std::string, std::int64_t> doc_frequency;
};

// Knobs of the over-representation test that defines a specialized term.
struct SpecializationParams {
  double ratio_threshold = 5.0;  // smoothed frequency ratio floor, > 1
  std::int64_t min_count = 3;    // absolute occurrence floor in the target
  double smoothing = 1.0;        // Laplace alpha, > 0

  void validate() const;
};

struct DsiResult {
  double dsi = 0.0;  // fraction of token occurrences that are specialized
  std::set<std::string> specialized_terms;
  std::int64_t specialized_token_occurrences = 0;
  std::int64_t total_tokens = 0;
};

// Lowercased maximal runs of alphanumeric characters that contain at least
// one letter. Bytes >= 0x80 are kept verbatim and count as letters; only
// ASCII is case-folded.
std::vector<std::string> tokenize(std::string_view text);

TermStats build_term_stats(const std::vector<Document>& docs);

// Tokens over-represented in `target` relative to `reference`: occurrence
// count >= min_count and smoothed frequency ratio >= ratio_threshold, where
// both frequencies are normalized over the union vocabulary.
std::set<std::string> specialized_terms(const TermStats& target, const TermStats& reference,
                                        const SpecializationParams& params);

// Domain Specificity Index of `target_docs` against `reference`: the share
// of token occurrences (not vocabulary types) that belong to specialized
// terms.
DsiResult dsi(const std::vector<Document>& target_docs, const TermStats& reference,
              const SpecializationParams& params);

// JSON Lines I/O: one Document per line, fields id/text/label/domain_tag,
// unknown fields ignored.
std::vector<Document> read_documents_jsonl(const std::string& path);
void write_documents_jsonl(const std::vector<Document>& docs, const std::string& path);

}  // namespace xdeval
