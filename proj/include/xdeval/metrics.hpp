#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xdeval/jsonl.hpp"

namespace xdeval {

// One graded task item: outcome plus wall-clock latency.
struct EvaluationRecord {
  std::string task_id;
  std::string domain_tag;  // "specialized" | "general" | custom
  bool correct = false;
  double latency = 0.0;  // seconds
  std::string suite_id;
  std::optional<std::string> annotation;
};

struct SegmentAccuracy {
  std::string domain_tag;
  double accuracy = 0.0;
};

// Per-segment accuracies of one cross-domain transition sequence.
struct TransitionRecord {
  std::string sequence_id;
  std::vector<SegmentAccuracy> segment_accuracies;  // >= 2 segments
  std::map<std::string, double> baseline_accuracy_by_domain;
};

struct MetricsReport {
  double accuracy_specialized = 0.0;
  double accuracy_general = 0.0;
  double pim = 0.0;
  std::optional<double> cdcs;  // absent when there are no transitions
  std::optional<double> ars;   // absent when there are no transitions
  std::map<std::string, double> mean_latency_by_domain;
  std::int64_t n_records = 0;
  std::optional<double> dsi;
};

// Fraction of records with the given domain tag that are correct.
double accuracy(const std::vector<EvaluationRecord>& records, std::string_view domain_tag);

// Performance inversion: (spec - gen) / (spec + gen), in [-1, 1].
double pim(double acc_specialized, double acc_general);

// Cross-domain consistency: post-transition accuracy over baseline.
double cdcs(double accuracy_after_transition, double baseline_accuracy);

// Adaptive reasoning: mean over all post-first segments of
// min(1, segment accuracy / domain baseline).
double ars(const std::vector<TransitionRecord>& transitions);

// Unclamped counterpart of ars: mean per-segment cdcs over all post-first
// segments, used for the report-level consistency figure.
double mean_cdcs(const std::vector<TransitionRecord>& transitions);

MetricsReport aggregate_report(const std::vector<EvaluationRecord>& records,
                               const std::vector<TransitionRecord>& transitions,
                               std::optional<double> dsi_value);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::vector<EvaluationRecord> read_records_jsonl(const std::string& path);
void write_records_jsonl(const std::vector<EvaluationRecord>& records, const std::string& path);

std::vector<TransitionRecord> read_transitions_json(const std::string& path);
void write_transitions_json(const std::vector<TransitionRecord>& transitions,
                            const std::string& path);

// Stable key order; optional metrics are omitted, never written as 0.
OrderedJson report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const Json& obj);
std::string report_to_csv(const MetricsReport& report);  // rows of name,value

}  // namespace xdeval
