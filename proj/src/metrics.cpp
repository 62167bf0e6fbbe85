#include "xdeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "xdeval/errors.hpp"

namespace xdeval {

namespace {

void validate_record(const EvaluationRecord& rec) {
  if (rec.domain_tag.empty()) {
    throw ValidationError("record " + rec.task_id + ": domain_tag must be non-empty");
  }
  if (!(rec.latency >= 0.0)) {
    throw ValidationError("record " + rec.task_id + ": latency must be >= 0");
  }
}

void validate_transition(const TransitionRecord& tr) {
  if (tr.segment_accuracies.size() < 2) {
    throw ValidationError("transition " + tr.sequence_id + ": needs >= 2 segments");
  }
  for (const SegmentAccuracy& seg : tr.segment_accuracies) {
    if (!(seg.accuracy >= 0.0 && seg.accuracy <= 1.0)) {
      throw ValidationError("transition " + tr.sequence_id + ": segment accuracy out of [0,1]");
    }
  }
  for (const auto& [tag, acc] : tr.baseline_accuracy_by_domain) {
    if (!(acc >= 0.0 && acc <= 1.0)) {
      throw ValidationError("transition " + tr.sequence_id + ": baseline for \"" + tag +
                            "\" out of [0,1]");
    }
  }
}

}  // namespace

double accuracy(const std::vector<EvaluationRecord>& records, std::string_view domain_tag) {
  std::int64_t matched = 0;
  std::int64_t correct = 0;
  for (const EvaluationRecord& rec : records) {
    validate_record(rec);
    if (rec.domain_tag != domain_tag) continue;
    ++matched;
    if (rec.correct) ++correct;
  }
  if (matched == 0) {
    throw ValidationError("no records match domain_tag \"" + std::string(domain_tag) + "\"");
  }
  return static_cast<double>(correct) / static_cast<double>(matched);
}

double pim(double acc_specialized, double acc_general) {
  if (!(acc_specialized >= 0.0 && acc_specialized <= 1.0) ||
      !(acc_general >= 0.0 && acc_general <= 1.0)) {
    throw ValidationError("pim: accuracies must be in [0,1]");
  }
  if (acc_specialized == 0.0 && acc_general == 0.0) {
    throw ValidationError("pim undefined: both accuracies are zero");
  }
  return (acc_specialized - acc_general) / (acc_specialized + acc_general);
}

double cdcs(double accuracy_after_transition, double baseline_accuracy) {
  if (!(accuracy_after_transition >= 0.0 && accuracy_after_transition <= 1.0)) {
    throw ValidationError("cdcs: accuracy_after_transition out of [0,1]");
  }
  if (!(baseline_accuracy > 0.0 && baseline_accuracy <= 1.0)) {
    throw ValidationError("cdcs undefined: baseline_accuracy must be in (0,1]");
  }
  return accuracy_after_transition / baseline_accuracy;
}

namespace {

// Shared walk over post-first segments. clamp=true gives ars terms,
// clamp=false gives raw cdcs terms.
double mean_over_post_segments(const std::vector<TransitionRecord>& transitions, bool clamp) {
  if (transitions.empty()) throw ValidationError("no transition records");
  double sum = 0.0;
  std::int64_t n = 0;
  for (const TransitionRecord& tr : transitions) {
    validate_transition(tr);
    for (std::size_t i = 1; i < tr.segment_accuracies.size(); ++i) {
      const SegmentAccuracy& seg = tr.segment_accuracies[i];
      auto it = tr.baseline_accuracy_by_domain.find(seg.domain_tag);
      if (it == tr.baseline_accuracy_by_domain.end()) {
        throw ValidationError("transition " + tr.sequence_id + ": no baseline for domain \"" +
                              seg.domain_tag + "\"");
      }
      const double baseline = it->second;
      double term;
      if (baseline == 0.0) {
        if (seg.accuracy > 0.0) {
          throw ValidationError("transition " + tr.sequence_id + ": baseline 0 for domain \"" +
                                seg.domain_tag + "\" with nonzero segment accuracy");
        }
        term = 1.0;  // 0/0: nothing to retain, nothing lost
      } else {
        term = seg.accuracy / baseline;
        if (clamp) term = std::min(1.0, term);
      }
      sum += term;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

}  // namespace

double ars(const std::vector<TransitionRecord>& transitions) {
  return mean_over_post_segments(transitions, /*clamp=*/true);
}

double mean_cdcs(const std::vector<TransitionRecord>& transitions) {
  return mean_over_post_segments(transitions, /*clamp=*/false);
}

MetricsReport aggregate_report(const std::vector<EvaluationRecord>& records,
                               const std::vector<TransitionRecord>& transitions,
                               std::optional<double> dsi_value) {
  std::set<std::string> tags;
  for (const EvaluationRecord& rec : records) {
    validate_record(rec);
    tags.insert(rec.domain_tag);
  }
  std::string missing;
  for (const char* required : {"specialized", "general"}) {
    if (!tags.count(required)) missing += missing.empty() ? required : std::string(", ") + required;
  }
  if (!missing.empty()) {
    throw ValidationError("records missing required domain tags: " + missing);
  }

  MetricsReport report;
  report.accuracy_specialized = accuracy(records, "specialized");
  report.accuracy_general = accuracy(records, "general");
  report.pim = pim(report.accuracy_specialized, report.accuracy_general);
  if (!transitions.empty()) {
    report.cdcs = mean_cdcs(transitions);
    report.ars = ars(transitions);
  }
  std::map<std::string, std::pair<double, std::int64_t>> latency_sums;
  for (const EvaluationRecord& rec : records) {
    auto& [sum, n] = latency_sums[rec.domain_tag];
    sum += rec.latency;
    ++n;
  }
  for (const auto& [tag, sum_n] : latency_sums) {
    report.mean_latency_by_domain[tag] = sum_n.first / static_cast<double>(sum_n.second);
  }
  report.n_records = static_cast<std::int64_t>(records.size());
  report.dsi = dsi_value;
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::vector<EvaluationRecord> read_records_jsonl(const std::string& path) {
  std::vector<EvaluationRecord> records;
  for_each_jsonl(path, [&](std::size_t lineno, const Json& obj) {
    auto where = [&] { return path + ":" + std::to_string(lineno); };
    if (!obj.is_object()) throw ValidationError(where() + ": record must be a JSON object");
    for (const char* field : {"task_id", "domain_tag", "suite_id"}) {
      if (!obj.contains(field) || !obj[field].is_string()) {
        throw ValidationError(where() + ": missing string field \"" + field + "\"");
      }
    }
    if (!obj.contains("correct") || !obj["correct"].is_boolean()) {
      throw ValidationError(where() + ": missing boolean field \"correct\"");
    }
    EvaluationRecord rec;
    rec.task_id = obj["task_id"].get<std::string>();
    rec.domain_tag = obj["domain_tag"].get<std::string>();
    rec.correct = obj["correct"].get<bool>();
    rec.suite_id = obj["suite_id"].get<std::string>();
    if (obj.contains("latency")) {
      if (!obj["latency"].is_number()) throw ValidationError(where() + ": \"latency\" must be a number");
      rec.latency = obj["latency"].get<double>();
    }
    if (obj.contains("annotation") && !obj["annotation"].is_null()) {
      rec.annotation = obj["annotation"].get<std::string>();
    }
    validate_record(rec);
    records.push_back(std::move(rec));
  });
  return records;
}

void write_records_jsonl(const std::vector<EvaluationRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  for (const EvaluationRecord& rec : records) {
    OrderedJson obj;
    obj["task_id"] = rec.task_id;
    obj["domain_tag"] = rec.domain_tag;
    obj["correct"] = rec.correct;
    obj["latency"] = rec.latency;
    obj["suite_id"] = rec.suite_id;
    if (rec.annotation) obj["annotation"] = *rec.annotation;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("failed writing file: " + path);
}

std::vector<TransitionRecord> read_transitions_json(const std::string& path) {
  Json root = load_json_file(path);
  if (!root.is_array()) throw ValidationError(path + ": transitions file must be a JSON array");
  std::vector<TransitionRecord> transitions;
  for (const Json& obj : root) {
    TransitionRecord tr;
    if (!obj.contains("sequence_id") || !obj["sequence_id"].is_string()) {
      throw ValidationError(path + ": transition missing string field \"sequence_id\"");
    }
    tr.sequence_id = obj["sequence_id"].get<std::string>();
    if (!obj.contains("segment_accuracies") || !obj["segment_accuracies"].is_array()) {
      throw ValidationError(path + ": transition " + tr.sequence_id +
                            " missing array \"segment_accuracies\"");
    }
    for (const Json& seg : obj["segment_accuracies"]) {
      tr.segment_accuracies.push_back(
          {seg.at("domain_tag").get<std::string>(), seg.at("accuracy").get<double>()});
    }
    if (obj.contains("baseline_accuracy_by_domain")) {
      for (const auto& [tag, acc] : obj["baseline_accuracy_by_domain"].items()) {
        tr.baseline_accuracy_by_domain[tag] = acc.get<double>();
      }
    }
    validate_transition(tr);
    transitions.push_back(std::move(tr));
  }
  return transitions;
}

void write_transitions_json(const std::vector<TransitionRecord>& transitions,
                            const std::string& path) {
  OrderedJson root = OrderedJson::array();
  for (const TransitionRecord& tr : transitions) {
    OrderedJson obj;
    obj["sequence_id"] = tr.sequence_id;
    obj["segment_accuracies"] = OrderedJson::array();
    for (const SegmentAccuracy& seg : tr.segment_accuracies) {
      obj["segment_accuracies"].push_back({{"domain_tag", seg.domain_tag}, {"accuracy", seg.accuracy}});
    }
    obj["baseline_accuracy_by_domain"] = tr.baseline_accuracy_by_domain;
    root.push_back(std::move(obj));
  }
  write_text_file(path, root.dump(2) + "\n");
}

OrderedJson report_to_json(const MetricsReport& report) {
  OrderedJson obj;
  obj["accuracy_specialized"] = report.accuracy_specialized;
  obj["accuracy_general"] = report.accuracy_general;
  obj["pim"] = report.pim;
  if (report.cdcs) obj["cdcs"] = *report.cdcs;
  if (report.ars) obj["ars"] = *report.ars;
  obj["mean_latency_by_domain"] = report.mean_latency_by_domain;
  obj["n_records"] = report.n_records;
  if (report.dsi) obj["dsi"] = *report.dsi;
  return obj;
}

MetricsReport report_from_json(const Json& obj) {
  MetricsReport report;
  report.accuracy_specialized = obj.at("accuracy_specialized").get<double>();
  report.accuracy_general = obj.at("accuracy_general").get<double>();
  report.pim = obj.at("pim").get<double>();
  if (obj.contains("cdcs")) report.cdcs = obj["cdcs"].get<double>();
  if (obj.contains("ars")) report.ars = obj["ars"].get<double>();
  if (obj.contains("mean_latency_by_domain")) {
    for (const auto& [tag, v] : obj["mean_latency_by_domain"].items()) {
      report.mean_latency_by_domain[tag] = v.get<double>();
    }
  }
  report.n_records = obj.at("n_records").get<std::int64_t>();
  if (obj.contains("dsi")) report.dsi = obj["dsi"].get<double>();
  return report;
}

namespace {

std::string format_number(double v) {
  OrderedJson j = v;  // shortest round-trip formatting, same as the JSON output
  return j.dump();
}

}  // namespace

std::string report_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "accuracy_specialized," << format_number(report.accuracy_specialized) << "\n";
  out << "accuracy_general," << format_number(report.accuracy_general) << "\n";
  out << "pim," << format_number(report.pim) << "\n";
  if (report.cdcs) out << "cdcs," << format_number(*report.cdcs) << "\n";
  if (report.ars) out << "ars," << format_number(*report.ars) << "\n";
  for (const auto& [tag, v] : report.mean_latency_by_domain) {
    out << "mean_latency_" << tag << "," << format_number(v) << "\n";
  }
  out << "n_records," << report.n_records << "\n";
  if (report.dsi) out << "dsi," << format_number(*report.dsi) << "\n";
  return out.str();
}

}  // namespace xdeval
