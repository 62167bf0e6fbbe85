#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "xdeval/metrics.hpp"

namespace xdeval {

struct TaskSegment {
  std::string domain_tag;
  std::string data_ref;  // resolved against the manifest directory at load time
};

struct TaskSpec {
  std::string task_id;
  std::string kind;  // "single" | "transition"
  std::string domain_tag;            // single tasks
  std::string data_ref;              // single tasks
  std::vector<TaskSegment> segments;  // transition tasks, >= 2
  std::string grading = "exact_match";
};

struct SuiteManifest {
  std::string suite_id;
  std::vector<TaskSpec> tasks;
  std::map<std::string, double> baselines;  // optional; derived from single tasks when absent
};

struct TaskItem {
  std::string item_id;
  std::string prompt;
  std::string expected;
};

struct AdapterSpec {
  std::string mode;  // "offline" | "subprocess"
  std::string predictions_path;
  std::string command;
  double timeout_seconds = 10.0;
};

SuiteManifest load_manifest(const std::string& path);
std::vector<TaskItem> read_task_items_jsonl(const std::string& path);
AdapterSpec load_adapter_spec(const std::string& path);

// trim + ASCII lowercase + collapse internal whitespace runs to one space
std::string normalize_answer(std::string_view raw);

// One model behind a uniform ask/answer surface. Offline replays a
// predictions file; subprocess speaks line-delimited JSON over stdin/stdout
// with one request in flight.
class Adapter {
public:
  struct Reply {
    bool answered = false;
    std::string answer;
    std::string flag;  // "timeout" | "missing" when not answered
    double latency = 0.0;
  };

  virtual ~Adapter() = default;
  virtual Reply ask(const TaskItem& item) = 0;
};

std::unique_ptr<Adapter> make_adapter(const AdapterSpec& spec);

struct SuiteRun {
  std::vector<EvaluationRecord> records;
  std::vector<TransitionRecord> transitions;
};

// Grades every item of every task. Single tasks run before transition tasks
// so that per-domain baselines can be derived from this run when the
// manifest does not pin them.
SuiteRun run_suite(const SuiteManifest& manifest, Adapter& adapter);

// Writes report.json / report.csv (and optionally records.jsonl +
// transitions.json) under out_dir; returns the report path.
std::string emit_report(const MetricsReport& report, const SuiteRun& run,
                        const std::string& out_dir, const std::string& format,
                        bool dump_records);

}  // namespace xdeval
