#include "xdeval/harness.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "xdeval/errors.hpp"
#include "xdeval/jsonl.hpp"

namespace xdeval {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Manifest and task items
// ---------------------------------------------------------------------------

namespace {

std::string resolve_ref(const fs::path& base_dir, const std::string& ref) {
  fs::path p(ref);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (base_dir / p).lexically_normal().string();
}

void require_file(const std::string& path, const std::string& task_id) {
  if (!fs::exists(path)) {
    throw IoError("task " + task_id + ": data file not found: " + path);
  }
}

}  // namespace

SuiteManifest load_manifest(const std::string& path) {
  const Json root = load_json_file(path);
  if (!root.is_object()) throw ValidationError(path + ": manifest must be a JSON object");
  if (!root.contains("suite_id") || !root["suite_id"].is_string() ||
      root["suite_id"].get<std::string>().empty()) {
    throw ValidationError(path + ": manifest needs a non-empty string \"suite_id\"");
  }
  SuiteManifest manifest;
  manifest.suite_id = root["suite_id"].get<std::string>();
  if (root.contains("baselines")) {
    for (const auto& [tag, acc] : root["baselines"].items()) {
      const double v = acc.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(path + ": baseline for \"" + tag + "\" out of [0,1]");
      }
      manifest.baselines[tag] = v;
    }
  }
  if (!root.contains("tasks") || !root["tasks"].is_array()) {
    throw ValidationError(path + ": manifest needs a \"tasks\" array");
  }

  const fs::path base_dir = fs::path(path).parent_path();
  std::unordered_set<std::string> seen_ids;
  for (const Json& t : root["tasks"]) {
    TaskSpec task;
    if (!t.contains("task_id") || !t["task_id"].is_string()) {
      throw ValidationError(path + ": task missing string field \"task_id\"");
    }
    task.task_id = t["task_id"].get<std::string>();
    if (!seen_ids.insert(task.task_id).second) {
      throw ValidationError(path + ": duplicate task_id \"" + task.task_id + "\"");
    }
    task.kind = t.value("kind", "");
    task.grading = t.value("grading", "exact_match");
    if (task.grading != "exact_match") {
      throw ValidationError(path + ": task " + task.task_id + ": unsupported grading \"" +
                            task.grading + "\" (only \"exact_match\")");
    }
    if (task.kind == "single") {
      if (!t.contains("domain_tag") || !t["domain_tag"].is_string() ||
          t["domain_tag"].get<std::string>().empty()) {
        throw ValidationError(path + ": single task " + task.task_id + " needs a domain_tag");
      }
      task.domain_tag = t["domain_tag"].get<std::string>();
      if (!t.contains("data_ref") || !t["data_ref"].is_string()) {
        throw ValidationError(path + ": single task " + task.task_id + " needs a data_ref");
      }
      task.data_ref = resolve_ref(base_dir, t["data_ref"].get<std::string>());
      require_file(task.data_ref, task.task_id);
    } else if (task.kind == "transition") {
      if (!t.contains("segments") || !t["segments"].is_array() || t["segments"].size() < 2) {
        throw ValidationError(path + ": transition task " + task.task_id +
                              " needs >= 2 segments");
      }
      for (const Json& seg : t["segments"]) {
        TaskSegment segment;
        segment.domain_tag = seg.at("domain_tag").get<std::string>();
        if (segment.domain_tag.empty()) {
          throw ValidationError(path + ": transition task " + task.task_id +
                                ": segment domain_tag must be non-empty");
        }
        segment.data_ref = resolve_ref(base_dir, seg.at("data_ref").get<std::string>());
        require_file(segment.data_ref, task.task_id);
        task.segments.push_back(std::move(segment));
      }
    } else {
      throw ValidationError(path + ": task " + task.task_id + ": kind must be \"single\" or \"transition\"");
    }
    manifest.tasks.push_back(std::move(task));
  }
  return manifest;
}

std::vector<TaskItem> read_task_items_jsonl(const std::string& path) {
  std::vector<TaskItem> items;
  std::unordered_set<std::string> seen;
  for_each_jsonl(path, [&](std::size_t lineno, const Json& obj) {
    auto where = [&] { return path + ":" + std::to_string(lineno); };
    TaskItem item;
    if (!obj.contains("item_id") || !obj["item_id"].is_string()) {
      throw ValidationError(where() + ": missing string field \"item_id\"");
    }
    item.item_id = obj["item_id"].get<std::string>();
    if (!seen.insert(item.item_id).second) {
      throw ValidationError(where() + ": duplicate item_id \"" + item.item_id + "\"");
    }
    item.prompt = obj.value("prompt", "");
    if (!obj.contains("expected") || !obj["expected"].is_string() ||
        obj["expected"].get<std::string>().empty()) {
      throw ValidationError(where() + ": \"expected\" must be a non-empty string");
    }
    item.expected = obj["expected"].get<std::string>();
    items.push_back(std::move(item));
  });
  return items;
}

AdapterSpec load_adapter_spec(const std::string& path) {
  const Json root = load_json_file(path);
  if (!root.is_object()) throw ValidationError(path + ": adapter spec must be a JSON object");
  AdapterSpec spec;
  spec.mode = root.value("mode", "");
  const fs::path base_dir = fs::path(path).parent_path();
  if (spec.mode == "offline") {
    if (!root.contains("predictions_path") || root.contains("command")) {
      throw ValidationError(path + ": offline adapter needs predictions_path and no command");
    }
    spec.predictions_path = resolve_ref(base_dir, root["predictions_path"].get<std::string>());
  } else if (spec.mode == "subprocess") {
    if (!root.contains("command") || root.contains("predictions_path")) {
      throw ValidationError(path + ": subprocess adapter needs command and no predictions_path");
    }
    spec.command = root["command"].get<std::string>();
    if (root.contains("timeout_seconds")) {
      spec.timeout_seconds = root["timeout_seconds"].get<double>();
    }
    if (!(spec.timeout_seconds > 0.0)) {
      throw ValidationError(path + ": timeout_seconds must be > 0");
    }
  } else {
    throw ValidationError(path + ": mode must be \"offline\" or \"subprocess\"");
  }
  return spec;
}

std::string normalize_answer(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c | 0x20) : ch);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adapters
// ---------------------------------------------------------------------------

namespace {

class OfflineAdapter final : public Adapter {
public:
  explicit OfflineAdapter(const std::string& predictions_path) {
    for_each_jsonl(predictions_path, [&](std::size_t lineno, const Json& obj) {
      auto where = [&] { return predictions_path + ":" + std::to_string(lineno); };
      if (!obj.contains("item_id") || !obj["item_id"].is_string() || !obj.contains("answer") ||
          !obj["answer"].is_string()) {
        throw ValidationError(where() + ": prediction needs string fields item_id and answer");
      }
      Entry entry;
      entry.answer = obj["answer"].get<std::string>();
      if (obj.contains("latency_seconds")) entry.latency = obj["latency_seconds"].get<double>();
      const std::string id = obj["item_id"].get<std::string>();
      if (!predictions_.emplace(id, std::move(entry)).second) {
        throw ValidationError(where() + ": duplicate prediction for item \"" + id + "\"");
      }
    });
  }

  Reply ask(const TaskItem& item) override {
    Reply reply;
    auto it = predictions_.find(item.item_id);
    if (it == predictions_.end()) {
      reply.flag = "missing";
      return reply;
    }
    reply.answered = true;
    reply.answer = it->second.answer;
    reply.latency = it->second.latency;
    return reply;
  }

private:
  struct Entry {
    std::string answer;
    double latency = 0.0;
  };
  std::unordered_map<std::string, Entry> predictions_;
};

class SubprocessAdapter final : public Adapter {
public:
  SubprocessAdapter(const std::string& command, double timeout_seconds)
      : timeout_seconds_(timeout_seconds) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw IoError("adapter: cannot create pipes");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw IoError("adapter: fork failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    const int flags = ::fcntl(read_fd_, F_GETFL, 0);
    ::fcntl(read_fd_, F_SETFL, flags | O_NONBLOCK);
  }

  ~SubprocessAdapter() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) {
      // Give the child a moment to exit on EOF, then force it.
      for (int i = 0; i < 200; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) != 0) return;
        ::usleep(10 * 1000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  Reply ask(const TaskItem& item) override {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(timeout_seconds_));

    OrderedJson request;
    request["item_id"] = item.item_id;
    request["prompt"] = item.prompt;
    std::string line = request.dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = ::write(write_fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("adapter: child stopped accepting input at item " + item.item_id);
      }
      written += static_cast<std::size_t>(n);
    }

    Reply reply;
    while (true) {
      std::string response_line;
      if (!read_line_until(deadline, response_line)) {
        reply.flag = "timeout";
        timed_out_.insert(item.item_id);
        reply.latency = std::chrono::duration<double>(Clock::now() - start).count();
        return reply;
      }
      const Json obj = Json::parse(response_line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object() || !obj.contains("item_id") ||
          !obj["item_id"].is_string() || !obj.contains("answer") || !obj["answer"].is_string()) {
        throw IoError("adapter: malformed output while waiting for item " + item.item_id + ": " +
                      response_line);
      }
      const std::string id = obj["item_id"].get<std::string>();
      if (id == item.item_id) {
        reply.answered = true;
        reply.answer = obj["answer"].get<std::string>();
        reply.latency = std::chrono::duration<double>(Clock::now() - start).count();
        return reply;
      }
      // Late reply for an item that already timed out: drop it and keep
      // waiting for the current one.
      if (timed_out_.erase(id) == 0) {
        throw IoError("adapter: unexpected reply for item \"" + id + "\" while waiting for item " +
                      item.item_id);
      }
    }
  }

private:
  bool read_line_until(std::chrono::steady_clock::time_point deadline, std::string& line) {
    using Clock = std::chrono::steady_clock;
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        buffer_.erase(0, nl + 1);
        return true;
      }
      const auto now = Clock::now();
      if (now >= deadline) return false;
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      struct pollfd pfd {};
      pfd.fd = read_fd_;
      pfd.events = POLLIN;
      const int rc = ::poll(&pfd, 1, static_cast<int>(std::max<long long>(1, remaining)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw IoError("adapter: poll failed");
      }
      if (rc == 0) return false;  // deadline
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n > 0) {
        buffer_.append(chunk, static_cast<std::size_t>(n));
      } else if (n == 0) {
        throw IoError("adapter: child closed its output");
      } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        throw IoError("adapter: read failed");
      }
    }
  }

  double timeout_seconds_;
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
  std::set<std::string> timed_out_;
};

}  // namespace

std::unique_ptr<Adapter> make_adapter(const AdapterSpec& spec) {
  if (spec.mode == "offline") return std::make_unique<OfflineAdapter>(spec.predictions_path);
  if (spec.mode == "subprocess") {
    return std::make_unique<SubprocessAdapter>(spec.command, spec.timeout_seconds);
  }
  throw ValidationError("adapter mode must be \"offline\" or \"subprocess\"");
}

// ---------------------------------------------------------------------------
// Suite runner
// ---------------------------------------------------------------------------

namespace {

struct GradedSet {
  std::size_t n_items = 0;
  std::size_t n_correct = 0;
};

GradedSet grade_items(const std::string& data_ref, const std::string& task_id,
                      const std::string& domain_tag, const std::string& suite_id,
                      Adapter& adapter, std::vector<EvaluationRecord>& records) {
  GradedSet graded;
  for (const TaskItem& item : read_task_items_jsonl(data_ref)) {
    const Adapter::Reply reply = adapter.ask(item);
    EvaluationRecord rec;
    rec.task_id = task_id;
    rec.domain_tag = domain_tag;
    rec.suite_id = suite_id;
    rec.latency = reply.latency;
    rec.correct = reply.answered && normalize_answer(reply.answer) == normalize_answer(item.expected);
    if (!reply.flag.empty()) rec.annotation = reply.flag;
    ++graded.n_items;
    if (rec.correct) ++graded.n_correct;
    records.push_back(std::move(rec));
  }
  return graded;
}

}  // namespace

SuiteRun run_suite(const SuiteManifest& manifest, Adapter& adapter) {
  SuiteRun run;

  // Single tasks first: they double as the per-domain baselines for the
  // transition records when the manifest does not pin baselines itself.
  std::map<std::string, GradedSet> per_domain;
  for (const TaskSpec& task : manifest.tasks) {
    if (task.kind != "single") continue;
    const GradedSet graded =
        grade_items(task.data_ref, task.task_id, task.domain_tag, manifest.suite_id, adapter,
                    run.records);
    auto& acc = per_domain[task.domain_tag];
    acc.n_items += graded.n_items;
    acc.n_correct += graded.n_correct;
  }

  std::map<std::string, double> baselines = manifest.baselines;
  if (baselines.empty()) {
    for (const auto& [tag, graded] : per_domain) {
      if (graded.n_items > 0) {
        baselines[tag] =
            static_cast<double>(graded.n_correct) / static_cast<double>(graded.n_items);
      }
    }
  }

  for (const TaskSpec& task : manifest.tasks) {
    if (task.kind != "transition") continue;
    TransitionRecord tr;
    tr.sequence_id = task.task_id;
    tr.baseline_accuracy_by_domain = baselines;
    for (const TaskSegment& segment : task.segments) {
      const GradedSet graded = grade_items(segment.data_ref, task.task_id, segment.domain_tag,
                                           manifest.suite_id, adapter, run.records);
      const double acc = graded.n_items == 0
                             ? 0.0
                             : static_cast<double>(graded.n_correct) /
                                   static_cast<double>(graded.n_items);
      tr.segment_accuracies.push_back({segment.domain_tag, acc});
    }
    run.transitions.push_back(std::move(tr));
  }
  return run;
}

std::string emit_report(const MetricsReport& report, const SuiteRun& run,
                        const std::string& out_dir, const std::string& format,
                        bool dump_records) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  std::string report_path;
  if (format == "csv") {
    report_path = (fs::path(out_dir) / "report.csv").string();
    write_text_file(report_path, report_to_csv(report));
  } else if (format == "json") {
    report_path = (fs::path(out_dir) / "report.json").string();
    write_text_file(report_path, report_to_json(report).dump(2) + "\n");
  } else {
    throw ValidationError("format must be \"json\" or \"csv\"");
  }
  if (dump_records) {
    write_records_jsonl(run.records, (fs::path(out_dir) / "records.jsonl").string());
    write_transitions_json(run.transitions, (fs::path(out_dir) / "transitions.json").string());
  }
  return report_path;
}

}  // namespace xdeval
