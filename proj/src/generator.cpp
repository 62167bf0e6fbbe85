#include "xdeval/generator.hpp"

#include <filesystem>
#include <fstream>

#include "xdeval/errors.hpp"
#include "xdeval/rng.hpp"

namespace xdeval {

namespace fs = std::filesystem;

void GeneratorConfig::validate() const {
  if (n_docs < 1) throw ValidationError("n_docs must be >= 1");
  if (pivot_vocab < 2 || specialized_vocab < 2 || filler_vocab < 1) {
    throw ValidationError("vocab sizes too small (pivot/specialized >= 2, filler >= 1)");
  }
  if (!(specialized_occupancy >= 0.0 && specialized_occupancy <= 1.0)) {
    throw ValidationError("specialized_occupancy must be in [0,1]");
  }
  if (!(label_correlation >= 0.0 && label_correlation <= 1.0)) {
    throw ValidationError("label_correlation must be in [0,1]");
  }
  if (doc_len_min < 1 || doc_len_max < doc_len_min) {
    throw ValidationError("doc length range invalid");
  }
  if (!(stratified_mix_ratio >= 0.0 && stratified_mix_ratio <= 1.0)) {
    throw ValidationError("stratified_mix_ratio must be in [0,1]");
  }
}

GeneratorConfig generator_config_from_json(const Json& obj) {
  if (!obj.is_object()) throw ValidationError("generator config must be a JSON object");
  GeneratorConfig cfg;
  auto get_int = [&](const char* key, int& out) {
    if (obj.contains(key)) out = obj.at(key).get<int>();
  };
  auto get_double = [&](const char* key, double& out) {
    if (obj.contains(key)) out = obj.at(key).get<double>();
  };
  get_int("n_docs", cfg.n_docs);
  get_int("pivot_vocab", cfg.pivot_vocab);
  get_int("specialized_vocab", cfg.specialized_vocab);
  get_int("filler_vocab", cfg.filler_vocab);
  get_double("specialized_occupancy", cfg.specialized_occupancy);
  get_double("label_correlation", cfg.label_correlation);
  get_int("doc_len_min", cfg.doc_len_min);
  get_int("doc_len_max", cfg.doc_len_max);
  get_double("stratified_mix_ratio", cfg.stratified_mix_ratio);
  if (obj.contains("seed")) cfg.seed = obj.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

namespace {

std::string token_name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04d", prefix, i);
  return buf;
}

// Draws from the label-consistent half of [0, vocab) with probability
// (1 + beta) / 2, otherwise from the other half.
int draw_signal_token(Rng& rng, int vocab, int label, double beta) {
  const int half = vocab / 2;
  const bool consistent = rng.bernoulli(0.5 * (1.0 + beta));
  const bool upper = (label == 1) == consistent;  // label 1 lives in the upper half
  const int lo = upper ? half : 0;
  const int hi = upper ? vocab : half;
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo)));
}

struct DomainSpec {
  const char* exclusive_prefix;
  const char* id_prefix;
  const char* domain_tag;
};

std::vector<Document> generate_domain(const GeneratorConfig& cfg, const DomainSpec& spec,
                                      Rng& rng) {
  std::vector<Document> docs;
  docs.reserve(cfg.n_docs);
  const double shared_pivot_share =
      static_cast<double>(cfg.pivot_vocab) / static_cast<double>(cfg.pivot_vocab + cfg.filler_vocab);
  for (int i = 0; i < cfg.n_docs; ++i) {
    const int label = i % 2 == 0 ? 1 : 0;  // alternate for exact class balance
    const int len = static_cast<int>(rng.range(cfg.doc_len_min, cfg.doc_len_max));
    std::string text;
    for (int t = 0; t < len; ++t) {
      std::string tok;
      if (rng.bernoulli(cfg.specialized_occupancy)) {
        tok = token_name(spec.exclusive_prefix,
                         draw_signal_token(rng, cfg.specialized_vocab, label, cfg.label_correlation));
      } else if (rng.bernoulli(shared_pivot_share)) {
        tok = token_name("pv", draw_signal_token(rng, cfg.pivot_vocab, label, cfg.label_correlation));
      } else {
        tok = token_name("fl", static_cast<int>(rng.below(cfg.filler_vocab)));
      }
      if (!text.empty()) text.push_back(' ');
      text += tok;
    }
    Document doc;
    doc.id = spec.id_prefix + std::to_string(10000 + i).substr(1);
    doc.text = std::move(text);
    doc.label = label == 1 ? "1" : "0";
    doc.domain_tag = spec.domain_tag;
    docs.push_back(std::move(doc));
  }
  return docs;
}

// Continual-learning pair: task A's signal rides on shared sh* tokens; task B
// flips the sh* orientation and adds tb* tokens of its own, so sequential
// training on B overwrites exactly the weights A depends on. The pair uses
// small fixed vocabularies (documents cannot be memorized through a wide
// filler space) and pair-flip label noise, which keeps residuals alive at the
// task-A optimum and hence the Fisher diagonal informative.
std::vector<Document> generate_ewc_task(const GeneratorConfig& cfg, bool flip_shared,
                                        bool with_exclusive, const char* id_prefix, Rng& rng) {
  constexpr int kSharedVocab = 30;
  constexpr int kExclusiveVocab = 30;
  constexpr int kFillerVocab = 30;
  constexpr double kSharedOccupancy = 0.25;
  constexpr double kLabelNoise = 0.1;
  const double exclusive_occupancy = with_exclusive ? 0.15 : 0.0;

  std::vector<Document> docs;
  docs.reserve(cfg.n_docs);
  bool flip_pair = false;
  for (int i = 0; i < cfg.n_docs; ++i) {
    const int clean_label = i % 2 == 0 ? 1 : 0;
    // Flipping both labels of an alternating (1,0) pair corrupts 2 documents
    // while keeping the class counts exactly balanced.
    if (i % 2 == 0) flip_pair = rng.bernoulli(kLabelNoise);
    const int stored_label = flip_pair ? 1 - clean_label : clean_label;

    const int len = static_cast<int>(rng.range(cfg.doc_len_min, cfg.doc_len_max));
    std::string text;
    for (int t = 0; t < len; ++t) {
      std::string tok;
      const double u = rng.uniform();
      if (u < kSharedOccupancy) {
        const int oriented = flip_shared ? 1 - clean_label : clean_label;
        tok = token_name("sh", draw_signal_token(rng, kSharedVocab, oriented, cfg.label_correlation));
      } else if (u < kSharedOccupancy + exclusive_occupancy) {
        tok = token_name("tb", draw_signal_token(rng, kExclusiveVocab, clean_label, cfg.label_correlation));
      } else {
        tok = token_name("fl", static_cast<int>(rng.below(kFillerVocab)));
      }
      if (!text.empty()) text.push_back(' ');
      text += tok;
    }
    Document doc;
    doc.id = id_prefix + std::to_string(10000 + i).substr(1);
    doc.text = std::move(text);
    doc.label = stored_label == 1 ? "1" : "0";
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> stratified_blend(const std::vector<Document>& specialized,
                                       const std::vector<Document>& general, double ratio) {
  const std::size_t n = specialized.size();
  const std::size_t n_spec = static_cast<std::size_t>(ratio * static_cast<double>(n) + 0.5);
  const std::size_t n_gen = n - n_spec;
  std::vector<Document> blend;
  blend.reserve(n);
  // Proportional interleave keeps the blend order deterministic and even.
  std::size_t si = 0, gi = 0;
  while (si < n_spec || gi < n_gen) {
    const bool take_spec =
        gi >= n_gen ||
        (si < n_spec && si * n < n_spec * (si + gi + 1));
    Document doc = take_spec ? specialized[si++] : general[gi++];
    doc.id = "mix-" + doc.id;
    blend.push_back(std::move(doc));
  }
  return blend;
}

}  // namespace

SyntheticBundle generate_synthetic(const GeneratorConfig& cfg) {
  cfg.validate();
  SyntheticBundle bundle;
  {
    Rng rng(cfg.seed ^ 0x5350454355ULL);  // independent streams per artifact
    bundle.specialized = generate_domain(cfg, {"sp", "spec-", "specialized"}, rng);
  }
  {
    Rng rng(cfg.seed ^ 0x47454e4552ULL);
    bundle.general = generate_domain(cfg, {"ge", "gen-", "general"}, rng);
  }
  bundle.balanced = stratified_blend(bundle.specialized, bundle.general, cfg.stratified_mix_ratio);
  {
    Rng rng(cfg.seed ^ 0x4557434141ULL);
    bundle.ewc_task_a = generate_ewc_task(cfg, false, false, "ewca-", rng);
  }
  {
    Rng rng(cfg.seed ^ 0x4557434242ULL);
    bundle.ewc_task_b = generate_ewc_task(cfg, true, true, "ewcb-", rng);
  }
  return bundle;
}

namespace {

void write_task_items(const std::vector<Document>& docs, std::size_t begin, std::size_t count,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  const std::size_t end = std::min(docs.size(), begin + count);
  for (std::size_t i = begin; i < end; ++i) {
    OrderedJson obj;
    obj["item_id"] = docs[i].id;
    obj["prompt"] = docs[i].text;
    obj["expected"] = *docs[i].label == "1" ? "positive" : "negative";
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace

std::string write_synthetic_bundle(const SyntheticBundle& bundle, const GeneratorConfig& cfg,
                                   const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::create_directories(fs::path(dir) / "tasks", ec);
  if (ec) throw IoError("cannot create output directory: " + dir);

  write_documents_jsonl(bundle.specialized, (fs::path(dir) / "specialized.jsonl").string());
  write_documents_jsonl(bundle.general, (fs::path(dir) / "general.jsonl").string());
  write_documents_jsonl(bundle.balanced, (fs::path(dir) / "balanced.jsonl").string());
  write_documents_jsonl(bundle.ewc_task_a, (fs::path(dir) / "ewc_task_a.jsonl").string());
  write_documents_jsonl(bundle.ewc_task_b, (fs::path(dir) / "ewc_task_b.jsonl").string());

  // Task files: one single task per domain plus one two-segment transition,
  // drawn from disjoint document slices.
  const std::size_t n_items = std::min<std::size_t>(50, bundle.specialized.size());
  write_task_items(bundle.specialized, 0, n_items, (fs::path(dir) / "tasks/specialized_items.jsonl").string());
  write_task_items(bundle.general, 0, n_items, (fs::path(dir) / "tasks/general_items.jsonl").string());
  const std::size_t seg_count = std::max<std::size_t>(1, n_items / 2);
  write_task_items(bundle.specialized, n_items, seg_count,
                   (fs::path(dir) / "tasks/transition_seg1.jsonl").string());
  write_task_items(bundle.general, n_items, seg_count,
                   (fs::path(dir) / "tasks/transition_seg2.jsonl").string());

  OrderedJson manifest;
  manifest["suite_id"] = "synthetic-" + std::to_string(cfg.seed);
  manifest["tasks"] = OrderedJson::array();
  manifest["tasks"].push_back({{"task_id", "single-specialized"},
                               {"kind", "single"},
                               {"domain_tag", "specialized"},
                               {"data_ref", "tasks/specialized_items.jsonl"}});
  manifest["tasks"].push_back({{"task_id", "single-general"},
                               {"kind", "single"},
                               {"domain_tag", "general"},
                               {"data_ref", "tasks/general_items.jsonl"}});
  OrderedJson segments = OrderedJson::array();
  segments.push_back({{"domain_tag", "specialized"}, {"data_ref", "tasks/transition_seg1.jsonl"}});
  segments.push_back({{"domain_tag", "general"}, {"data_ref", "tasks/transition_seg2.jsonl"}});
  manifest["tasks"].push_back(
      {{"task_id", "transition-1"}, {"kind", "transition"}, {"segments", std::move(segments)}});

  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

}  // namespace xdeval
