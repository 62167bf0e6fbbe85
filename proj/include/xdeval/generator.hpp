#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xdeval/corpus.hpp"
#include "xdeval/jsonl.hpp"

namespace xdeval {

// Class-conditional unigram generator for the two-domain benchmark corpora,
// the stratified blend, and the interfering continual-learning task pair.
//
// Vocabularies are disjoint by construction:
//   pv*  label-predictive pivot tokens, shared by both domains
//   sp*/ge*  domain-exclusive specialized tokens (one prefix per domain)
//   fl*  label-neutral filler, shared
//   sh*/tb*  continual-learning pair: shared signal (flipped between tasks)
//            and task-B-exclusive signal
struct GeneratorConfig {
  int n_docs = 1000;          // per domain
  int pivot_vocab = 30;       // shared pivot tokens
  int specialized_vocab = 150;  // per-domain exclusive tokens
  int filler_vocab = 600;     // shared neutral tokens

  double specialized_occupancy = 0.35;  // expected fraction of domain-exclusive tokens
  double label_correlation = 0.8;       // beta: odds a signal token matches the label half
  int doc_len_min = 40;
  int doc_len_max = 70;
  double stratified_mix_ratio = 0.5;  // share of specialized docs in the balanced blend
  std::uint64_t seed = 42;

  void validate() const;
};

GeneratorConfig generator_config_from_json(const Json& obj);

struct SyntheticBundle {
  std::vector<Document> specialized;  // source domain, labeled
  std::vector<Document> general;      // target domain (labels kept for evaluation)
  std::vector<Document> balanced;     // stratified specialized/general blend
  std::vector<Document> ewc_task_a;
  std::vector<Document> ewc_task_b;
};

SyntheticBundle generate_synthetic(const GeneratorConfig& cfg);

// Writes corpora, task item files, and a suite manifest under `dir`
// (created if absent). Returns the manifest path.
std::string write_synthetic_bundle(const SyntheticBundle& bundle, const GeneratorConfig& cfg,
                                   const std::string& dir);

}  // namespace xdeval
