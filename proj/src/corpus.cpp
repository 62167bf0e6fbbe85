#include "xdeval/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include "xdeval/errors.hpp"
#include "xdeval/jsonl.hpp"

namespace xdeval {

namespace {

bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_ascii_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_token_char(unsigned char c) {
  return is_ascii_letter(c) || is_ascii_digit(c) || c >= 0x80;
}
bool counts_as_letter(unsigned char c) { return is_ascii_letter(c) || c >= 0x80; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  bool has_letter = false;
  auto flush = [&] {
    if (!current.empty() && has_letter) tokens.push_back(current);
    current.clear();
    has_letter = false;
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_char(c)) {
      current.push_back(is_ascii_letter(c) ? static_cast<char>(c | 0x20) : ch);
      has_letter = has_letter || counts_as_letter(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

TermStats build_term_stats(const std::vector<Document>& docs) {
  TermStats stats;
  std::unordered_set<std::string> seen_ids;
  seen_ids.reserve(docs.size());
  for (const Document& doc : docs) {
    if (doc.id.empty()) throw ValidationError("document with empty id");
    if (!seen_ids.insert(doc.id).second) {
      throw ValidationError("duplicate document id: " + doc.id);
    }
    ++stats.doc_count;
    std::unordered_set<std::string_view> in_doc;
    for (std::string& tok : tokenize(doc.text)) {
      auto [it, _] = stats.counts.try_emplace(std::move(tok), 0);
      ++it->second;
      ++stats.total_tokens;
      if (in_doc.insert(it->first).second) ++stats.doc_frequency[it->first];
    }
  }
  stats.vocab_size = static_cast<std::int64_t>(stats.counts.size());
  return stats;
}

void SpecializationParams::validate() const {
  if (!(ratio_threshold > 1.0)) throw ValidationError("ratio_threshold must be > 1");
  if (min_count < 1) throw ValidationError("min_count must be >= 1");
  if (!(smoothing > 0.0)) throw ValidationError("smoothing must be > 0");
}

std::set<std::string> specialized_terms(const TermStats& target, const TermStats& reference,
                                        const SpecializationParams& params) {
  params.validate();
  if (target.total_tokens <= 0) throw ValidationError("target corpus has zero tokens");
  if (reference.total_tokens <= 0) throw ValidationError("reference corpus has zero tokens");

  // Union vocabulary size normalizes both smoothed distributions.
  std::int64_t union_vocab = target.vocab_size;
  for (const auto& [tok, _] : reference.counts) {
    if (!target.counts.count(tok)) ++union_vocab;
  }

  const double alpha = params.smoothing;
  const double target_norm = static_cast<double>(target.total_tokens) + alpha * static_cast<double>(union_vocab);
  const double ref_norm = static_cast<double>(reference.total_tokens) + alpha * static_cast<double>(union_vocab);

  std::set<std::string> result;
  for (const auto& [tok, count] : target.counts) {
    if (count < params.min_count) continue;
    auto ref_it = reference.counts.find(tok);
    const double ref_count = ref_it == reference.counts.end() ? 0.0 : static_cast<double>(ref_it->second);
    const double target_freq = (static_cast<double>(count) + alpha) / target_norm;
    const double ref_freq = (ref_count + alpha) / ref_norm;
    if (target_freq / ref_freq >= params.ratio_threshold) result.insert(tok);
  }
  return result;
}

DsiResult dsi(const std::vector<Document>& target_docs, const TermStats& reference,
              const SpecializationParams& params) {
  TermStats target = build_term_stats(target_docs);
  if (target.total_tokens <= 0) throw ValidationError("target corpus has zero tokens");

  DsiResult result;
  result.specialized_terms = specialized_terms(target, reference, params);
  result.total_tokens = target.total_tokens;
  for (const std::string& tok : result.specialized_terms) {
    result.specialized_token_occurrences += target.counts.at(tok);
  }
  result.dsi = static_cast<double>(result.specialized_token_occurrences) /
               static_cast<double>(result.total_tokens);
  return result;
}

std::vector<Document> read_documents_jsonl(const std::string& path) {
  std::vector<Document> docs;
  for_each_jsonl(path, [&](std::size_t lineno, const Json& obj) {
    auto where = [&] { return path + ":" + std::to_string(lineno); };
    if (!obj.is_object()) throw ValidationError(where() + ": document must be a JSON object");
    if (!obj.contains("id") || !obj["id"].is_string()) {
      throw ValidationError(where() + ": missing string field \"id\"");
    }
    Document doc;
    doc.id = obj["id"].get<std::string>();
    if (doc.id.empty()) throw ValidationError(where() + ": \"id\" must be non-empty");
    if (obj.contains("text")) {
      if (!obj["text"].is_string()) throw ValidationError(where() + ": \"text\" must be a string");
      doc.text = obj["text"].get<std::string>();
    }
    if (obj.contains("label") && !obj["label"].is_null()) {
      if (!obj["label"].is_string()) throw ValidationError(where() + ": \"label\" must be a string");
      doc.label = obj["label"].get<std::string>();
    }
    if (obj.contains("domain_tag") && !obj["domain_tag"].is_null()) {
      if (!obj["domain_tag"].is_string()) {
        throw ValidationError(where() + ": \"domain_tag\" must be a string");
      }
      doc.domain_tag = obj["domain_tag"].get<std::string>();
    }
    docs.push_back(std::move(doc));
  });
  return docs;
}

void write_documents_jsonl(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  for (const Document& doc : docs) {
    OrderedJson obj;
    obj["id"] = doc.id;
    obj["text"] = doc.text;
    if (doc.label) obj["label"] = *doc.label;
    if (doc.domain_tag) obj["domain_tag"] = *doc.domain_tag;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace xdeval
