#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "xdeval/corpus.hpp"
#include "xdeval/linear.hpp"

namespace xdeval {

// Binary bag-of-words space over the union vocabulary of the training
// corpora; indices follow lexicographic token order, so the space is
// independent of document order.
struct FeatureSpace {
  std::vector<std::string> tokens;  // index -> token, sorted
  std::unordered_map<std::string, std::uint32_t> token_to_index;

  std::size_t dimension() const { return tokens.size(); }
  static FeatureSpace build(const std::vector<Document>& a, const std::vector<Document>& b);
};

// Sorted unique feature indices of the tokens present in a document.
using SparseVec = std::vector<std::uint32_t>;

SparseVec featurize(const Document& doc, const FeatureSpace& space);

// MI in bits of two binary variables from their 2x2 contingency table:
// n11 = both present, n10 = first only, n01 = second only, n00 = neither.
double mutual_information(std::int64_t n11, std::int64_t n10, std::int64_t n01, std::int64_t n00);

struct PivotScore {
  std::int64_t frequency_source = 0;  // document frequency in the source corpus
  std::int64_t frequency_target = 0;
  double mutual_information_bits = 0.0;
};

struct PivotSet {
  std::vector<std::uint32_t> pivots;  // selection order: MI desc, freq desc, token asc
  std::vector<PivotScore> scores;     // parallel to pivots
};

struct SclConfig {
  int n_pivots = 50;
  int min_freq_each_domain = 10;  // document-frequency floor, per domain
  int k_dims = 25;
  double projection_scale = 1.0;  // mu
  LogisticHyper logistic;
  std::uint64_t seed = 42;

  void validate() const;
};

// Pivot candidates must clear the document-frequency floor in both domains;
// ranking uses MI between feature presence and the source label.
PivotSet select_pivots(const std::vector<Document>& source_labeled,
                       const std::vector<Document>& target_unlabeled, const FeatureSpace& space,
                       const SclConfig& cfg);

// Weight matrix of the per-pivot predictors: one row per non-pivot feature,
// one column per pivot.
struct PredictorMatrix {
  std::vector<double> values;               // row-major, n_rows x n_cols
  std::size_t n_rows = 0;                   // = number of non-pivot features
  std::size_t n_cols = 0;                   // = number of pivots
  std::vector<std::uint32_t> row_features;  // row -> original feature index, ascending
  std::vector<std::uint32_t> col_features;  // column -> pivot feature index, selection order

  double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * n_cols + c]; }
};

// Trains one predictor per pivot (presence of the pivot from the non-pivot
// features only) over the union of both corpora. Columns are independent, so
// they may be trained on up to `threads` workers; assembly is column-ordered
// and deterministic either way.
PredictorMatrix train_pivot_predictors(const std::vector<Document>& all_docs,
                                       const PivotSet& pivots, const FeatureSpace& space,
                                       const SclConfig& cfg, int threads = 1);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

struct SvdFactors {
  std::size_t k = 0;
  std::size_t n_rows = 0;          // rows of the factored matrix
  std::size_t n_cols = 0;          // columns of the factored matrix
  std::vector<double> u;           // n_rows x k, row-major, orthonormal columns
  std::vector<double> sigma;       // k values, nonincreasing
  std::vector<double> v;           // n_cols x k, row-major, orthonormal columns

  double u_at(std::size_t r, std::size_t c) const { return u[r * k + c]; }
  double v_at(std::size_t r, std::size_t c) const { return v[r * k + c]; }
};

// Top-k singular triples via cyclic Jacobi on A^T A (the Gram side is small
// by construction: n_pivots columns). Null directions of U are completed by
// Gram-Schmidt against the standard basis.
SvdFactors svd_topk(const Matrix& a, int k);

// U_k^T x for a sparse binary x over row indices of the factored matrix.
std::vector<double> project(const SparseVec& x_nonpivot_rows, const SvdFactors& svd);

// [x_original ; mu * x_projected] as a hybrid row: the original binary block
// keeps every feature (pivots included), the dense tail carries the
// projection.
FeatureRow augment(const SparseVec& x_original, const std::vector<double>& x_projected, double mu);

struct SclModel {
  FeatureSpace space;
  PivotSet pivot_set;
  SvdFactors svd;
  double projection_scale = 1.0;
  LinearModel final_classifier;  // dimension == space.dimension() + k
  SclConfig config;
  std::vector<std::int32_t> nonpivot_row_of_feature;  // -1 for pivot features
};

struct SclPrediction {
  int label = 0;
  double probability = 0.0;
};

// The full pipeline: space -> pivots -> predictors -> SVD -> augmented
// source features -> final classifier.
SclModel scl_fit(const std::vector<Document>& source_labeled,
                 const std::vector<Document>& target_unlabeled, const SclConfig& cfg,
                 int threads = 1);

SclPrediction scl_predict(const SclModel& model, const Document& doc);

// Augmented features for a document under a fitted model (the classifier's
// input representation).
FeatureRow scl_features(const SclModel& model, const Document& doc);

// Single-document "scl-v1" JSON serialization.
void save_scl_model(const SclModel& model, const std::string& path);
SclModel load_scl_model(const std::string& path);

// Binary source labels ("0"/"1") for training; throws on anything else.
std::vector<int> binary_labels(const std::vector<Document>& docs);

// Binary bag-of-words rows plus labels under a fixed space.
LabeledData to_labeled_data(const std::vector<Document>& docs, const FeatureSpace& space);

}  // namespace xdeval
