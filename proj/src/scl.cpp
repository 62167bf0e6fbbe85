#include "xdeval/scl.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <thread>

#include "xdeval/errors.hpp"
#include "xdeval/jsonl.hpp"

namespace xdeval {

// ---------------------------------------------------------------------------
// Feature space
// ---------------------------------------------------------------------------

FeatureSpace FeatureSpace::build(const std::vector<Document>& a, const std::vector<Document>& b) {
  std::vector<std::string> vocab;
  for (const std::vector<Document>* docs : {&a, &b}) {
    for (const Document& doc : *docs) {
      for (std::string& tok : tokenize(doc.text)) vocab.push_back(std::move(tok));
    }
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  if (vocab.empty()) throw ValidationError("feature space is empty: corpora contain no tokens");

  FeatureSpace space;
  space.tokens = std::move(vocab);
  space.token_to_index.reserve(space.tokens.size());
  for (std::uint32_t i = 0; i < space.tokens.size(); ++i) {
    space.token_to_index.emplace(space.tokens[i], i);
  }
  return space;
}

SparseVec featurize(const Document& doc, const FeatureSpace& space) {
  SparseVec indices;
  for (const std::string& tok : tokenize(doc.text)) {
    auto it = space.token_to_index.find(tok);
    if (it != space.token_to_index.end()) indices.push_back(it->second);
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

// ---------------------------------------------------------------------------
// Mutual information
// ---------------------------------------------------------------------------

double mutual_information(std::int64_t n11, std::int64_t n10, std::int64_t n01, std::int64_t n00) {
  if (n11 < 0 || n10 < 0 || n01 < 0 || n00 < 0) {
    throw ValidationError("mutual_information: counts must be nonnegative");
  }
  const std::int64_t total = n11 + n10 + n01 + n00;
  if (total == 0) throw ValidationError("mutual_information: empty contingency table");

  const double n = static_cast<double>(total);
  const double row1 = static_cast<double>(n11 + n10);  // first variable present
  const double row0 = static_cast<double>(n01 + n00);
  const double col1 = static_cast<double>(n11 + n01);  // second variable present
  const double col0 = static_cast<double>(n10 + n00);

  auto term = [&](std::int64_t cell, double row, double col) {
    if (cell == 0) return 0.0;  // 0 * log 0 = 0
    const double c = static_cast<double>(cell);
    return (c / n) * std::log2((c * n) / (row * col));
  };
  return term(n11, row1, col1) + term(n10, row1, col0) + term(n01, row0, col1) +
         term(n00, row0, col0);
}

// ---------------------------------------------------------------------------
// Pivot selection
// ---------------------------------------------------------------------------

void SclConfig::validate() const {
  if (k_dims < 1) throw ValidationError("k_dims must be >= 1");
  if (n_pivots < k_dims) throw ValidationError("n_pivots must be >= k_dims");
  if (min_freq_each_domain < 1) throw ValidationError("min_freq_each_domain must be >= 1");
  if (!(projection_scale > 0.0)) throw ValidationError("projection_scale must be > 0");
  logistic.validate();
}

std::vector<int> binary_labels(const std::vector<Document>& docs) {
  std::vector<int> labels;
  labels.reserve(docs.size());
  for (const Document& doc : docs) {
    if (!doc.label) throw ValidationError("document " + doc.id + " has no label");
    if (*doc.label == "0") {
      labels.push_back(0);
    } else if (*doc.label == "1") {
      labels.push_back(1);
    } else {
      throw ValidationError("document " + doc.id + " has non-binary label \"" + *doc.label +
                            "\" (expected \"0\" or \"1\")");
    }
  }
  return labels;
}

LabeledData to_labeled_data(const std::vector<Document>& docs, const FeatureSpace& space) {
  LabeledData data;
  data.x.dimension = space.dimension();
  data.x.tail_size = 0;
  data.x.rows.reserve(docs.size());
  for (const Document& doc : docs) {
    FeatureRow row;
    row.indices = featurize(doc, space);
    data.x.rows.push_back(std::move(row));
  }
  data.y = binary_labels(docs);
  return data;
}

namespace {

std::vector<std::int64_t> document_frequencies(const std::vector<SparseVec>& rows,
                                               std::size_t dimension) {
  std::vector<std::int64_t> df(dimension, 0);
  for (const SparseVec& row : rows) {
    for (std::uint32_t idx : row) ++df[idx];
  }
  return df;
}

}  // namespace

PivotSet select_pivots(const std::vector<Document>& source_labeled,
                       const std::vector<Document>& target_unlabeled, const FeatureSpace& space,
                       const SclConfig& cfg) {
  cfg.validate();
  if (source_labeled.empty()) throw ValidationError("source corpus is empty");
  if (target_unlabeled.empty()) throw ValidationError("target corpus is empty");
  const std::vector<int> labels = binary_labels(source_labeled);

  std::vector<SparseVec> source_rows(source_labeled.size());
  for (std::size_t i = 0; i < source_labeled.size(); ++i) {
    source_rows[i] = featurize(source_labeled[i], space);
  }
  std::vector<SparseVec> target_rows(target_unlabeled.size());
  for (std::size_t i = 0; i < target_unlabeled.size(); ++i) {
    target_rows[i] = featurize(target_unlabeled[i], space);
  }

  const std::size_t dim = space.dimension();
  const std::vector<std::int64_t> df_source = document_frequencies(source_rows, dim);
  const std::vector<std::int64_t> df_target = document_frequencies(target_rows, dim);

  // Presence/label joint counts over the source corpus.
  std::vector<std::int64_t> present_pos(dim, 0);
  std::vector<std::int64_t> present_neg(dim, 0);
  std::int64_t n_pos = 0;
  for (std::size_t i = 0; i < source_rows.size(); ++i) {
    if (labels[i] == 1) ++n_pos;
    auto& bucket = labels[i] == 1 ? present_pos : present_neg;
    for (std::uint32_t idx : source_rows[i]) ++bucket[idx];
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(source_rows.size()) - n_pos;

  struct Candidate {
    std::uint32_t feature;
    double mi;
    std::int64_t total_freq;
  };
  std::vector<Candidate> candidates;
  for (std::uint32_t f = 0; f < dim; ++f) {
    if (df_source[f] < cfg.min_freq_each_domain || df_target[f] < cfg.min_freq_each_domain) {
      continue;
    }
    const double mi = mutual_information(present_pos[f], present_neg[f], n_pos - present_pos[f],
                                         n_neg - present_neg[f]);
    candidates.push_back({f, mi, df_source[f] + df_target[f]});
  }
  if (candidates.empty()) {
    throw ValidationError(
        "no pivot candidates clear the document-frequency floor of " +
        std::to_string(cfg.min_freq_each_domain) + " in both domains; lower min_freq_each_domain");
  }

  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.mi != b.mi) return a.mi > b.mi;
    if (a.total_freq != b.total_freq) return a.total_freq > b.total_freq;
    return space.tokens[a.feature] < space.tokens[b.feature];
  });

  const std::size_t take = std::min<std::size_t>(candidates.size(), cfg.n_pivots);
  if (take < static_cast<std::size_t>(cfg.n_pivots)) {
    std::cerr << "warning: only " << take << " pivot candidates available (requested "
              << cfg.n_pivots << ")\n";
  }
  PivotSet set;
  for (std::size_t i = 0; i < take; ++i) {
    const Candidate& c = candidates[i];
    set.pivots.push_back(c.feature);
    set.scores.push_back({df_source[c.feature], df_target[c.feature], c.mi});
  }
  return set;
}

// ---------------------------------------------------------------------------
// Pivot predictors
// ---------------------------------------------------------------------------

PredictorMatrix train_pivot_predictors(const std::vector<Document>& all_docs,
                                       const PivotSet& pivots, const FeatureSpace& space,
                                       const SclConfig& cfg, int threads) {
  if (pivots.pivots.empty()) throw ValidationError("pivot set is empty");
  if (all_docs.empty()) throw ValidationError("no documents for pivot predictors");

  const std::size_t dim = space.dimension();
  std::vector<std::int32_t> row_of(dim, 0);
  for (std::uint32_t p : pivots.pivots) {
    if (p >= dim) throw ValidationError("pivot index out of range");
    row_of[p] = -1;
  }
  PredictorMatrix w;
  for (std::uint32_t f = 0; f < dim; ++f) {
    if (row_of[f] == 0) {
      row_of[f] = static_cast<std::int32_t>(w.row_features.size());
      w.row_features.push_back(f);
    }
  }
  w.col_features = pivots.pivots;
  w.n_rows = w.row_features.size();
  w.n_cols = pivots.pivots.size();
  w.values.assign(w.n_rows * w.n_cols, 0.0);
  if (w.n_rows == 0) throw ValidationError("every feature is a pivot; no predictor inputs remain");

  // Inputs: non-pivot block only, shared by every predictor.
  FeatureMatrix x;
  x.dimension = w.n_rows;
  x.tail_size = 0;
  x.rows.resize(all_docs.size());
  std::vector<std::vector<int>> pivot_presence(w.n_cols,
                                               std::vector<int>(all_docs.size(), 0));
  std::vector<std::int32_t> col_of(dim, -1);
  for (std::size_t c = 0; c < w.n_cols; ++c) col_of[pivots.pivots[c]] = static_cast<std::int32_t>(c);
  for (std::size_t i = 0; i < all_docs.size(); ++i) {
    for (std::uint32_t f : featurize(all_docs[i], space)) {
      if (col_of[f] >= 0) {
        pivot_presence[col_of[f]][i] = 1;
      } else {
        x.rows[i].indices.push_back(static_cast<std::uint32_t>(row_of[f]));
      }
    }
  }

  auto train_column = [&](std::size_t c) {
    const LinearModel model = train_logistic(x, pivot_presence[c], cfg.logistic);
    for (std::size_t r = 0; r < w.n_rows; ++r) w.at(r, c) = model.weights[r];
  };

  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(w.n_cols)));
  if (n_workers == 1) {
    for (std::size_t c = 0; c < w.n_cols; ++c) train_column(c);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t c = t; c < w.n_cols; c += n_workers) train_column(c);
      });
    }
    for (std::thread& th : workers) th.join();
  }
  return w;
}

// ---------------------------------------------------------------------------
// SVD via cyclic Jacobi on the Gram matrix
// ---------------------------------------------------------------------------

namespace {

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues descending with matching eigenvector columns.
void jacobi_eigen_symmetric(Matrix g, std::vector<double>& eigenvalues, Matrix& eigenvectors) {
  const std::size_t n = g.rows;
  eigenvectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) eigenvectors.at(i, i) = 1.0;

  double frob = 0.0;
  for (double v : g.data) frob += v * v;
  const double stop = 1e-30 * std::max(frob, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += g.at(p, q) * g.at(p, q);
    }
    if (off <= stop) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double gpq = g.at(p, q);
        if (gpq == 0.0) continue;
        const double theta = (g.at(q, q) - g.at(p, p)) / (2.0 * gpq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double gip = g.at(i, p);
          const double giq = g.at(i, q);
          g.at(i, p) = c * gip - s * giq;
          g.at(i, q) = s * gip + c * giq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double gpi = g.at(p, i);
          const double gqi = g.at(q, i);
          g.at(p, i) = c * gpi - s * gqi;
          g.at(q, i) = s * gpi + c * gqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = eigenvectors.at(i, p);
          const double viq = eigenvectors.at(i, q);
          eigenvectors.at(i, p) = c * vip - s * viq;
          eigenvectors.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return g.at(a, a) > g.at(b, b); });

  eigenvalues.resize(n);
  Matrix sorted(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    eigenvalues[j] = g.at(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) sorted.at(i, j) = eigenvectors.at(i, order[j]);
  }
  eigenvectors = std::move(sorted);
}

}  // namespace

SvdFactors svd_topk(const Matrix& a, int k) {
  if (a.rows == 0 || a.cols == 0) throw ValidationError("svd_topk: empty matrix");
  if (k < 1 || static_cast<std::size_t>(k) > std::min(a.rows, a.cols)) {
    throw ValidationError("svd_topk: k must be in [1, min(rows, cols)]");
  }
  for (double v : a.data) {
    if (!std::isfinite(v)) throw ValidationError("svd_topk: non-finite entry");
  }

  Matrix gram(a.cols, a.cols);
  for (std::size_t i = 0; i < a.cols; ++i) {
    for (std::size_t j = i; j < a.cols; ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < a.rows; ++r) sum += a.at(r, i) * a.at(r, j);
      gram.at(i, j) = sum;
      gram.at(j, i) = sum;
    }
  }

  std::vector<double> eigenvalues;
  Matrix eigenvectors;
  jacobi_eigen_symmetric(std::move(gram), eigenvalues, eigenvectors);

  SvdFactors svd;
  svd.k = static_cast<std::size_t>(k);
  svd.n_rows = a.rows;
  svd.n_cols = a.cols;
  svd.sigma.resize(svd.k);
  svd.v.assign(a.cols * svd.k, 0.0);
  svd.u.assign(a.rows * svd.k, 0.0);

  for (std::size_t j = 0; j < svd.k; ++j) {
    svd.sigma[j] = std::sqrt(std::max(0.0, eigenvalues[j]));
    for (std::size_t i = 0; i < a.cols; ++i) svd.v[i * svd.k + j] = eigenvectors.at(i, j);
  }

  // U columns: A v / sigma where sigma is meaningful, Gram-Schmidt
  // completion against the standard basis for null directions.
  std::size_t next_basis = 0;
  for (std::size_t j = 0; j < svd.k; ++j) {
    std::vector<double> col(a.rows, 0.0);
    if (svd.sigma[j] > 1e-12) {
      for (std::size_t r = 0; r < a.rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < a.cols; ++c) sum += a.at(r, c) * eigenvectors.at(c, j);
        col[r] = sum / svd.sigma[j];
      }
    } else {
      bool found = false;
      while (next_basis < a.rows && !found) {
        std::fill(col.begin(), col.end(), 0.0);
        col[next_basis] = 1.0;
        ++next_basis;
        for (std::size_t prev = 0; prev < j; ++prev) {
          double dot = 0.0;
          for (std::size_t r = 0; r < a.rows; ++r) dot += col[r] * svd.u[r * svd.k + prev];
          for (std::size_t r = 0; r < a.rows; ++r) col[r] -= dot * svd.u[r * svd.k + prev];
        }
        double norm_sq = 0.0;
        for (double v : col) norm_sq += v * v;
        if (norm_sq > 0.25) {
          const double inv = 1.0 / std::sqrt(norm_sq);
          for (double& v : col) v *= inv;
          found = true;
        }
      }
      if (!found) throw ValidationError("svd_topk: failed to complete an orthonormal basis");
    }
    // One re-orthonormalization pass keeps the columns orthonormal even
    // when singular values cluster.
    for (std::size_t prev = 0; prev < j; ++prev) {
      double dot = 0.0;
      for (std::size_t r = 0; r < a.rows; ++r) dot += col[r] * svd.u[r * svd.k + prev];
      for (std::size_t r = 0; r < a.rows; ++r) col[r] -= dot * svd.u[r * svd.k + prev];
    }
    double norm_sq = 0.0;
    for (double v : col) norm_sq += v * v;
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double& v : col) v *= inv;
    }
    for (std::size_t r = 0; r < a.rows; ++r) svd.u[r * svd.k + j] = col[r];
  }
  return svd;
}

std::vector<double> project(const SparseVec& x_nonpivot_rows, const SvdFactors& svd) {
  std::vector<double> out(svd.k, 0.0);
  for (std::uint32_t r : x_nonpivot_rows) {
    if (r >= svd.n_rows) {
      throw ValidationError("project: row index " + std::to_string(r) +
                            " out of range for " + std::to_string(svd.n_rows) + " rows");
    }
    for (std::size_t j = 0; j < svd.k; ++j) out[j] += svd.u[r * svd.k + j];
  }
  return out;
}

FeatureRow augment(const SparseVec& x_original, const std::vector<double>& x_projected,
                   double mu) {
  FeatureRow row;
  row.indices = x_original;
  row.tail.resize(x_projected.size());
  for (std::size_t j = 0; j < x_projected.size(); ++j) row.tail[j] = mu * x_projected[j];
  return row;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

namespace {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("scl_fit[") + stage + "]: " + e.what());
  }
}

std::vector<std::int32_t> build_row_map(std::size_t dimension, const PivotSet& pivots) {
  std::vector<std::int32_t> row_of(dimension, 0);
  for (std::uint32_t p : pivots.pivots) row_of[p] = -1;
  std::int32_t next = 0;
  for (std::size_t f = 0; f < dimension; ++f) {
    if (row_of[f] == 0) row_of[f] = next++;
    // pivots stay -1
  }
  return row_of;
}

SparseVec strip_to_rows(const SparseVec& x, const std::vector<std::int32_t>& row_of) {
  SparseVec rows;
  rows.reserve(x.size());
  for (std::uint32_t f : x) {
    if (row_of[f] >= 0) rows.push_back(static_cast<std::uint32_t>(row_of[f]));
  }
  return rows;
}

}  // namespace

FeatureRow scl_features(const SclModel& model, const Document& doc) {
  const SparseVec x = featurize(doc, model.space);
  const SparseVec x_rows = strip_to_rows(x, model.nonpivot_row_of_feature);
  const std::vector<double> projected = project(x_rows, model.svd);
  return augment(x, projected, model.projection_scale);
}

SclModel scl_fit(const std::vector<Document>& source_labeled,
                 const std::vector<Document>& target_unlabeled, const SclConfig& cfg,
                 int threads) {
  run_stage("config", [&] {
    cfg.validate();
    if (source_labeled.empty()) throw ValidationError("source corpus is empty");
    if (target_unlabeled.empty()) throw ValidationError("target corpus is empty");
    return 0;
  });

  SclModel model;
  model.config = cfg;
  model.projection_scale = cfg.projection_scale;
  model.space = run_stage("feature_space",
                          [&] { return FeatureSpace::build(source_labeled, target_unlabeled); });
  const std::vector<int> labels =
      run_stage("labels", [&] { return binary_labels(source_labeled); });
  model.pivot_set = run_stage(
      "pivots", [&] { return select_pivots(source_labeled, target_unlabeled, model.space, cfg); });

  std::vector<Document> all_docs = source_labeled;
  all_docs.insert(all_docs.end(), target_unlabeled.begin(), target_unlabeled.end());
  const PredictorMatrix w = run_stage("predictors", [&] {
    return train_pivot_predictors(all_docs, model.pivot_set, model.space, cfg, threads);
  });

  Matrix a;
  a.rows = w.n_rows;
  a.cols = w.n_cols;
  a.data = w.values;
  int k = cfg.k_dims;
  if (static_cast<std::size_t>(k) > std::min(a.rows, a.cols)) {
    k = static_cast<int>(std::min(a.rows, a.cols));
    std::cerr << "warning: reducing k_dims to " << k << " (predictor matrix is " << a.rows << "x"
              << a.cols << ")\n";
  }
  model.svd = run_stage("svd", [&] { return svd_topk(a, k); });
  model.nonpivot_row_of_feature = build_row_map(model.space.dimension(), model.pivot_set);

  FeatureMatrix augmented;
  augmented.dimension = model.space.dimension() + model.svd.k;
  augmented.tail_size = model.svd.k;
  augmented.rows.reserve(source_labeled.size());
  for (const Document& doc : source_labeled) {
    augmented.rows.push_back(scl_features(model, doc));
  }
  model.final_classifier = run_stage(
      "final_classifier", [&] { return train_logistic(augmented, labels, cfg.logistic); });
  return model;
}

SclPrediction scl_predict(const SclModel& model, const Document& doc) {
  const FeatureRow row = scl_features(model, doc);
  double z = model.final_classifier.bias;
  for (std::uint32_t idx : row.indices) z += model.final_classifier.weights[idx];
  const std::size_t off = model.space.dimension();
  for (std::size_t j = 0; j < row.tail.size(); ++j) {
    z += model.final_classifier.weights[off + j] * row.tail[j];
  }
  SclPrediction pred;
  pred.probability = sigmoid(z);
  pred.label = z >= 0.0 ? 1 : 0;
  return pred;
}

// ---------------------------------------------------------------------------
// Serialization ("scl-v1")
// ---------------------------------------------------------------------------

void save_scl_model(const SclModel& model, const std::string& path) {
  OrderedJson doc;
  doc["version"] = "scl-v1";
  doc["config"] = {{"n_pivots", model.config.n_pivots},
                   {"min_freq_each_domain", model.config.min_freq_each_domain},
                   {"k_dims", model.config.k_dims},
                   {"projection_scale", model.config.projection_scale},
                   {"logistic",
                    {{"learning_rate", model.config.logistic.learning_rate},
                     {"l2", model.config.logistic.l2},
                     {"max_epochs", model.config.logistic.max_epochs},
                     {"grad_tol", model.config.logistic.grad_tol}}},
                   {"seed", model.config.seed}};
  doc["feature_space"] = model.space.tokens;
  doc["pivots"] = model.pivot_set.pivots;
  OrderedJson scores = OrderedJson::array();
  for (const PivotScore& s : model.pivot_set.scores) {
    scores.push_back({s.frequency_source, s.frequency_target, s.mutual_information_bits});
  }
  doc["pivot_scores"] = std::move(scores);
  doc["svd"] = {{"k", model.svd.k},
                {"n_rows", model.svd.n_rows},
                {"n_cols", model.svd.n_cols},
                {"u", model.svd.u},
                {"sigma", model.svd.sigma}};
  doc["projection_scale"] = model.projection_scale;
  doc["classifier"] = {{"weights", model.final_classifier.weights},
                       {"bias", model.final_classifier.bias}};
  write_text_file(path, doc.dump(2) + "\n");
}

SclModel load_scl_model(const std::string& path) {
  const Json doc = load_json_file(path);
  if (!doc.is_object() || doc.value("version", "") != "scl-v1") {
    throw ValidationError(path + ": not an scl-v1 model file");
  }
  SclModel model;
  const Json& cfg = doc.at("config");
  model.config.n_pivots = cfg.at("n_pivots").get<int>();
  model.config.min_freq_each_domain = cfg.at("min_freq_each_domain").get<int>();
  model.config.k_dims = cfg.at("k_dims").get<int>();
  model.config.projection_scale = cfg.at("projection_scale").get<double>();
  const Json& lg = cfg.at("logistic");
  model.config.logistic.learning_rate = lg.at("learning_rate").get<double>();
  model.config.logistic.l2 = lg.at("l2").get<double>();
  model.config.logistic.max_epochs = lg.at("max_epochs").get<int>();
  model.config.logistic.grad_tol = lg.at("grad_tol").get<double>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();

  model.space.tokens = doc.at("feature_space").get<std::vector<std::string>>();
  for (std::uint32_t i = 0; i < model.space.tokens.size(); ++i) {
    model.space.token_to_index.emplace(model.space.tokens[i], i);
  }
  model.pivot_set.pivots = doc.at("pivots").get<std::vector<std::uint32_t>>();
  for (const Json& s : doc.at("pivot_scores")) {
    model.pivot_set.scores.push_back(
        {s.at(0).get<std::int64_t>(), s.at(1).get<std::int64_t>(), s.at(2).get<double>()});
  }
  const Json& svd = doc.at("svd");
  model.svd.k = svd.at("k").get<std::size_t>();
  model.svd.n_rows = svd.at("n_rows").get<std::size_t>();
  model.svd.n_cols = svd.at("n_cols").get<std::size_t>();
  model.svd.u = svd.at("u").get<std::vector<double>>();
  model.svd.sigma = svd.at("sigma").get<std::vector<double>>();
  model.projection_scale = doc.at("projection_scale").get<double>();
  model.final_classifier.weights = doc.at("classifier").at("weights").get<std::vector<double>>();
  model.final_classifier.bias = doc.at("classifier").at("bias").get<double>();
  model.nonpivot_row_of_feature = build_row_map(model.space.dimension(), model.pivot_set);
  return model;
}

}  // namespace xdeval
