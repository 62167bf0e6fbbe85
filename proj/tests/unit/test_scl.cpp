#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "xdeval/errors.hpp"
#include "xdeval/generator.hpp"
#include "xdeval/rng.hpp"
#include "xdeval/scl.hpp"

using namespace xdeval;

namespace {

Document doc(const std::string& id, const std::string& text, const char* label = nullptr) {
  Document d;
  d.id = id;
  d.text = text;
  if (label) d.label = label;
  return d;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("scl") {

TEST_CASE("mutual_information: independence, perfect correlation, zero total") {
  CHECK(mutual_information(50, 50, 50, 50) == 0.0);
  CHECK(std::abs(mutual_information(50, 0, 0, 50) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(mutual_information(0, 0, 0, 0), ValidationError);
  CHECK_THROWS_AS(mutual_information(-1, 1, 1, 1), ValidationError);
}

TEST_CASE("mutual_information: frozen brute-force value for (30,10,10,50)") {
  // Direct four-cell summation, evaluated independently to 30 digits:
  // 0.256425891682002958497114094681
  CHECK(std::abs(mutual_information(30, 10, 10, 50) - 0.2564258916820030) <= 1e-12);
}

TEST_CASE("mutual_information: symmetry and count-scaling invariance") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int64_t n11 = rng.below(40), n10 = rng.below(40);
    const std::int64_t n01 = rng.below(40), n00 = rng.below(40);
    if (n11 + n10 + n01 + n00 == 0) continue;
    const double mi = mutual_information(n11, n10, n01, n00);
    CHECK(mi >= 0.0);
    // Swapping the roles of the two variables transposes the table.
    CHECK(std::abs(mutual_information(n11, n01, n10, n00) - mi) <= 1e-12);
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng.below(5));
    CHECK(std::abs(mutual_information(k * n11, k * n10, k * n01, k * n00) - mi) <= 1e-12);
  }
}

TEST_CASE("featurize: presence features over the space") {
  const std::vector<Document> a = {doc("a", "red green blue")};
  const std::vector<Document> b = {doc("b", "green yellow")};
  const FeatureSpace space = FeatureSpace::build(a, b);
  CHECK(space.dimension() == 4);  // blue green red yellow

  CHECK(featurize(doc("e", ""), space).empty());

  const SparseVec repeated = featurize(doc("r", "green green green"), space);
  CHECK(repeated == SparseVec{space.token_to_index.at("green")});

  const SparseVec mixed = featurize(doc("m", "red purple yellow"), space);
  CHECK(mixed.size() == 2);  // purple is out of space
}

TEST_CASE("select_pivots: planted predictive token ranks first") {
  // "good" is frequent in both domains and decides the source label.
  std::vector<Document> source, target;
  Rng rng(3);
  for (int i = 0; i < 60; ++i) {
    const bool positive = i % 2 == 0;
    std::string text = positive ? "good " : "bad ";
    text += "common" + std::to_string(rng.below(4)) + " neutral";
    source.push_back(doc("s" + std::to_string(i), text, positive ? "1" : "0"));
    target.push_back(doc("t" + std::to_string(i),
                         (rng.bernoulli(0.5) ? "good " : "bad ") + std::string("neutral common") +
                             std::to_string(rng.below(4))));
  }
  const FeatureSpace space = FeatureSpace::build(source, target);
  SclConfig cfg;
  cfg.n_pivots = 3;
  cfg.k_dims = 1;
  cfg.min_freq_each_domain = 5;
  const PivotSet pivots = select_pivots(source, target, space, cfg);
  REQUIRE(!pivots.pivots.empty());
  const std::string first = space.tokens[pivots.pivots[0]];
  CHECK((first == "good" || first == "bad"));
  CHECK(pivots.scores[0].mutual_information_bits > 0.9);
}

TEST_CASE("select_pivots: source-only tokens are excluded by the both-domain floor") {
  std::vector<Document> source, target;
  for (int i = 0; i < 30; ++i) {
    source.push_back(doc("s" + std::to_string(i),
                         std::string(i % 2 == 0 ? "sourceonly shared" : "shared filler"),
                         i % 2 == 0 ? "1" : "0"));
    target.push_back(doc("t" + std::to_string(i), "shared filler"));
  }
  const FeatureSpace space = FeatureSpace::build(source, target);
  SclConfig cfg;
  cfg.n_pivots = 2;
  cfg.k_dims = 1;
  cfg.min_freq_each_domain = 5;
  const PivotSet pivots = select_pivots(source, target, space, cfg);
  for (std::uint32_t p : pivots.pivots) CHECK(space.tokens[p] != "sourceonly");
}

TEST_CASE("select_pivots: ties break lexicographically") {
  // "aaa" and "bbb" always co-occur: identical MI and identical frequency.
  std::vector<Document> source, target;
  for (int i = 0; i < 20; ++i) {
    const bool positive = i % 2 == 0;
    source.push_back(
        doc("s" + std::to_string(i), positive ? "aaa bbb pad" : "pad only", positive ? "1" : "0"));
    target.push_back(doc("t" + std::to_string(i), "aaa bbb pad"));
  }
  const FeatureSpace space = FeatureSpace::build(source, target);
  SclConfig cfg;
  cfg.n_pivots = 2;
  cfg.k_dims = 1;
  cfg.min_freq_each_domain = 3;
  const PivotSet pivots = select_pivots(source, target, space, cfg);
  REQUIRE(pivots.pivots.size() == 2);
  CHECK(space.tokens[pivots.pivots[0]] == "aaa");
  CHECK(space.tokens[pivots.pivots[1]] == "bbb");
}

TEST_CASE("select_pivots: no candidates is a validation error") {
  const std::vector<Document> source = {doc("s", "unique1", "1"), doc("s2", "unique2", "0")};
  const std::vector<Document> target = {doc("t", "other")};
  const FeatureSpace space = FeatureSpace::build(source, target);
  SclConfig cfg;
  cfg.n_pivots = 1;
  cfg.k_dims = 1;
  CHECK_THROWS_WITH_AS(select_pivots(source, target, space, cfg),
                       doctest::Contains("min_freq_each_domain"), ValidationError);
}

TEST_CASE("select_pivots: invariant under document permutation") {
  GeneratorConfig gen;
  gen.n_docs = 80;
  gen.pivot_vocab = 10;
  gen.specialized_vocab = 20;
  gen.filler_vocab = 40;
  gen.doc_len_min = 10;
  gen.doc_len_max = 20;
  const SyntheticBundle bundle = generate_synthetic(gen);
  const FeatureSpace space = FeatureSpace::build(bundle.specialized, bundle.general);
  SclConfig cfg;
  cfg.n_pivots = 6;
  cfg.k_dims = 2;
  cfg.min_freq_each_domain = 3;
  const PivotSet a = select_pivots(bundle.specialized, bundle.general, space, cfg);

  std::vector<Document> shuffled_source = bundle.specialized;
  std::vector<Document> shuffled_target = bundle.general;
  std::mt19937 shuffler(4);
  std::shuffle(shuffled_source.begin(), shuffled_source.end(), shuffler);
  std::shuffle(shuffled_target.begin(), shuffled_target.end(), shuffler);
  const PivotSet b = select_pivots(shuffled_source, shuffled_target, space, cfg);
  CHECK(a.pivots == b.pivots);
}

TEST_CASE("train_pivot_predictors: planted co-occurrence dominates the column") {
  // "companion" accompanies pivot "anchor" in every document that has it.
  std::vector<Document> docs;
  Rng rng(13);
  for (int i = 0; i < 120; ++i) {
    std::string text;
    if (i % 2 == 0) text = "anchor companion ";
    text += "noise" + std::to_string(rng.below(6));
    docs.push_back(doc("d" + std::to_string(i), text, i % 2 == 0 ? "1" : "0"));
  }
  const FeatureSpace space = FeatureSpace::build(docs, {});
  SclConfig cfg;
  cfg.n_pivots = 1;
  cfg.k_dims = 1;
  PivotSet pivots;
  pivots.pivots = {space.token_to_index.at("anchor")};
  pivots.scores.push_back({60, 60, 1.0});

  const PredictorMatrix w = train_pivot_predictors(docs, pivots, space, cfg);
  CHECK(w.n_cols == 1);
  CHECK(w.n_rows == space.dimension() - 1);

  const auto companion_row = static_cast<std::size_t>(
      std::find(w.row_features.begin(), w.row_features.end(),
                space.token_to_index.at("companion")) -
      w.row_features.begin());
  double best = -1e9;
  std::size_t best_row = 0;
  for (std::size_t r = 0; r < w.n_rows; ++r) {
    if (w.at(r, 0) > best) {
      best = w.at(r, 0);
      best_row = r;
    }
  }
  CHECK(best_row == companion_row);
  CHECK(best > 0.0);
}

TEST_CASE("train_pivot_predictors: absent pivot degenerates to a negative-bias constant") {
  std::vector<Document> docs;
  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    std::string text = "fill" + std::to_string(rng.below(10));
    text += " fill" + std::to_string(rng.below(10));
    docs.push_back(doc("d" + std::to_string(i), text));
  }
  docs.push_back(doc("holder", "ghost"));  // keeps the pivot in the space
  const FeatureSpace space = FeatureSpace::build(docs, {});
  docs.pop_back();

  SclConfig cfg;
  cfg.logistic.learning_rate = 0.5;
  cfg.logistic.l2 = 0.5;
  cfg.logistic.max_epochs = 2000;

  // Degenerate single-class training: the stated behavior is checked on the
  // shared trainer directly (bias) and on the assembled column (weights).
  FeatureMatrix x;
  x.dimension = space.dimension() - 1;
  x.tail_size = 0;
  std::vector<std::int32_t> row_of(space.dimension(), 0);
  row_of[space.token_to_index.at("ghost")] = -1;
  std::int32_t next = 0;
  for (std::size_t f = 0; f < space.dimension(); ++f) {
    if (row_of[f] >= 0) row_of[f] = next++;
  }
  std::vector<int> y;
  for (const Document& d : docs) {
    FeatureRow row;
    for (std::uint32_t f : featurize(d, space)) {
      if (row_of[f] >= 0) row.indices.push_back(static_cast<std::uint32_t>(row_of[f]));
    }
    x.rows.push_back(std::move(row));
    y.push_back(0);
  }
  const LinearModel predictor = train_logistic(x, y, cfg.logistic);
  CHECK(predictor.bias < -2.0);
  for (double w : predictor.weights) CHECK(std::abs(w) <= 1e-2);

  PivotSet pivots;
  pivots.pivots = {space.token_to_index.at("ghost")};
  pivots.scores.push_back({0, 0, 0.0});
  const PredictorMatrix w = train_pivot_predictors(docs, pivots, space, cfg);
  CHECK(w.n_rows == space.dimension() - 1);
  for (std::size_t r = 0; r < w.n_rows; ++r) CHECK(std::abs(w.at(r, 0)) <= 1e-2);
}

TEST_CASE("train_pivot_predictors: parallel assembly is identical to sequential") {
  GeneratorConfig gen;
  gen.n_docs = 60;
  gen.filler_vocab = 50;
  gen.specialized_vocab = 20;
  gen.pivot_vocab = 10;
  gen.doc_len_min = 10;
  gen.doc_len_max = 20;
  const SyntheticBundle bundle = generate_synthetic(gen);
  std::vector<Document> all_docs = bundle.specialized;
  all_docs.insert(all_docs.end(), bundle.general.begin(), bundle.general.end());

  const FeatureSpace space = FeatureSpace::build(bundle.specialized, bundle.general);
  SclConfig cfg;
  cfg.n_pivots = 6;
  cfg.k_dims = 3;
  cfg.min_freq_each_domain = 3;
  cfg.logistic.max_epochs = 60;
  const PivotSet pivots = select_pivots(bundle.specialized, bundle.general, space, cfg);

  const PredictorMatrix seq = train_pivot_predictors(all_docs, pivots, space, cfg, 1);
  const PredictorMatrix par = train_pivot_predictors(all_docs, pivots, space, cfg, 4);
  CHECK(seq.values == par.values);
}

TEST_CASE("scl_fit: k_dims larger than n_pivots fails before any training") {
  SclConfig cfg;
  cfg.n_pivots = 4;
  cfg.k_dims = 8;
  CHECK_THROWS_WITH_AS(scl_fit({doc("s", "a", "1")}, {doc("t", "a")}, cfg),
                       doctest::Contains("n_pivots"), ValidationError);
}

TEST_CASE("scl_fit: deterministic, serialized round-trip preserves predictions") {
  GeneratorConfig gen;
  gen.n_docs = 80;
  gen.pivot_vocab = 10;
  gen.specialized_vocab = 30;
  gen.filler_vocab = 60;
  gen.doc_len_min = 15;
  gen.doc_len_max = 25;
  gen.seed = 5;
  const SyntheticBundle bundle = generate_synthetic(gen);

  SclConfig cfg;
  cfg.n_pivots = 8;
  cfg.k_dims = 4;
  cfg.min_freq_each_domain = 4;
  cfg.logistic.max_epochs = 80;

  const SclModel model1 = scl_fit(bundle.specialized, bundle.general, cfg);
  const SclModel model2 = scl_fit(bundle.specialized, bundle.general, cfg);

  const auto tmp = std::filesystem::temp_directory_path();
  const std::string p1 = (tmp / "xdeval_scl_m1.json").string();
  const std::string p2 = (tmp / "xdeval_scl_m2.json").string();
  save_scl_model(model1, p1);
  save_scl_model(model2, p2);
  CHECK(slurp(p1) == slurp(p2));  // bit-identical parameters

  const SclModel loaded = load_scl_model(p1);
  for (int i = 0; i < 10; ++i) {
    const Document& probe = bundle.general[static_cast<std::size_t>(i)];
    const SclPrediction a = scl_predict(model1, probe);
    const SclPrediction b = scl_predict(loaded, probe);
    CHECK(a.label == b.label);
    CHECK(std::abs(a.probability - b.probability) <= 1e-12);
  }
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("scl_predict: probability bounds and the empty document") {
  GeneratorConfig gen;
  gen.n_docs = 60;
  gen.pivot_vocab = 10;
  gen.specialized_vocab = 20;
  gen.filler_vocab = 40;
  gen.doc_len_min = 10;
  gen.doc_len_max = 18;
  const SyntheticBundle bundle = generate_synthetic(gen);
  SclConfig cfg;
  cfg.n_pivots = 6;
  cfg.k_dims = 2;
  cfg.min_freq_each_domain = 3;
  cfg.logistic.max_epochs = 60;
  const SclModel model = scl_fit(bundle.specialized, bundle.general, cfg);

  for (int i = 0; i < 20; ++i) {
    const SclPrediction p = scl_predict(model, bundle.general[static_cast<std::size_t>(i)]);
    CHECK(p.probability >= 0.0);
    CHECK(p.probability <= 1.0);
  }
  const SclPrediction empty = scl_predict(model, doc("e", ""));
  CHECK(std::abs(empty.probability - sigmoid(model.final_classifier.bias)) <= 1e-12);
}

TEST_CASE("scl_predict: agrees with a hand-traced pipeline on a tiny fixture") {
  // Hand-built model over tokens {alpha, beta, pivot}: pivot is the single
  // pivot feature, rows {alpha, beta} carry a 2x1 "SVD" with u = (0.6, 0.8),
  // sigma = (1), k = 1, mu = 2. Classifier weights: alpha 0.1, beta -0.2,
  // pivot 0.3, latent 0.5; bias -0.1.
  SclModel model;
  model.space.tokens = {"alpha", "beta", "pivot"};
  for (std::uint32_t i = 0; i < 3; ++i) model.space.token_to_index[model.space.tokens[i]] = i;
  model.pivot_set.pivots = {2};
  model.pivot_set.scores.push_back({1, 1, 0.5});
  model.svd.k = 1;
  model.svd.n_rows = 2;
  model.svd.n_cols = 1;
  model.svd.u = {0.6, 0.8};
  model.svd.sigma = {1.0};
  model.svd.v = {1.0};
  model.projection_scale = 2.0;
  model.final_classifier.weights = {0.1, -0.2, 0.3, 0.5};
  model.final_classifier.bias = -0.1;
  model.nonpivot_row_of_feature = {0, 1, -1};
  model.config.n_pivots = 1;
  model.config.k_dims = 1;

  // Document "alpha pivot alpha": features {alpha, pivot}; non-pivot block
  // (alpha) projects to 0.6; tail = mu * 0.6 = 1.2.
  // z = -0.1 + 0.1 (alpha) + 0.3 (pivot) + 0.5 * 1.2 = 0.9
  const SclPrediction p = scl_predict(model, doc("x", "alpha pivot alpha"));
  CHECK(std::abs(p.probability - 1.0 / (1.0 + std::exp(-0.9))) <= 1e-12);
  CHECK(p.label == 1);
}

TEST_CASE("scl_fit: adaptation improves target accuracy on a small planted task") {
  GeneratorConfig gen;
  gen.n_docs = 300;
  gen.seed = 7;
  const SyntheticBundle bundle = generate_synthetic(gen);

  SclConfig cfg;
  cfg.min_freq_each_domain = 5;
  const SclModel model = scl_fit(bundle.specialized, bundle.general, cfg);

  // Source-only baseline on raw presence features.
  const FeatureSpace space = model.space;
  const LabeledData source = to_labeled_data(bundle.specialized, space);
  const LabeledData target = to_labeled_data(bundle.general, space);
  const LinearModel baseline = train_logistic(source.x, source.y, cfg.logistic);
  const double baseline_target = model_accuracy(target.x, target.y, baseline);

  std::size_t hits = 0;
  for (std::size_t i = 0; i < bundle.general.size(); ++i) {
    const SclPrediction p = scl_predict(model, bundle.general[i]);
    if (p.label == target.y[i]) ++hits;
  }
  const double scl_target = static_cast<double>(hits) / static_cast<double>(bundle.general.size());
  CHECK(scl_target > baseline_target);
}

}  // TEST_SUITE
