#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "sentlab/errors.hpp"
#include "sentlab/eval.hpp"
#include "sentlab/gradcheck.hpp"
#include "sentlab/report.hpp"

using namespace sentlab;
using namespace sentlab::eval;
using extract::ReprKind;
using extract::ReprSpec;
using extract::SimilarityKind;

namespace {

std::vector<double> dvec(std::initializer_list<double> v) { return v; }

struct TestModel {
  model::ModelConfig cfg;
  model::Parameters<float> params;
  corpus::Vocab vocab;
};

TestModel make_test_model(uint64_t seed = 1) {
  TestModel tm;
  tm.cfg.encoder = model::Arch::rnn;
  tm.cfg.decoder = model::Arch::rnn;
  tm.cfg.embed_dim = 6;
  tm.cfg.hidden_dim = 8;
  tm.cfg.max_len = 10;
  tm.cfg.seed = seed;
  std::istringstream corpus_text(
      "red crimson scarlet\nblue azure navy\ngreen lime olive\n");
  tm.vocab = corpus::build_vocab(corpus_text, 16);
  tm.cfg.vocab_size = tm.vocab.size();
  SeededRng rng(seed);
  tm.params = model::init_parameters<float>(tm.cfg, rng);
  return tm;
}

std::vector<StsRecord> colour_records() {
  return {
      {"red crimson", "crimson scarlet", 4.5},
      {"red scarlet", "blue navy", 1.0},
      {"blue azure", "azure navy", 4.0},
      {"green lime", "red crimson", 0.5},
      {"green olive", "lime olive", 4.2},
      {"blue navy", "green lime", 0.8},
  };
}

}  // namespace

TEST_CASE("similarity closed forms") {
  auto a = dvec({1, 0});
  CHECK(similarity(a, a, SimilarityKind::dot) == doctest::Approx(1.0));
  CHECK(similarity(a, a, SimilarityKind::cosine) == doctest::Approx(1.0));

  auto b = dvec({0, 1});
  CHECK(similarity(a, b, SimilarityKind::dot) == doctest::Approx(0.0));
  CHECK(similarity(a, b, SimilarityKind::cosine) == doctest::Approx(0.0));

  auto u = dvec({1, 2});
  auto v = dvec({3, 4});
  CHECK(similarity(u, v, SimilarityKind::dot) == doctest::Approx(11.0));
  CHECK(similarity(u, v, SimilarityKind::cosine) ==
        doctest::Approx(11.0 / (std::sqrt(5.0) * 5.0)).epsilon(1e-9));

  auto zero = dvec({0, 0});
  CHECK_THROWS_AS(similarity(a, zero, SimilarityKind::cosine), DataError);
  auto three = dvec({1, 2, 3});
  CHECK_THROWS_AS(similarity(a, three, SimilarityKind::dot),
                  std::invalid_argument);
}

TEST_CASE("cosine equals dot of pre-normalised vectors") {
  SeededRng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = oracles::random_vector(rng, 5 + rng.next_bounded(20));
    auto b = oracles::random_vector(rng, a.size());
    const double na = std::sqrt(similarity(a, a, SimilarityKind::dot));
    const double nb = std::sqrt(similarity(b, b, SimilarityKind::dot));
    std::vector<double> an(a), bn(b);
    for (auto& x : an) x /= na;
    for (auto& x : bn) x /= nb;
    CHECK(similarity(a, b, SimilarityKind::cosine) ==
          doctest::Approx(similarity(an, bn, SimilarityKind::dot))
              .epsilon(1e-6));
    CHECK(std::abs(similarity(a, b, SimilarityKind::cosine)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("pearson closed forms and degenerate input") {
  auto x = dvec({1, 2, 3, 4});
  auto y2 = dvec({2, 4, 6, 8});
  CHECK(pearson(x, y2) == doctest::Approx(1.0).epsilon(1e-12));
  auto yn = dvec({-1, -2, -3, -4});
  CHECK(pearson(x, yn) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson(dvec({1, 2, 3}), dvec({1, 3, 2})) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(pearson(dvec({1, 1, 1}), dvec({1, 2, 3})), DataError);
  CHECK_THROWS_AS(pearson(dvec({1}), dvec({2})), std::invalid_argument);
}

TEST_CASE("spearman: ranks, ties and monotone invariance") {
  auto x = dvec({1, 2, 3, 4});
  auto tied = dvec({1, 1, 2, 2});
  auto ranks = average_ranks(tied);
  CHECK(ranks == dvec({1.5, 1.5, 3.5, 3.5}));
  CHECK(spearman(x, tied) == doctest::Approx(0.894427).epsilon(1e-4));
  CHECK(spearman(x, dvec({4, 3, 2, 1})) == doctest::Approx(-1.0));

  SeededRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto v = oracles::random_vector(rng, 3 + rng.next_bounded(30), -5, 5);
    std::vector<double> mono(v.size());
    for (size_t i = 0; i < v.size(); ++i) mono[i] = std::exp(0.7 * v[i]) + 3;
    CHECK(spearman(v, mono) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pearson and spearman match direct-formula oracles") {
  SeededRng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 3 + rng.next_bounded(40);
    auto x = oracles::random_vector(rng, n, 0, 1);
    auto y = oracles::random_vector(rng, n, 0, 1);
    const double p = pearson(x, y);
    const double s = spearman(x, y);
    CHECK(std::abs(p) <= 1.0 + 1e-12);
    CHECK(std::abs(s) <= 1.0 + 1e-12);
    CHECK(p == doctest::Approx(oracles::direct_pearson(x, y)).epsilon(1e-12));
    CHECK(s == doctest::Approx(oracles::direct_spearman(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("sts file parsing accepts comments and validates gold") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "sentlab_eval_test";
  fs::create_directories(dir);
  {
    std::ofstream o(dir / "ok.tsv");
    o << "# comment line\n";
    o << "a b\tc d\t3.5\n";
    o << "x\ty\t0\n";
  }
  auto recs = read_sts_file((dir / "ok.tsv").string());
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].sentence_a == "a b");
  CHECK(recs[0].gold == doctest::Approx(3.5));

  {
    std::ofstream o(dir / "bad.tsv");
    o << "a\tb\t7.5\n";  // out of range
  }
  CHECK_THROWS_AS(read_sts_file((dir / "bad.tsv").string()), DataError);
  CHECK_THROWS_AS(read_sts_file((dir / "missing.tsv").string()), DataError);
}

TEST_CASE("transfer file parsing requires contiguous labels") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "sentlab_eval_test";
  fs::create_directories(dir);
  {
    std::ofstream o(dir / "t.tsv");
    o << "0\thello there\n1\tblue navy\n0\tred crimson\n";
  }
  auto recs = read_transfer_file((dir / "t.tsv").string());
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].label == 1);

  {
    std::ofstream o(dir / "gap.tsv");
    o << "0\ta\n2\tb\n";  // class 1 missing
  }
  CHECK_THROWS_AS(read_transfer_file((dir / "gap.tsv").string()), DataError);
}

TEST_CASE("sts_eval: affine gold recovers Pearson 1 and order independence") {
  TestModel tm = make_test_model(6);
  auto records = colour_records();
  const ReprSpec spec{ReprKind::rnn_concat, 2};

  // first pass: compute sims, rewrite gold as a positive affine map of
  // them into [0, 5]; correlation must then be exactly 1
  auto base = sts_eval(tm.params, tm.cfg, tm.vocab, spec, SimilarityKind::dot,
                       records, "colours");
  REQUIRE(!base.degenerate);

  std::vector<double> sims;
  for (const auto& r : records) {
    auto ea = extract::embed(
        tm.params, tm.cfg,
        corpus::encode_sentence(tm.vocab, corpus::tokenize(r.sentence_a),
                                tm.cfg.max_len),
        spec);
    auto eb = extract::embed(
        tm.params, tm.cfg,
        corpus::encode_sentence(tm.vocab, corpus::tokenize(r.sentence_b),
                                tm.cfg.max_len),
        spec);
    std::vector<double> a(ea.values.begin(), ea.values.end());
    std::vector<double> b(eb.values.begin(), eb.values.end());
    sims.push_back(similarity(a, b, SimilarityKind::dot));
  }
  const double lo = *std::min_element(sims.begin(), sims.end());
  const double hi = *std::max_element(sims.begin(), sims.end());
  auto aligned = records;
  for (size_t i = 0; i < aligned.size(); ++i)
    aligned[i].gold = 5.0 * (sims[i] - lo) / (hi - lo);
  auto perfect = sts_eval(tm.params, tm.cfg, tm.vocab, spec,
                          SimilarityKind::dot, aligned, "colours");
  CHECK(*perfect.pearson == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(*perfect.spearman == doctest::Approx(1.0).epsilon(1e-9));

  // shuffling records changes nothing
  auto shuffled = aligned;
  std::swap(shuffled[0], shuffled[3]);
  std::swap(shuffled[1], shuffled[5]);
  auto again = sts_eval(tm.params, tm.cfg, tm.vocab, spec, SimilarityKind::dot,
                        shuffled, "colours");
  CHECK(*again.pearson == doctest::Approx(*perfect.pearson).epsilon(1e-12));
  CHECK(*again.spearman == doctest::Approx(*perfect.spearman).epsilon(1e-12));
}

TEST_CASE("sts_eval flags a degenerate similarity list instead of crashing") {
  TestModel tm = make_test_model(7);
  // zero embeddings + zero projection make every similarity identical
  std::fill(tm.params.embeddings.data.begin(), tm.params.embeddings.data.end(),
            0.0f);
  std::fill(tm.params.out_proj.data.begin(), tm.params.out_proj.data.end(),
            0.0f);
  auto report =
      sts_eval(tm.params, tm.cfg, tm.vocab, ReprSpec{ReprKind::encoder, 1},
               SimilarityKind::dot, colour_records(), "degenerate");
  CHECK(report.degenerate);
  CHECK(!report.pearson.has_value());
}

TEST_CASE("sts_eval spearman is invariant to uniform positive scaling") {
  // BOW encoder: scaling the embedding table scales every sentence vector,
  // so dot similarities scale by a positive constant and ranks survive
  TestModel tm = make_test_model(8);
  tm.cfg.encoder = model::Arch::bow;
  tm.cfg.decoder = model::Arch::bow;
  SeededRng rng(tm.cfg.seed);
  tm.params = model::init_parameters<float>(tm.cfg, rng);
  auto records = colour_records();
  const ReprSpec spec{ReprKind::encoder, 1};
  auto r1 = sts_eval(tm.params, tm.cfg, tm.vocab, spec, SimilarityKind::dot,
                     records, "colours");
  for (auto& v : tm.params.embeddings.data) v *= 3.0f;
  auto r2 = sts_eval(tm.params, tm.cfg, tm.vocab, spec, SimilarityKind::dot,
                     records, "colours");
  CHECK(*r2.spearman == doctest::Approx(*r1.spearman).epsilon(1e-9));
}

TEST_CASE("unroll_sweep emits baseline plus one row per space and depth") {
  TestModel tm = make_test_model(9);
  auto rows = unroll_sweep(tm.params, tm.cfg, tm.vocab, SimilarityKind::dot,
                           colour_records(), 4, "colours");
  REQUIRE(rows.size() == 1 + 4 + 4);
  CHECK(rows[0].spec == "encoder");
  CHECK(rows[1].spec == "concat:1");
  CHECK(rows[5].spec == "mean:1");

  // concat:1 and mean:1 coincide
  CHECK(*rows[1].pearson == doctest::Approx(*rows[5].pearson).epsilon(1e-9));
  CHECK(*rows[1].spearman == doctest::Approx(*rows[5].spearman).epsilon(1e-9));

  // each sweep row equals the standalone evaluation of its spec
  auto direct = sts_eval(tm.params, tm.cfg, tm.vocab,
                         ReprSpec{ReprKind::rnn_concat, 3},
                         SimilarityKind::dot, colour_records(), "colours");
  CHECK(*rows[3].pearson == doctest::Approx(*direct.pearson).epsilon(1e-12));

  // deterministic across calls, bit for bit
  auto rows2 = unroll_sweep(tm.params, tm.cfg, tm.vocab, SimilarityKind::dot,
                            colour_records(), 4, "colours");
  CHECK(*rows2[2].pearson == *rows[2].pearson);
  CHECK(*rows2[7].spearman == *rows[7].spearman);
}

TEST_CASE("softmax regression separates a separable toy set") {
  Matrix<double> x(8, 2);
  std::vector<int> y(8);
  for (uint32_t i = 0; i < 8; ++i) {
    const bool right = i % 2 == 0;
    x.at(i, 0) = right ? 2.0 + 0.1 * i : -2.0 - 0.1 * i;
    x.at(i, 1) = right ? 1.0 : -1.0;
    y[i] = right ? 1 : 0;
  }
  auto clf = fit_softmax_regression(x, y, 1e-3, 500);
  for (uint32_t i = 0; i < 8; ++i)
    CHECK(predict_class(clf, std::span<const double>(x.row(i))) == y[i]);
}

TEST_CASE("huge l2 shrinks weights and flattens predictions") {
  Matrix<double> x(6, 2);
  std::vector<int> y = {0, 1, 0, 1, 0, 1};
  SeededRng rng(5);
  for (auto& v : x.data) v = rng.next_uniform(-1, 1);
  auto clf = fit_softmax_regression(x, y, 1e6, 300);
  for (double w : clf.weights.data) CHECK(std::abs(w) < 1e-3);
  // near-uniform predictive distribution
  std::vector<double> logits(2);
  for (uint32_t i = 0; i < 6; ++i) {
    for (uint32_t k = 0; k < 2; ++k)
      logits[k] = clf.bias[k] + dot(std::span<const double>(clf.weights.row(k)),
                                    std::span<const double>(x.row(i)));
    auto probs = softmax(std::span<const double>(logits));
    CHECK(probs[0] == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("softmax regression loss gradient passes a finite-difference check") {
  SeededRng rng(6);
  Matrix<double> x(10, 3);
  for (auto& v : x.data) v = rng.next_uniform(-1, 1);
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) y.push_back(int(rng.next_bounded(3)));
  std::vector<double> flat(3 * 3 + 3);
  for (auto& v : flat) v = rng.next_uniform(-0.5, 0.5);

  auto loss_fn = [&](const std::vector<double>& t) {
    return softmax_regression_loss(x, y, 3, 0.01, t);
  };
  auto grad_fn = [&](const std::vector<double>& t) {
    return softmax_regression_grad(x, y, 3, 0.01, t);
  };
  CHECK(grad_check(loss_fn, grad_fn, flat, 1e-6) <= 1e-6);
}

TEST_CASE("stratified folds: purity, determinism and guard rails") {
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i % 2);
  auto a = stratified_fold_assignment(labels, 5, 11);
  auto b = stratified_fold_assignment(labels, 5, 11);
  auto c = stratified_fold_assignment(labels, 5, 12);
  CHECK(a == b);
  CHECK(a != c);
  // every fold holds 8 examples, 4 per class
  std::vector<int> fold_sizes(5, 0);
  for (uint32_t f : a) fold_sizes[f]++;
  for (int s : fold_sizes) CHECK(s == 8);

  std::vector<int> small = {0, 0, 0, 1, 1, 1};
  CHECK_THROWS_AS(stratified_fold_assignment(small, 4, 1), DataError);
}

TEST_CASE("cv_accuracy: one-hot features give exactly 1.0") {
  const uint32_t classes = 4, per_class = 12;
  Matrix<double> x(classes * per_class, classes);
  std::vector<int> y(classes * per_class);
  for (uint32_t i = 0; i < classes * per_class; ++i) {
    y[i] = int(i % classes);
    x.at(i, i % classes) = 1.0;
  }
  CHECK(cv_accuracy(x, y, 10, 3) == 1.0);
}

TEST_CASE("cv_accuracy: permuted labels sit at chance level") {
  SeededRng rng(13);
  const uint32_t n = 200;
  Matrix<double> x(n, 5);
  for (auto& v : x.data) v = rng.next_uniform(-1, 1);
  std::vector<int> y(n);
  for (uint32_t i = 0; i < n; ++i) y[i] = int(i % 2);
  for (uint32_t i = n; i > 1; --i)
    std::swap(y[i - 1], y[rng.next_bounded(i)]);
  const double acc = cv_accuracy(x, y, 10, 17);
  CHECK(acc > 0.4);
  CHECK(acc < 0.6);
  CHECK(cv_accuracy(x, y, 10, 17) == acc);  // deterministic
}

TEST_CASE("emit_report CSV shape and 6-decimal round trip") {
  EvalReport r;
  r.dataset = "colours";
  r.encoder = "rnn";
  r.decoder = "rnn";
  r.spec = "concat:2";
  r.similarity = "dot";
  r.pearson = 0.123456789;
  r.spearman = -0.5;
  r.seed = 42;
  const std::string csv = render_report_csv({&r, 1});
  std::istringstream lines(csv);
  std::string header, row, extra;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row));
  CHECK(!std::getline(lines, extra));
  CHECK(header ==
        "dataset,encoder,decoder,spec,similarity,pearson,spearman,accuracy,seed");
  CHECK(row == "colours,rnn,rnn,concat:2,dot,0.123457,-0.500000,,42");
}

TEST_CASE("sweep SVG carries one vertex per unroll step per series") {
  std::vector<EvalReport> rows;
  EvalReport base;
  base.dataset = "synth";
  base.encoder = "rnn";
  base.decoder = "rnn";
  base.similarity = "dot";
  base.spec = "encoder";
  base.pearson = 0.30;
  base.spearman = 0.28;
  rows.push_back(base);
  for (int n = 1; n <= 10; ++n) {
    EvalReport r = base;
    r.spec = "concat:" + std::to_string(n);
    r.pearson = 0.3 + 0.01 * n;
    r.spearman = 0.28 + 0.01 * n;
    rows.push_back(r);
    r.spec = "mean:" + std::to_string(n);
    rows.push_back(r);
  }
  const std::string svg = render_report_svg(rows);
  size_t polylines = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++polylines;
    const size_t start = svg.find("points=\"", pos) + 8;
    const size_t end = svg.find('"', start);
    const std::string pts = svg.substr(start, end - start);
    const size_t vertices =
        1 + size_t(std::count(pts.begin(), pts.end(), ' '));
    CHECK(vertices == 10);
    pos = end;
  }
  CHECK(polylines == 4);  // {concat, mean} x {pearson, spearman}
}
