#include "sentlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sentlab/adam.hpp"
#include "sentlab/errors.hpp"
#include "sentlab/nn.hpp"

namespace sentlab::eval {

double similarity(std::span<const double> a, std::span<const double> b,
                  SimilarityKind kind) {
  if (a.size() != b.size())
    throw std::invalid_argument("similarity: dimension mismatch");
  const double d = dot(a, b);
  if (kind == SimilarityKind::dot) return d;
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0 || nb == 0)
    throw DataError("cosine similarity of a zero vector is undefined");
  return d / (na * nb);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson: need two equal-length lists, n >= 2");
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0)
    throw DataError("pearson: constant input has no defined correlation");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double mean_rank = 0.5 * (double(i + 1) + double(j + 1));
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length lists, n >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::vector<StsRecord> read_sts_file(const std::string& path) {
  std::vector<StsRecord> records;
  size_t lineno = 0;
  for (const auto& line : corpus::read_lines(path)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 3 tab-separated columns");
    StsRecord r;
    r.sentence_a = cols[0];
    r.sentence_b = cols[1];
    try {
      r.gold = std::stod(cols[2]);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad gold score");
    }
    if (!std::isfinite(r.gold) || r.gold < 0 || r.gold > 5)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": gold score outside [0, 5]");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<LabeledRecord> read_transfer_file(const std::string& path) {
  std::vector<LabeledRecord> records;
  size_t lineno = 0;
  int max_label = -1;
  for (const auto& line : corpus::read_lines(path)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 2)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 2 tab-separated columns");
    LabeledRecord r;
    try {
      r.label = std::stoi(cols[0]);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad label");
    }
    if (r.label < 0)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": labels must be non-negative");
    max_label = std::max(max_label, r.label);
    r.sentence = cols[1];
    records.push_back(std::move(r));
  }
  std::vector<bool> seen(size_t(max_label) + 1, false);
  for (const auto& r : records) seen[size_t(r.label)] = true;
  for (size_t k = 0; k < seen.size(); ++k)
    if (!seen[k])
      throw DataError(path + ": labels are not contiguous (class " +
                      std::to_string(k) + " missing)");
  return records;
}

namespace {

std::vector<double> embed_text(const Parameters<float>& params,
                               const ModelConfig& cfg,
                               const corpus::Vocab& vocab,
                               const ReprSpec& spec, const std::string& text) {
  const auto sent =
      corpus::encode_sentence(vocab, corpus::tokenize(text), cfg.max_len);
  const auto e = extract::embed(params, cfg, sent, spec);
  return std::vector<double>(e.values.begin(), e.values.end());
}

EvalReport base_report(const ModelConfig& cfg, const std::string& dataset) {
  EvalReport r;
  r.dataset = dataset;
  r.encoder = model::arch_name(cfg.encoder);
  r.decoder = model::arch_name(cfg.decoder);
  r.seed = cfg.seed;
  return r;
}

void correlate_into(EvalReport& report, std::span<const double> sims,
                    std::span<const double> gold) {
  try {
    report.pearson = pearson(sims, gold);
    report.spearman = spearman(sims, gold);
  } catch (const DataError&) {
    report.degenerate = true;
    report.pearson.reset();
    report.spearman.reset();
  }
}

}  // namespace

EvalReport sts_eval(const Parameters<float>& params, const ModelConfig& cfg,
                    const corpus::Vocab& vocab, const ReprSpec& spec,
                    SimilarityKind kind, std::span<const StsRecord> records,
                    const std::string& dataset_name) {
  if (records.size() < 2)
    throw DataError("sts_eval: need at least 2 records");
  spec.validate(cfg);
  std::vector<double> sims, gold;
  sims.reserve(records.size());
  gold.reserve(records.size());
  for (const auto& r : records) {
    const auto a = embed_text(params, cfg, vocab, spec, r.sentence_a);
    const auto b = embed_text(params, cfg, vocab, spec, r.sentence_b);
    sims.push_back(similarity(a, b, kind));
    gold.push_back(r.gold);
  }
  EvalReport report = base_report(cfg, dataset_name);
  report.spec = spec.to_string();
  report.similarity = extract::similarity_name(kind);
  correlate_into(report, sims, gold);
  return report;
}

std::vector<EvalReport> unroll_sweep(const Parameters<float>& params,
                                     const ModelConfig& cfg,
                                     const corpus::Vocab& vocab,
                                     SimilarityKind kind,
                                     std::span<const StsRecord> records,
                                     uint32_t n_max,
                                     const std::string& dataset_name) {
  if (cfg.decoder != model::Arch::rnn)
    throw UsageError("unroll_sweep requires an RNN decoder");
  if (n_max < 1 || n_max > cfg.max_len)
    throw UsageError("unroll_sweep: n_max out of range [1, max_len]");
  if (records.size() < 2) throw DataError("unroll_sweep: need >= 2 records");

  // One encoder pass and one depth-n_max unroll per sentence; every (space,
  // n) row is assembled from prefixes of the same states.
  struct SentenceStates {
    std::vector<double> enc;
    std::vector<std::vector<double>> prev, next;  // h^1..h^{n_max}
  };
  auto compute = [&](const std::string& text) {
    const auto sent =
        corpus::encode_sentence(vocab, corpus::tokenize(text), cfg.max_len);
    SentenceStates st;
    const auto h = extract::encoder_output(params, cfg, sent);
    st.enc.assign(h.begin(), h.end());
    for (model::Side side : {model::Side::prev, model::Side::next}) {
      auto u = extract::unroll_decoder(params, cfg, side,
                                       std::span<const float>(h), n_max);
      auto& dst = side == model::Side::prev ? st.prev : st.next;
      for (auto& s : u.states) dst.emplace_back(s.begin(), s.end());
    }
    return st;
  };

  std::vector<SentenceStates> a_states, b_states;
  std::vector<double> gold;
  for (const auto& r : records) {
    a_states.push_back(compute(r.sentence_a));
    b_states.push_back(compute(r.sentence_b));
    gold.push_back(r.gold);
  }

  const uint32_t hd = cfg.hidden_dim;
  auto assemble = [&](const SentenceStates& st, extract::ReprKind kind_,
                      uint32_t n) {
    std::vector<double> v;
    if (kind_ == extract::ReprKind::encoder) return st.enc;
    for (const auto* side : {&st.prev, &st.next}) {
      if (kind_ == extract::ReprKind::rnn_concat) {
        for (uint32_t t = 0; t < n; ++t)
          v.insert(v.end(), (*side)[t].begin(), (*side)[t].end());
      } else {
        std::vector<double> mean(hd, 0.0);
        for (uint32_t t = 0; t < n; ++t)
          for (uint32_t i = 0; i < hd; ++i) mean[i] += (*side)[t][i];
        // match embed(): accumulate in double, then round through float
        for (uint32_t i = 0; i < hd; ++i)
          v.push_back(double(float(mean[i] / double(n))));
      }
    }
    return v;
  };

  std::vector<EvalReport> rows;
  auto eval_variant = [&](extract::ReprKind kind_, uint32_t n,
                          const std::string& spec_str) {
    std::vector<double> sims;
    sims.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i)
      sims.push_back(similarity(assemble(a_states[i], kind_, n),
                                assemble(b_states[i], kind_, n), kind));
    EvalReport r = base_report(cfg, dataset_name);
    r.spec = spec_str;
    r.similarity = extract::similarity_name(kind);
    correlate_into(r, sims, gold);
    rows.push_back(std::move(r));
  };

  eval_variant(extract::ReprKind::encoder, 0, "encoder");
  for (uint32_t n = 1; n <= n_max; ++n)
    eval_variant(extract::ReprKind::rnn_concat, n,
                 "concat:" + std::to_string(n));
  for (uint32_t n = 1; n <= n_max; ++n)
    eval_variant(extract::ReprKind::rnn_mean, n, "mean:" + std::to_string(n));
  return rows;
}

// ---------------------------------------------------------------------
// Softmax regression + cross-validation
// ---------------------------------------------------------------------

namespace {

uint32_t class_count(std::span<const int> labels) {
  int mx = -1;
  for (int l : labels) mx = std::max(mx, l);
  return uint32_t(mx + 1);
}

}  // namespace

double softmax_regression_loss(const Matrix<double>& features,
                               std::span<const int> labels, uint32_t classes,
                               double l2, std::span<const double> flat) {
  const uint32_t d = features.cols;
  const size_t n = features.rows;
  const double* w = flat.data();
  const double* bias = flat.data() + size_t(classes) * d;
  std::vector<double> logits(classes);
  double loss = 0;
  for (size_t i = 0; i < n; ++i) {
    auto x = features.row(uint32_t(i));
    for (uint32_t k = 0; k < classes; ++k) {
      const double* wk = w + size_t(k) * d;
      double acc = bias[k];
      for (uint32_t j = 0; j < d; ++j) acc += wk[j] * x[j];
      logits[k] = acc;
    }
    loss += log_sum_exp(std::span<const double>(logits)) -
            logits[size_t(labels[i])];
  }
  loss /= double(n);
  double reg = 0;
  for (size_t i = 0; i < size_t(classes) * d; ++i) reg += w[i] * w[i];
  return loss + 0.5 * l2 * reg;
}

std::vector<double> softmax_regression_grad(const Matrix<double>& features,
                                            std::span<const int> labels,
                                            uint32_t classes, double l2,
                                            std::span<const double> flat) {
  const uint32_t d = features.cols;
  const size_t n = features.rows;
  const double* w = flat.data();
  const double* bias = flat.data() + size_t(classes) * d;
  std::vector<double> grad(flat.size(), 0.0);
  double* gw = grad.data();
  double* gb = grad.data() + size_t(classes) * d;
  std::vector<double> logits(classes), probs(classes);
  for (size_t i = 0; i < n; ++i) {
    auto x = features.row(uint32_t(i));
    for (uint32_t k = 0; k < classes; ++k) {
      const double* wk = w + size_t(k) * d;
      double acc = bias[k];
      for (uint32_t j = 0; j < d; ++j) acc += wk[j] * x[j];
      logits[k] = acc;
    }
    softmax(std::span<const double>(logits), std::span<double>(probs));
    probs[size_t(labels[i])] -= 1.0;
    for (uint32_t k = 0; k < classes; ++k) {
      const double g = probs[k] / double(n);
      double* gwk = gw + size_t(k) * d;
      for (uint32_t j = 0; j < d; ++j) gwk[j] += g * x[j];
      gb[k] += g;
    }
  }
  for (size_t i = 0; i < size_t(classes) * d; ++i) gw[i] += l2 * w[i];
  return grad;
}

SoftmaxRegression fit_softmax_regression(const Matrix<double>& features,
                                         std::span<const int> labels,
                                         double l2, uint32_t iters,
                                         double lr) {
  if (features.rows != labels.size())
    throw std::invalid_argument("fit_softmax_regression: label count mismatch");
  if (l2 < 0) throw std::invalid_argument("fit_softmax_regression: l2 < 0");
  const uint32_t classes = class_count(labels);
  if (classes < 2)
    throw DataError("fit_softmax_regression: need at least 2 classes");
  const uint32_t d = features.cols;
  std::vector<double> flat(size_t(classes) * d + classes, 0.0);
  AdamState<double> adam(flat.size(), lr);
  for (uint32_t it = 0; it < iters; ++it) {
    auto grad = softmax_regression_grad(features, labels, classes, l2,
                                        std::span<const double>(flat));
    adam_step(adam, std::span<double>(flat), std::span<const double>(grad));
  }
  SoftmaxRegression clf;
  clf.weights = Matrix<double>(classes, d);
  std::copy(flat.begin(), flat.begin() + size_t(classes) * d,
            clf.weights.data.begin());
  clf.bias.assign(flat.begin() + size_t(classes) * d, flat.end());
  return clf;
}

int predict_class(const SoftmaxRegression& clf, std::span<const double> x) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (uint32_t k = 0; k < clf.weights.rows; ++k) {
    double s = clf.bias[k] + dot(std::span<const double>(clf.weights.row(k)), x);
    if (s > best_score) {
      best_score = s;
      best = int(k);
    }
  }
  return best;
}

std::vector<uint32_t> stratified_fold_assignment(std::span<const int> labels,
                                                 uint32_t folds,
                                                 uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  const uint32_t classes = class_count(labels);
  std::vector<uint32_t> assignment(labels.size(), 0);
  SeededRng rng(seed);
  for (uint32_t k = 0; k < classes; ++k) {
    std::vector<uint32_t> idx;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == int(k)) idx.push_back(uint32_t(i));
    if (idx.size() < folds)
      throw DataError("class " + std::to_string(k) + " has only " +
                      std::to_string(idx.size()) + " examples for " +
                      std::to_string(folds) + " folds");
    for (size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[size_t(rng.next_bounded(i))]);
    for (size_t i = 0; i < idx.size(); ++i)
      assignment[idx[i]] = uint32_t(i % folds);
  }
  return assignment;
}

double cv_accuracy(const Matrix<double>& features, std::span<const int> labels,
                   uint32_t folds, uint64_t seed, double l2, uint32_t iters) {
  const auto assignment = stratified_fold_assignment(labels, folds, seed);
  double acc_sum = 0;
  for (uint32_t f = 0; f < folds; ++f) {
    std::vector<uint32_t> train_idx, test_idx;
    for (size_t i = 0; i < labels.size(); ++i)
      (assignment[i] == f ? test_idx : train_idx).push_back(uint32_t(i));
    Matrix<double> train_x(uint32_t(train_idx.size()), features.cols);
    std::vector<int> train_y(train_idx.size());
    for (size_t i = 0; i < train_idx.size(); ++i) {
      auto src = features.row(train_idx[i]);
      std::copy(src.begin(), src.end(), train_x.row(uint32_t(i)).begin());
      train_y[i] = labels[train_idx[i]];
    }
    auto clf = fit_softmax_regression(train_x, train_y, l2, iters);
    size_t correct = 0;
    for (uint32_t i : test_idx)
      if (predict_class(clf, std::span<const double>(features.row(i))) ==
          labels[i])
        ++correct;
    acc_sum += double(correct) / double(test_idx.size());
  }
  return acc_sum / double(folds);
}

EvalReport transfer_eval_cv(const Parameters<float>& params,
                            const ModelConfig& cfg, const corpus::Vocab& vocab,
                            const ReprSpec& spec,
                            std::span<const LabeledRecord> records,
                            uint32_t folds, const std::string& dataset_name,
                            double l2, uint32_t iters) {
  spec.validate(cfg);
  if (records.empty()) throw DataError("transfer_eval_cv: no records");
  const uint32_t dim = spec.dim(cfg);
  Matrix<double> features(uint32_t(records.size()), dim);
  std::vector<int> labels(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    auto v = embed_text(params, cfg, vocab, spec, records[i].sentence);
    std::copy(v.begin(), v.end(), features.row(uint32_t(i)).begin());
    labels[i] = records[i].label;
  }
  EvalReport r = base_report(cfg, dataset_name);
  r.spec = spec.to_string();
  r.accuracy = cv_accuracy(features, labels, folds, cfg.seed, l2, iters);
  return r;
}

}  // namespace sentlab::eval
