#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentlab/corpus.hpp"
#include "sentlab/extract.hpp"
#include "sentlab/matrix.hpp"
#include "sentlab/model.hpp"

namespace sentlab::eval {

using extract::ReprSpec;
using extract::SimilarityKind;
using model::ModelConfig;
using model::Parameters;

struct StsRecord {
  std::string sentence_a;
  std::string sentence_b;
  double gold = 0;  // human score in [0, 5]
};

struct LabeledRecord {
  int label = 0;
  std::string sentence;
};

// dot or cosine, accumulated in double. Cosine of a zero vector is an
// error rather than a silent 0.
double similarity(std::span<const double> a, std::span<const double> b,
                  SimilarityKind kind);

// Sample Pearson correlation; throws DataError on constant input.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson of average-tied rank vectors.
double spearman(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

// TSV: sentence_a <tab> sentence_b <tab> gold in [0,5]; '#' lines skipped.
std::vector<StsRecord> read_sts_file(const std::string& path);

// TSV: integer label <tab> sentence. Labels must cover 0..K-1.
std::vector<LabeledRecord> read_transfer_file(const std::string& path);

struct EvalReport {
  std::string dataset;
  std::string encoder;
  std::string decoder;
  std::string spec;        // representation, e.g. "encoder", "concat:3"
  std::string similarity;  // "dot" | "cosine" | "" for transfer rows
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::optional<double> accuracy;
  uint64_t seed = 0;
  std::string fingerprint;
  bool degenerate = false;  // all-equal similarities; metrics left empty
};

// Embeds both sentences of every record with the model's tokenisation and
// encoding rules, scores the pairs, and correlates against gold.
EvalReport sts_eval(const Parameters<float>& params, const ModelConfig& cfg,
                    const corpus::Vocab& vocab, const ReprSpec& spec,
                    SimilarityKind kind, std::span<const StsRecord> records,
                    const std::string& dataset_name);

// One sts_eval per unroll count for the concat and mean spaces, sharing a
// single unroll per sentence, plus the raw encoder output as an n=0
// baseline row.
std::vector<EvalReport> unroll_sweep(const Parameters<float>& params,
                                     const ModelConfig& cfg,
                                     const corpus::Vocab& vocab,
                                     SimilarityKind kind,
                                     std::span<const StsRecord> records,
                                     uint32_t n_max,
                                     const std::string& dataset_name);

// Multinomial logistic regression, full-batch Adam on mean cross-entropy
// plus l2/2 * ||W||^2 (bias unpenalised). Zero-initialised, so the fit is
// deterministic with no RNG involved.
struct SoftmaxRegression {
  Matrix<double> weights;    // classes x features
  std::vector<double> bias;  // classes
};

SoftmaxRegression fit_softmax_regression(const Matrix<double>& features,
                                         std::span<const int> labels,
                                         double l2, uint32_t iters,
                                         double lr = 0.05);

int predict_class(const SoftmaxRegression& clf, std::span<const double> x);

// Loss/gradient over a flat [weights row-major, then bias] vector; the
// same code path fit_softmax_regression optimises, exposed so it can be
// finite-difference checked.
double softmax_regression_loss(const Matrix<double>& features,
                               std::span<const int> labels, uint32_t classes,
                               double l2, std::span<const double> flat);
std::vector<double> softmax_regression_grad(const Matrix<double>& features,
                                            std::span<const int> labels,
                                            uint32_t classes, double l2,
                                            std::span<const double> flat);

// fold id per example: indices of each class, shuffled by the seed, dealt
// round-robin. Pure function of (seed, labels).
std::vector<uint32_t> stratified_fold_assignment(std::span<const int> labels,
                                                 uint32_t folds, uint64_t seed);

// Mean held-out accuracy across the k folds.
double cv_accuracy(const Matrix<double>& features, std::span<const int> labels,
                   uint32_t folds, uint64_t seed, double l2 = 1e-3,
                   uint32_t iters = 500);

EvalReport transfer_eval_cv(const Parameters<float>& params,
                            const ModelConfig& cfg, const corpus::Vocab& vocab,
                            const ReprSpec& spec,
                            std::span<const LabeledRecord> records,
                            uint32_t folds, const std::string& dataset_name,
                            double l2 = 1e-3, uint32_t iters = 500);

}  // namespace sentlab::eval
