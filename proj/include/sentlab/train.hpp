#pragma once

#include <chrono>
#include <span>
#include <vector>

#include "sentlab/adam.hpp"
#include "sentlab/corpus.hpp"
#include "sentlab/errors.hpp"
#include "sentlab/model.hpp"

namespace sentlab::model {

struct TrainStats {
  uint32_t epoch = 0;            // 1-based
  double mean_nll_per_word = 0;  // over every context word seen this epoch
  double wall_seconds = 0;       // informational; never serialised
};

template <class S>
struct TrainResult {
  Parameters<S> params;
  std::vector<TrainStats> history;
};

// Seeded end to end: one RNG stream drives initialisation and every epoch
// permutation, so identical (config, pairs) reproduce identical parameters
// bit for bit.
template <class S>
TrainResult<S> train(const ModelConfig& cfg,
                     const std::vector<corpus::ContextPair>& pairs) {
  cfg.validate();
  if (pairs.empty() && cfg.epochs > 0)
    throw DataError("train: corpus yields no context pairs");
  SeededRng rng(cfg.seed);
  TrainResult<S> result{init_parameters<S>(cfg, rng), {}};

  const size_t n_params = parameter_count(result.params);
  AdamState<S> adam(n_params, double(cfg.learning_rate));
  std::vector<S> flat(n_params), gflat;

  for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double nll_sum = 0;
    size_t word_sum = 0;
    for (const auto& batch_idx :
         corpus::epoch_batches(pairs.size(), cfg.batch_size, rng)) {
      std::vector<corpus::ContextPair> batch;
      batch.reserve(batch_idx.size());
      for (uint32_t i : batch_idx) batch.push_back(pairs[i]);
      BatchLoss<S> loss = loss_batch(result.params, cfg,
                                     std::span<const corpus::ContextPair>(batch));
      nll_sum += loss.nll_per_word * double(loss.context_words);
      word_sum += loss.context_words;

      flat = flatten(result.params);
      gflat = flatten(loss.grads);
      adam_step(adam, std::span<S>(flat), std::span<const S>(gflat));
      unflatten(std::span<const S>(flat), result.params);
    }
    TrainStats st;
    st.epoch = epoch;
    st.mean_nll_per_word = nll_sum / double(word_sum);
    st.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.history.push_back(st);
  }
  return result;
}

}  // namespace sentlab::model
