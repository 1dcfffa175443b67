#pragma once

#include <cstdint>
#include <string>

namespace sentlab::synth {

// Desk-scale stand-in corpus: sentences carry a latent topic that persists
// between adjacent sentences with probability `persistence`, so context
// prediction has learnable structure. Each topic owns a vocabulary slice;
// a small shared slice adds lexical noise.
struct SynthSpec {
  uint32_t topics = 4;
  uint32_t words_per_topic = 40;
  uint32_t shared_words = 20;
  double noise_prob = 0.2;  // chance a token is drawn from the shared slice
  uint32_t sentences = 2000;
  uint32_t len_lo = 4;
  uint32_t len_hi = 12;
  double persistence = 0.9;
  uint32_t sts_pairs = 500;
  uint32_t transfer_records = 600;
  uint64_t seed = 1;

  void validate() const;
};

struct SynthFiles {
  std::string corpus_path;    // one sentence per line
  std::string sts_path;       // TSV, gold = 5 x topic-overlap fraction
  std::string transfer_path;  // TSV, label = topic
};

// Writes the three files into out_dir; byte-identical for identical specs.
SynthFiles generate_synthetic(const SynthSpec& spec,
                              const std::string& out_dir);

}  // namespace sentlab::synth
