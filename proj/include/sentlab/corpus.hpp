#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentlab/rng.hpp"

namespace sentlab::corpus {

using TokenId = uint32_t;

constexpr TokenId kPadId = 0;
constexpr TokenId kUnkId = 1;
constexpr TokenId kEosId = 2;
constexpr TokenId kGoId = 3;
constexpr uint32_t kNumReserved = 4;

// Closed vocabulary with four reserved entries at fixed ids.
class Vocab {
 public:
  Vocab();

  TokenId add(const std::string& token);  // returns existing id if present
  TokenId id_of(const std::string& token) const;  // UNK if absent
  const std::string& token_of(TokenId id) const;
  bool contains(const std::string& token) const;
  uint32_t size() const { return uint32_t(tokens_.size()); }

  void save(std::ostream& out) const;            // one token per line
  static Vocab load(std::istream& in);

 private:
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<std::string> tokens_;
};

// Fixed-width token-id sentence: real tokens, then EOS, then PAD suffix.
struct SentenceIds {
  std::vector<TokenId> ids;
  uint32_t true_len = 0;  // count of non-PAD positions, EOS included
};

struct ContextPair {
  SentenceIds centre, prev, next;
  uint32_t position = 0;  // index of the centre sentence in the corpus
};

// Lowercase (ASCII + Latin-1), split on runs of ASCII whitespace.
std::vector<std::string> tokenize(const std::string& line);

// Reserved tokens plus the most frequent corpus tokens, capped at v_max.
// Frequency ties break by first occurrence.
Vocab build_vocab(std::istream& corpus, uint32_t v_max);
Vocab build_vocab_file(const std::string& path, uint32_t v_max);

// OOV -> UNK, clip to max_len - 1 tokens, append EOS, pad with PAD.
SentenceIds encode_sentence(const Vocab& vocab,
                            const std::vector<std::string>& tokens,
                            uint32_t max_len);

std::vector<std::string> decode_sentence(const Vocab& vocab,
                                         const SentenceIds& s);

// One pair per interior sentence; corpus boundaries produce none.
std::vector<ContextPair> build_pairs(const std::vector<SentenceIds>& sentences);

// One epoch: a seeded permutation of [0, n_pairs) chunked into batches;
// the final short batch is kept.
std::vector<std::vector<uint32_t>> epoch_batches(size_t n_pairs,
                                                 size_t batch_size,
                                                 SeededRng& rng);

// Reads a one-sentence-per-line file into encoded sentences.
std::vector<SentenceIds> encode_corpus_file(const std::string& path,
                                            const Vocab& vocab,
                                            uint32_t max_len);

std::vector<std::string> read_lines(const std::string& path);

}  // namespace sentlab::corpus
