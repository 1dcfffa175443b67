#include "sentlab/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "sentlab/errors.hpp"

namespace sentlab::corpus {

namespace {

const char* kReservedTokens[kNumReserved] = {"<pad>", "<unk>", "<eos>", "<go>"};

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

// ASCII A-Z plus the Latin-1 uppercase range; other codepoints pass through.
void lowercase_utf8(std::string& s) {
  for (size_t i = 0; i < s.size(); ++i) {
    unsigned char c = s[i];
    if (c >= 'A' && c <= 'Z') {
      s[i] = char(c + 32);
    } else if (c == 0xC3 && i + 1 < s.size()) {
      unsigned char d = s[i + 1];
      // U+00C0..U+00DE except U+00D7 (multiplication sign)
      if (d >= 0x80 && d <= 0x9E && d != 0x97) s[i + 1] = char(d + 0x20);
      ++i;
    } else if (c >= 0x80) {
      // skip continuation bytes of other multi-byte sequences
    }
  }
}

}  // namespace

Vocab::Vocab() {
  for (const char* t : kReservedTokens) {
    ids_.emplace(t, TokenId(tokens_.size()));
    tokens_.emplace_back(t);
  }
}

TokenId Vocab::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  TokenId id = TokenId(tokens_.size());
  ids_.emplace(token, id);
  tokens_.push_back(token);
  return id;
}

TokenId Vocab::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token_of(TokenId id) const {
  if (id >= tokens_.size())
    throw std::invalid_argument("Vocab: id out of range");
  return tokens_[id];
}

bool Vocab::contains(const std::string& token) const {
  return ids_.count(token) != 0;
}

void Vocab::save(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

Vocab Vocab::load(std::istream& in) {
  Vocab v;
  std::string line;
  uint32_t idx = 0;
  while (std::getline(in, line)) {
    if (idx < kNumReserved) {
      if (line != kReservedTokens[idx])
        throw DataError("Vocab::load: reserved token mismatch at line " +
                        std::to_string(idx));
    } else {
      if (line.empty())
        throw DataError("Vocab::load: empty token at line " +
                        std::to_string(idx));
      if (v.add(line) != idx)
        throw DataError("Vocab::load: duplicate token '" + line +
                        "' at line " + std::to_string(idx));
    }
    ++idx;
  }
  if (idx < kNumReserved) throw DataError("Vocab::load: file too short");
  return v;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::string lowered = line;
  lowercase_utf8(lowered);
  std::vector<std::string> out;
  size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && is_ascii_space(lowered[i])) ++i;
    size_t start = i;
    while (i < lowered.size() && !is_ascii_space(lowered[i])) ++i;
    if (i > start) out.push_back(lowered.substr(start, i - start));
  }
  return out;
}

Vocab build_vocab(std::istream& corpus, uint32_t v_max) {
  if (v_max < kNumReserved + 1)
    throw std::invalid_argument("build_vocab: v_max must be >= 5");
  struct Entry {
    uint64_t count = 0;
    uint64_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> counts;
  uint64_t ordinal = 0;
  std::string line;
  Vocab reserved_probe;
  while (std::getline(corpus, line)) {
    for (auto& tok : tokenize(line)) {
      if (reserved_probe.contains(tok)) continue;  // reserved spellings stay reserved
      auto [it, inserted] = counts.try_emplace(tok);
      if (inserted) it->second.first_seen = ordinal++;
      it->second.count += 1;
    }
  }
  if (corpus.bad()) throw DataError("build_vocab: unreadable corpus stream");

  std::vector<std::pair<std::string, Entry>> sorted(counts.begin(),
                                                    counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first_seen < b.second.first_seen;
  });

  Vocab v;
  const size_t budget = v_max - kNumReserved;
  for (size_t i = 0; i < sorted.size() && i < budget; ++i) v.add(sorted[i].first);
  return v;
}

Vocab build_vocab_file(const std::string& path, uint32_t v_max) {
  std::ifstream in(path);
  if (!in) throw DataError("build_vocab: cannot open " + path);
  return build_vocab(in, v_max);
}

SentenceIds encode_sentence(const Vocab& vocab,
                            const std::vector<std::string>& tokens,
                            uint32_t max_len) {
  if (max_len < 2)
    throw std::invalid_argument("encode_sentence: max_len must be >= 2");
  SentenceIds s;
  s.ids.reserve(max_len);
  const size_t keep = std::min(tokens.size(), size_t(max_len) - 1);
  for (size_t i = 0; i < keep; ++i) s.ids.push_back(vocab.id_of(tokens[i]));
  s.ids.push_back(kEosId);
  s.true_len = uint32_t(s.ids.size());
  s.ids.resize(max_len, kPadId);
  return s;
}

std::vector<std::string> decode_sentence(const Vocab& vocab,
                                         const SentenceIds& s) {
  std::vector<std::string> out;
  for (uint32_t i = 0; i < s.true_len; ++i) out.push_back(vocab.token_of(s.ids[i]));
  return out;
}

std::vector<ContextPair> build_pairs(const std::vector<SentenceIds>& sentences) {
  std::vector<ContextPair> pairs;
  if (sentences.size() < 3) return pairs;
  pairs.reserve(sentences.size() - 2);
  for (size_t i = 1; i + 1 < sentences.size(); ++i) {
    ContextPair p;
    p.centre = sentences[i];
    p.prev = sentences[i - 1];
    p.next = sentences[i + 1];
    p.position = uint32_t(i);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<std::vector<uint32_t>> epoch_batches(size_t n_pairs,
                                                 size_t batch_size,
                                                 SeededRng& rng) {
  if (batch_size < 1)
    throw std::invalid_argument("epoch_batches: batch_size must be >= 1");
  std::vector<uint32_t> perm(n_pairs);
  for (size_t i = 0; i < n_pairs; ++i) perm[i] = uint32_t(i);
  for (size_t i = n_pairs; i > 1; --i) {
    size_t j = size_t(rng.next_bounded(i));
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<std::vector<uint32_t>> batches;
  for (size_t start = 0; start < n_pairs; start += batch_size) {
    size_t end = std::min(start + batch_size, n_pairs);
    batches.emplace_back(perm.begin() + start, perm.begin() + end);
  }
  return batches;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<SentenceIds> encode_corpus_file(const std::string& path,
                                            const Vocab& vocab,
                                            uint32_t max_len) {
  std::vector<SentenceIds> out;
  for (const auto& line : read_lines(path))
    out.push_back(encode_sentence(vocab, tokenize(line), max_len));
  return out;
}

}  // namespace sentlab::corpus
