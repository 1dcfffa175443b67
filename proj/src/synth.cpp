#include "sentlab/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "sentlab/errors.hpp"
#include "sentlab/rng.hpp"

namespace sentlab::synth {

void SynthSpec::validate() const {
  if (topics < 2) throw UsageError("synth: topics must be >= 2");
  if (!(persistence > 0 && persistence < 1))
    throw UsageError("synth: persistence must be in (0, 1)");
  if (len_lo < 1 || len_hi < len_lo)
    throw UsageError("synth: need 1 <= len_lo <= len_hi");
  if (words_per_topic < 1) throw UsageError("synth: words_per_topic >= 1");
  if (sentences < 1) throw UsageError("synth: sentences >= 1");
  if (!(noise_prob >= 0 && noise_prob < 1))
    throw UsageError("synth: noise_prob must be in [0, 1)");
}

namespace {

std::vector<std::string> make_sentence(const SynthSpec& spec, uint32_t topic,
                                       SeededRng& rng) {
  const uint32_t len =
      spec.len_lo + uint32_t(rng.next_bounded(spec.len_hi - spec.len_lo + 1));
  std::vector<std::string> tokens;
  tokens.reserve(len);
  for (uint32_t i = 0; i < len; ++i) {
    if (spec.shared_words > 0 && rng.next_unit() < spec.noise_prob)
      tokens.push_back("n" + std::to_string(rng.next_bounded(spec.shared_words)));
    else
      tokens.push_back("t" + std::to_string(topic) + "w" +
                       std::to_string(rng.next_bounded(spec.words_per_topic)));
  }
  return tokens;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// Relative frequency of each topic among a sentence's topic-bearing
// tokens, read back from the t<k>w<j> spellings.
std::map<uint32_t, double> topic_histogram(const std::vector<std::string>& s) {
  std::map<uint32_t, uint32_t> counts;
  uint32_t total = 0;
  for (const auto& tok : s) {
    if (tok.size() < 3 || tok[0] != 't') continue;
    const auto w = tok.find('w', 1);
    if (w == std::string::npos) continue;
    counts[uint32_t(std::stoul(tok.substr(1, w - 1)))] += 1;
    total += 1;
  }
  std::map<uint32_t, double> hist;
  for (auto [topic, n] : counts) hist[topic] = double(n) / double(total);
  return hist;
}

// Overlap of the two topic histograms: 1.0 when both sentences spend all
// their topical mass on the same topics, 0.0 when the topics are disjoint.
double lexical_topic_overlap(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  const auto ha = topic_histogram(a);
  const auto hb = topic_histogram(b);
  double overlap = 0;
  for (const auto& [topic, fa] : ha) {
    auto it = hb.find(topic);
    if (it != hb.end()) overlap += std::min(fa, it->second);
  }
  return overlap;
}

uint32_t switch_topic(uint32_t current, uint32_t topics, SeededRng& rng) {
  uint32_t next = uint32_t(rng.next_bounded(topics - 1));
  return next >= current ? next + 1 : next;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("synth: cannot write " + path);
  return out;
}

}  // namespace

SynthFiles generate_synthetic(const SynthSpec& spec,
                              const std::string& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("synth: cannot create directory " + out_dir);

  SynthFiles files;
  files.corpus_path = (std::filesystem::path(out_dir) / "corpus.txt").string();
  files.sts_path = (std::filesystem::path(out_dir) / "sts.tsv").string();
  files.transfer_path =
      (std::filesystem::path(out_dir) / "transfer.tsv").string();

  SeededRng rng(spec.seed);

  {
    auto out = open_out(files.corpus_path);
    uint32_t topic = uint32_t(rng.next_bounded(spec.topics));
    for (uint32_t i = 0; i < spec.sentences; ++i) {
      if (i > 0 && rng.next_unit() >= spec.persistence)
        topic = switch_topic(topic, spec.topics, rng);
      out << join(make_sentence(spec, topic, rng)) << '\n';
    }
  }

  {
    auto out = open_out(files.sts_path);
    out << "# sentence_a\tsentence_b\tgold\n";
    for (uint32_t i = 0; i < spec.sts_pairs; ++i) {
      const uint32_t ta = uint32_t(rng.next_bounded(spec.topics));
      const bool same = rng.next_unit() < 0.5;
      const uint32_t tb = same ? ta : switch_topic(ta, spec.topics, rng);
      const auto a = make_sentence(spec, ta, rng);
      const auto b = make_sentence(spec, tb, rng);
      char gold[16];
      std::snprintf(gold, sizeof gold, "%.4f", 5.0 * lexical_topic_overlap(a, b));
      out << join(a) << '\t' << join(b) << '\t' << gold << '\n';
    }
  }

  {
    auto out = open_out(files.transfer_path);
    out << "# label\tsentence\n";
    for (uint32_t i = 0; i < spec.transfer_records; ++i) {
      const uint32_t topic = i % spec.topics;  // balanced classes
      out << topic << '\t' << join(make_sentence(spec, topic, rng)) << '\n';
    }
  }
  return files;
}

}  // namespace sentlab::synth
