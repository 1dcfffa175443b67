#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "sentlab/corpus.hpp"
#include "sentlab/errors.hpp"

using namespace sentlab;
using namespace sentlab::corpus;

TEST_CASE("tokenize lowercases and splits on whitespace runs") {
  CHECK(tokenize("Hello  World") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("A a A") == std::vector<std::string>{"a", "a", "a"});
  CHECK(tokenize("  \t mixed\tCASE\n") ==
        std::vector<std::string>{"mixed", "case"});
  // Latin-1 uppercase folds too
  CHECK(tokenize("\xC3\x89t\xC3\xA9") == std::vector<std::string>{"\xC3\xA9t\xC3\xA9"});
}

TEST_CASE("build_vocab keeps the most frequent tokens") {
  std::istringstream in("a a b\n");
  Vocab v = build_vocab(in, 6);
  CHECK(v.size() == 6);
  CHECK(v.id_of("a") == 4);
  CHECK(v.id_of("b") == 5);
  CHECK(v.token_of(kPadId) == "<pad>");
  CHECK(v.token_of(kGoId) == "<go>");

  std::istringstream in2("a a b\n");
  Vocab v2 = build_vocab(in2, 5);
  CHECK(v2.size() == 5);
  CHECK(v2.contains("a"));
  CHECK(!v2.contains("b"));  // frequency cut
  CHECK(v2.id_of("b") == kUnkId);
}

TEST_CASE("build_vocab breaks frequency ties by first occurrence") {
  std::istringstream in("z b\nc z\n");
  Vocab v = build_vocab(in, 6);  // room for z and one of {b, c}
  CHECK(v.contains("z"));
  CHECK(v.contains("b"));
  CHECK(!v.contains("c"));
}

TEST_CASE("build_vocab rejects tiny caps") {
  std::istringstream in("a\n");
  CHECK_THROWS_AS(build_vocab(in, 4), std::invalid_argument);
}

TEST_CASE("encode_sentence pads, clips and appends EOS") {
  std::istringstream in("a a b\n");
  Vocab v = build_vocab(in, 6);

  auto s = encode_sentence(v, {"a"}, 4);
  CHECK(s.ids == std::vector<TokenId>{4, kEosId, kPadId, kPadId});
  CHECK(s.true_len == 2);

  // 35 tokens, max_len 30: 29 kept + EOS
  std::vector<std::string> long_sent(35, "a");
  auto clipped = encode_sentence(v, long_sent, 30);
  CHECK(clipped.true_len == 30);
  CHECK(clipped.ids[29] == kEosId);
  CHECK(clipped.ids[28] == 4);

  auto unk = encode_sentence(v, {"zzz"}, 4);
  CHECK(unk.ids[0] == kUnkId);

  CHECK_THROWS_AS(encode_sentence(v, {"a"}, 1), std::invalid_argument);
}

TEST_CASE("encode_sentence invariants hold on random inputs") {
  std::istringstream in("a b c d e f g\n");
  Vocab v = build_vocab(in, 11);
  SeededRng rng(77);
  const std::vector<std::string> pool = {"a", "b", "c", "d",
                                         "e", "f", "g", "zz"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> toks;
    size_t len = rng.next_bounded(40);
    for (size_t i = 0; i < len; ++i)
      toks.push_back(pool[rng.next_bounded(pool.size())]);
    uint32_t max_len = 2 + uint32_t(rng.next_bounded(35));
    auto s = encode_sentence(v, toks, max_len);
    CHECK(s.ids.size() == max_len);
    // exactly one EOS, terminating the non-PAD prefix
    size_t eos_count = 0;
    for (auto id : s.ids) eos_count += (id == kEosId);
    CHECK(eos_count == 1);
    CHECK(s.ids[s.true_len - 1] == kEosId);
    for (uint32_t i = 0; i < s.true_len; ++i) CHECK(s.ids[i] != kPadId);
    for (uint32_t i = s.true_len; i < max_len; ++i) CHECK(s.ids[i] == kPadId);
  }
}

TEST_CASE("decoding an in-vocabulary short sentence round-trips") {
  std::istringstream in("the cat sat\n");
  Vocab v = build_vocab(in, 10);
  std::vector<std::string> toks = {"the", "cat", "sat"};
  auto s = encode_sentence(v, toks, 10);
  auto back = decode_sentence(v, s);
  REQUIRE(back.size() == 4);
  CHECK(back[0] == "the");
  CHECK(back[1] == "cat");
  CHECK(back[2] == "sat");
  CHECK(back[3] == "<eos>");
}

TEST_CASE("build_pairs skips corpus boundaries") {
  std::istringstream in("a\nb\nc\n");
  Vocab v = build_vocab(in, 8);
  auto mk = [&](const char* t) { return encode_sentence(v, {t}, 4); };

  auto p3 = build_pairs({mk("a"), mk("b"), mk("c")});
  REQUIRE(p3.size() == 1);
  CHECK(p3[0].position == 1);
  CHECK(p3[0].centre.ids[0] == v.id_of("b"));
  CHECK(p3[0].prev.ids[0] == v.id_of("a"));
  CHECK(p3[0].next.ids[0] == v.id_of("c"));

  CHECK(build_pairs({mk("a"), mk("b")}).empty());
  CHECK(build_pairs({}).empty());

  std::vector<SentenceIds> ten(10, mk("a"));
  auto p10 = build_pairs(ten);
  CHECK(p10.size() == 8);
  for (size_t i = 0; i < p10.size(); ++i) CHECK(p10[i].position == i + 1);
}

TEST_CASE("pair count is max(0, n - 2)") {
  std::istringstream in("a\n");
  Vocab v = build_vocab(in, 5);
  auto s = encode_sentence(v, {"a"}, 3);
  for (size_t n = 0; n < 12; ++n) {
    std::vector<SentenceIds> sents(n, s);
    CHECK(build_pairs(sents).size() == (n >= 2 ? n - 2 : 0));
  }
}

TEST_CASE("epoch_batches chunks a seeded permutation") {
  SeededRng rng(1);
  auto batches = epoch_batches(10, 4, rng);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 4);
  CHECK(batches[1].size() == 4);
  CHECK(batches[2].size() == 2);
  std::set<uint32_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  CHECK(seen.size() == 10);

  SeededRng r1(9), r2(9), r3(10);
  auto a = epoch_batches(100, 7, r1);
  auto b = epoch_batches(100, 7, r2);
  auto c = epoch_batches(100, 7, r3);
  CHECK(a == b);
  CHECK(a != c);

  SeededRng r4(2);
  CHECK(epoch_batches(0, 4, r4).empty());
  CHECK_THROWS_AS(epoch_batches(5, 0, r4), std::invalid_argument);
}

TEST_CASE("vocabulary construction and serialisation are deterministic") {
  const std::string corpus_text = "the cat sat\non the mat\nthe end\n";
  std::istringstream in1(corpus_text), in2(corpus_text);
  Vocab v1 = build_vocab(in1, 8);
  Vocab v2 = build_vocab(in2, 8);
  std::ostringstream o1, o2;
  v1.save(o1);
  v2.save(o2);
  CHECK(o1.str() == o2.str());

  std::istringstream back(o1.str());
  Vocab v3 = Vocab::load(back);
  CHECK(v3.size() == v1.size());
  for (TokenId id = 0; id < v1.size(); ++id)
    CHECK(v3.token_of(id) == v1.token_of(id));
}

TEST_CASE("vocab load rejects malformed files") {
  std::istringstream bad("<pad>\n<unk>\n");
  CHECK_THROWS_AS(Vocab::load(bad), DataError);
  std::istringstream wrong("<pad>\n<unk>\n<go>\n<eos>\na\n");
  CHECK_THROWS_AS(Vocab::load(wrong), DataError);
  std::istringstream dup("<pad>\n<unk>\n<eos>\n<go>\na\na\n");
  CHECK_THROWS_AS(Vocab::load(dup), DataError);
  std::istringstream empty_tok("<pad>\n<unk>\n<eos>\n<go>\n\nb\n");
  CHECK_THROWS_AS(Vocab::load(empty_tok), DataError);
}

TEST_CASE("reserved spellings in a corpus do not duplicate reserved ids") {
  std::istringstream in("<pad> word <eos>\n");
  Vocab v = build_vocab(in, 8);
  CHECK(v.id_of("<pad>") == kPadId);
  CHECK(v.id_of("<eos>") == kEosId);
  CHECK(v.contains("word"));
}
