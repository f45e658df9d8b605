#include "oracle_fixtures.hpp"
#include "support.hpp"

#include "sentshift/bleu.hpp"

#include <doctest.h>

using namespace sentshift::bleu;
using testsupport::rel_close;

namespace {

std::vector<TokenizedSentence> tok(const std::vector<std::string> &lines, TokenizeMode mode = TokenizeMode::whitespace) {
  std::vector<TokenizedSentence> out;
  for (const auto &l : lines)
    out.push_back(tokenize(l, mode));
  return out;
}

} // namespace

TEST_CASE("tokenizer modes") {
  CHECK(tokenize("Hello  world") == TokenizedSentence{"hello", "world"});
  CHECK(tokenize("你好", TokenizeMode::character) == TokenizedSentence{"你", "好"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("ÄRGER Über Straße") == TokenizedSentence{"ärger", "über", "straße"});
  CHECK(tokenize("ΑΒΓ Дом", TokenizeMode::whitespace) == TokenizedSentence{"αβγ", "дом"});
  CHECK(tokenize("a b\tc", TokenizeMode::character) == TokenizedSentence{"a", "b", "c"});
  CHECK(parse_mode("character") == TokenizeMode::character);
  CHECK_THROWS(parse_mode("moses"));
}

TEST_CASE("corpus BLEU matches explicit n-gram counting") {
  CHECK(oracle::kBleu.size() >= 20);
  for (std::size_t i = 0; i < oracle::kBleu.size(); ++i) {
    const auto &f = oracle::kBleu[i];
    INFO("fixture " << i);
    const auto h = tok(f.hyps);
    const auto r = tok(f.refs);
    CHECK(rel_close(corpus_bleu(h, r), f.score, 1e-6));
  }
}

TEST_CASE("corpus BLEU boundary cases") {
  const auto refs = tok({"the cat sat on the mat", "it rained all day long"});
  CHECK(corpus_bleu(refs, refs) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(corpus_bleu(tok({"xx yy zz ww", "qq rr ss tt"}), refs) == 0.0);
  CHECK_THROWS_AS(corpus_bleu(tok({"a"}), refs), BleuError);
  CHECK_THROWS_AS(corpus_bleu(tok({"", ""}), refs), BleuError);

  const auto stats = corpus_stats(tok({"the cat the cat"}), tok({"the cat sat"}));
  CHECK(stats.matches[0] == 2);
  CHECK(stats.totals[0] == 4);
  CHECK(stats.matches[1] == 1);
  CHECK(stats.hyp_length == 4);
  CHECK(stats.ref_length == 3);
}

TEST_CASE("character tokenization scores CJK text") {
  const auto h = tok({"我喜欢这部电影"}, TokenizeMode::character);
  const auto r = tok({"我很喜欢这部电影"}, TokenizeMode::character);
  const double score = corpus_bleu(h, r);
  CHECK(score > 0.0);
  CHECK(score < 100.0);
}
