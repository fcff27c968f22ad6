#include <gtest/gtest.h>

#include <fstream>

#include "json.hpp"
#include "oracles.hpp"
#include "stutterbias/random.hpp"
#include "stutterbias/textnorm.hpp"

using namespace stutterbias;
using namespace stutterbias::textnorm;

namespace {

std::string apply(const std::string& fn, const std::string& input) {
  if (fn == "normalize") return normalize(input);
  if (fn == "basic_normalize") return basic_normalize(input);
  if (fn == "normalize_numbers") return normalize_numbers(input);
  if (fn == "strip_atmospherics") return strip_atmospherics(input, default_atmospherics());
  throw std::runtime_error("unknown function " + fn);
}

std::string random_text(RandomSource& rng) {
  static const std::vector<std::string> pieces = {
      "one", "two", "twenty", "hundred", "thousand", "million", "and", "zero", "nineteen",
      "ninety", "seven", "the", "How", "ARE", "you", "[laughter]", "(noise)", "<sil>", ",", ".",
      "!", "?", "-", "'", "  ", "\t", "café", "ÆØ", "ß", "×", "😀", "42", "007", "[", "]", "<um>"};
  std::string s;
  const auto n = rng.uniform_int(0, 12);
  for (int i = 0; i < n; ++i) {
    s += pieces[rng.uniform_index(pieces.size())];
    if (rng.uniform_index(3) != 0) s += ' ';
  }
  return s;
}

}  // namespace

TEST(Textnorm, GoldenTable) {
  std::ifstream in(std::string(TEST_DATA_DIR) + "/textnorm_golden.jsonl");
  ASSERT_TRUE(in);
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::string fn = j.at("fn"), input = j.at("input"), expected = j.at("expected");
    EXPECT_EQ(apply(fn, input), expected) << fn << "(" << input << ")";
    ++cases;
  }
  EXPECT_EQ(cases, 200);
}

TEST(Textnorm, DocumentedExamples) {
  EXPECT_EQ(normalize("How are you?"), "how are you");
  EXPECT_EQ(normalize("  Hello,   WORLD!! "), "hello world");
  EXPECT_EQ(normalize(""), "");
  EXPECT_EQ(normalize_numbers("one hundred twenty three"), "123");
  EXPECT_EQ(normalize_numbers("i have two dogs"), "i have 2 dogs");
  EXPECT_EQ(normalize_numbers("hundred"), "hundred");
  EXPECT_EQ(normalize("How are <um> you?"), "how are um you");
  EXPECT_EQ(normalize("Twenty-one!"), "21");
  EXPECT_EQ(strip_atmospherics("[laughter] how are you", default_atmospherics()), " how are you");
}

TEST(Textnorm, NumberRoundTrip0To9999) {
  for (long n = 0; n <= 9999; ++n) {
    ASSERT_EQ(normalize_numbers(oracle::number_words(n)), std::to_string(n)) << oracle::number_words(n);
  }
}

TEST(Textnorm, LargeNumbers) {
  for (long n : {10000L, 65536L, 999999L, 1000000L, 1000001L, 123456789L, 2000000000L}) {
    EXPECT_EQ(normalize_numbers(oracle::number_words(n)), std::to_string(n));
  }
}

TEST(Textnorm, AndInsideNumbers) {
  EXPECT_EQ(normalize_numbers("one hundred and five"), "105");
  EXPECT_EQ(normalize_numbers("two thousand and one"), "2001");
  EXPECT_EQ(normalize_numbers("one thousand and"), "1000 and");
  EXPECT_EQ(normalize_numbers("cats and dogs"), "cats and dogs");
}

TEST(Textnorm, IdempotentOnRandomStrings) {
  RandomSource rng(2024);
  for (int i = 0; i < 10000; ++i) {
    const std::string s = random_text(rng);
    const std::string once = normalize(s);
    ASSERT_EQ(normalize(once), once) << s;
  }
}

TEST(Textnorm, OutputIsCanonicalTokens) {
  RandomSource rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::string out = normalize(random_text(rng));
    ASSERT_EQ(join(tokenize(out)), out);
    for (char c : out) ASSERT_TRUE(c == ' ' || std::isdigit(static_cast<unsigned char>(c)) ||
                                   std::islower(static_cast<unsigned char>(c)));
  }
}

TEST(Textnorm, StripIsCaseInsensitiveAndKeepsSpacing) {
  const auto lex = default_atmospherics();
  EXPECT_EQ(strip_atmospherics("Hello[LAUGHTER]world", lex), "Helloworld");
  EXPECT_EQ(strip_atmospherics("a (Noise) b", lex), "a  b");
  EXPECT_EQ(strip_atmospherics("<um>", lex), "<um>");
}

TEST(Textnorm, ConfigFlags) {
  NormalizationConfig c;
  c.normalize_numbers = false;
  EXPECT_EQ(normalize("Twenty one", c), "twenty one");
  c = {};
  c.atmospherics_lexicon = {"<um>"};
  EXPECT_EQ(normalize("How are <um> you?", c), "how are you");
  EXPECT_EQ(normalize("[laughter] hi", c), "laughter hi");
  c = {};
  c.lowercase = false;
  EXPECT_EQ(normalize("Hello", c), "Hello");
}

TEST(Textnorm, ConfigJsonRoundTrip) {
  NormalizationConfig c;
  c.strip_punctuation = false;
  c.atmospherics_lexicon = {"[x]"};
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.strip_punctuation, false);
  EXPECT_EQ(back.atmospherics_lexicon, c.atmospherics_lexicon);
  EXPECT_THROW(config_from_json({{"atmospherics_lexicon", {""}}}), std::exception);
}

TEST(Textnorm, InvalidUtf8BecomesSpace) {
  EXPECT_EQ(basic_normalize("a\xff" "b"), "a b");
  EXPECT_EQ(basic_normalize("caf\xc3"), "caf");
}
