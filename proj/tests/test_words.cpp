#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bjs/words.hpp"

using namespace bjs;

TEST_CASE("free reduction and products") {
  Word ab = word_from_pretty("ab");
  Word Ba = word_from_pretty("Ba");
  CHECK(word_pretty(word_mul(ab, word_from_pretty("Ba"))) == "aa");
  CHECK(word_mul(ab, word_inverse(ab)).empty());
  CHECK(word_pretty(word_reduce(word_from_pretty("abBA"))) == "e");
  CHECK(word_is_reduced(ab));
  CHECK(!word_is_reduced(word_from_pretty("a") + word_from_pretty("A")));
  CHECK(word_pretty(word_inverse(word_from_pretty("abC"))) == "cBA");
  (void)Ba;
}

TEST_CASE("prefixes and cancellation") {
  CHECK(common_prefix_length(word_from_pretty("abab"), word_from_pretty("abba")) == 2);
  CHECK(common_prefix_length(word_from_pretty("a"), word_from_pretty("ab")) == 1);
  CHECK(word_cancellation(word_from_pretty("ab"), word_from_pretty("BA")) == 2);
  CHECK(word_cancellation(word_from_pretty("ab"), word_from_pretty("Ba")) == 1);
  CHECK(word_has_prefix(word_from_pretty("abc"), word_from_pretty("ab")));
  CHECK(!word_has_prefix(word_from_pretty("ab"), word_from_pretty("abc")));
}

TEST_CASE("cyclic reduction and rays") {
  auto [u, c] = word_cyclic_reduce(word_from_pretty("abA"));
  CHECK(word_pretty(u) == "a");
  CHECK(word_pretty(c) == "b");
  auto [u2, c2] = word_cyclic_reduce(word_from_pretty("ab"));
  CHECK(u2.empty());
  CHECK(word_pretty(c2) == "ab");
  CHECK(word_pretty(word_periodic_ray(word_from_pretty("ab"), 5)) == "ababa");
}

TEST_CASE("shortlex order") {
  CHECK(word_shortlex_less(word_from_pretty("b"), word_from_pretty("aa")));
  CHECK(word_shortlex_less(word_from_pretty("aa"), word_from_pretty("ab")));
  CHECK(!word_shortlex_less(word_from_pretty("ab"), word_from_pretty("ab")));
}
