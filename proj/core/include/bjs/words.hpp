#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <string>
#include <vector>

namespace bjs {

// Reduced words over the alphabet of a free group of rank k.
//
// Letters are generator indices 0 .. 2k-1 stored one per byte; index 2i is
// the i-th positive generator and 2i+1 its formal inverse, so the inverse of
// a letter is `letter ^ 1`.  A word is reduced when no letter is followed by
// its inverse.  The empty word is the identity.
using Letter = char;
using Word = std::string;

inline Letter letter_inverse(Letter l) { return static_cast<Letter>(l ^ 1); }

inline Letter positive_letter(int gen_index) { return static_cast<Letter>(2 * gen_index); }
inline Letter negative_letter(int gen_index) { return static_cast<Letter>(2 * gen_index + 1); }

inline bool word_is_reduced(const Word& w) {
  for (size_t i = 0; i + 1 < w.size(); ++i)
    if (w[i] == letter_inverse(w[i + 1])) return false;
  return true;
}

// Free reduction of an arbitrary letter string.
inline Word word_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Letter l : w) {
    if (!out.empty() && out.back() == letter_inverse(l))
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

// Product of two reduced words, with cancellation at the junction only.
inline Word word_mul(const Word& a, const Word& b) {
  size_t c = 0;
  size_t max_c = std::min(a.size(), b.size());
  while (c < max_c && a[a.size() - 1 - c] == letter_inverse(b[c])) ++c;
  Word out;
  out.reserve(a.size() + b.size() - 2 * c);
  out.append(a, 0, a.size() - c);
  out.append(b, c, b.size() - c);
  return out;
}

inline Word word_inverse(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(letter_inverse(*it));
  return out;
}

// Length of the longest common prefix.
inline int common_prefix_length(const Word& a, const Word& b) {
  size_t n = std::min(a.size(), b.size());
  size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return static_cast<int>(i);
}

// Cancellation amount in the product a*b, i.e. cpl(a^-1, b) for reduced a, b.
inline int word_cancellation(const Word& a, const Word& b) {
  size_t c = 0;
  size_t max_c = std::min(a.size(), b.size());
  while (c < max_c && a[a.size() - 1 - c] == letter_inverse(b[c])) ++c;
  return static_cast<int>(c);
}

inline bool word_has_prefix(const Word& w, const Word& prefix) {
  return w.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), w.begin());
}

// Cyclic reduction w = u * c * u^-1 with c cyclically reduced; returns (u, c).
inline std::pair<Word, Word> word_cyclic_reduce(const Word& w) {
  size_t i = 0, j = w.size();
  while (j >= i + 2 && w[i] == letter_inverse(w[j - 1])) {
    ++i;
    --j;
  }
  return {w.substr(0, i), w.substr(i, j - i)};
}

// Periodic extension of a reduced word to a truncated boundary ray: the
// first `depth` letters of c c c ...  (c must be cyclically reduced).
inline Word word_periodic_ray(const Word& c, int depth) {
  assert(!c.empty());
  Word out;
  out.reserve(static_cast<size_t>(depth));
  while (static_cast<int>(out.size()) < depth) {
    size_t take = std::min(c.size(), static_cast<size_t>(depth) - out.size());
    out.append(c, 0, take);
  }
  return out;
}

// Display form: generator i prints as 'a'+i, its inverse as the capital.
inline std::string word_pretty(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  s.reserve(w.size());
  for (Letter l : w) {
    char base = static_cast<char>('a' + (l >> 1));
    s.push_back((l & 1) ? static_cast<char>(base - 'a' + 'A') : base);
  }
  return s;
}

inline Word word_from_pretty(const std::string& s) {
  Word w;
  if (s == "e" || s == "1") return w;
  w.reserve(s.size());
  for (char c : s) {
    if (c >= 'a' && c <= 'z')
      w.push_back(static_cast<Letter>(2 * (c - 'a')));
    else if (c >= 'A' && c <= 'Z')
      w.push_back(static_cast<Letter>(2 * (c - 'A') + 1));
  }
  return w;
}

// Shortest-then-lexicographic order used for deterministic tie-breaks.
inline bool word_shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace bjs
