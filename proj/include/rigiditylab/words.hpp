#pragma once

#include <cstdlib>
#include <vector>

#include "rigiditylab/common.hpp"

namespace rigiditylab {

// A word in a free group on generators 1..k, spelled as signed 1-based
// letters: 3 means the third generator, -3 its inverse.
using Word = std::vector<int>;

inline Word free_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (int letter : w) {
    if (!out.empty() && out.back() == -letter)
      out.pop_back();
    else
      out.push_back(letter);
  }
  return out;
}

inline Word word_inverse(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(-*it);
  return out;
}

inline Word word_mul(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return free_reduce(out);
}

// Letters ordered 1, -1, 2, -2, ...; used for the canonical ball ordering.
inline std::vector<int> letter_order(int k) {
  std::vector<int> letters;
  letters.reserve(2 * static_cast<std::size_t>(k));
  for (int g = 1; g <= k; ++g) {
    letters.push_back(g);
    letters.push_back(-g);
  }
  return letters;
}

// All freely reduced words of length <= n over k generators, in length-lex
// order (empty word first).  Grows as 1 + sum_{i<=n} 2k(2k-1)^(i-1).
inline std::vector<Word> enumerate_ball(int k, int n) {
  std::vector<Word> out;
  out.emplace_back();
  std::vector<Word> frontier = {Word{}};
  const std::vector<int> letters = letter_order(k);
  for (int len = 1; len <= n; ++len) {
    std::vector<Word> next;
    next.reserve(frontier.size() * 2 * static_cast<std::size_t>(k));
    for (const Word& w : frontier) {
      for (int letter : letters) {
        if (!w.empty() && w.back() == -letter) continue;
        Word child = w;
        child.push_back(letter);
        next.push_back(std::move(child));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

// Signed exponent sums per generator (the image in Z^k).
inline std::vector<long> exponent_sums(const Word& w, int k) {
  std::vector<long> sums(static_cast<std::size_t>(k), 0);
  for (int letter : w) sums[static_cast<std::size_t>(std::abs(letter)) - 1] += letter > 0 ? 1 : -1;
  return sums;
}

struct Presentation {
  int generators = 0;
  std::vector<Word> relators;
};

// Throws ValidationError when letters fall outside 1..k or k < 1.  Relators
// are checked as given; callers that want reduced relators reduce first.
inline void validate_presentation(const Presentation& p, const std::string& where = "presentation") {
  if (p.generators < 1)
    throw ValidationError(where + "/generators", "generator count must be at least 1");
  for (std::size_t i = 0; i < p.relators.size(); ++i) {
    for (int letter : p.relators[i]) {
      if (letter == 0 || std::abs(letter) > p.generators)
        throw ValidationError(where + "/relators/" + std::to_string(i),
                              "letter outside the generator range");
    }
  }
}

// One term of a free (Fox) derivative: sign * [prefix] at the given
// generator.  For a letter +g at position p the prefix is w[0..p); for -g it
// is w[0..p] including the inverted letter itself.
struct FoxTerm {
  int sign = 0;
  Word prefix;
  int generator = 0;
};

inline std::vector<FoxTerm> fox_terms(const Word& w) {
  std::vector<FoxTerm> terms;
  terms.reserve(w.size());
  Word prefix;
  for (int letter : w) {
    if (letter > 0) {
      terms.push_back({+1, prefix, letter});
      prefix.push_back(letter);
    } else {
      prefix.push_back(letter);
      terms.push_back({-1, prefix, -letter});
    }
  }
  return terms;
}

}  // namespace rigiditylab
