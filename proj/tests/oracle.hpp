#pragma once

// Reference implementations used only by the tests. They are deliberately
// naive and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <vector>

#include "possig/tensor.hpp"

namespace oracle {

using Word = std::vector<std::size_t>;
using WordMap = std::map<Word, double>;

inline void all_words(std::size_t d, std::size_t len, Word& cur, std::vector<Word>& out) {
  if (cur.size() == len) {
    out.push_back(cur);
    return;
  }
  for (std::size_t a = 0; a < d; ++a) {
    cur.push_back(a);
    all_words(d, len, cur, out);
    cur.pop_back();
  }
}

inline std::vector<Word> words_up_to(std::size_t d, std::size_t m) {
  std::vector<Word> out{Word{}};
  for (std::size_t k = 1; k <= m; ++k) {
    Word cur;
    all_words(d, k, cur, out);
  }
  return out;
}

// Straight segment: S^{i1..ik} = prod(delta_ij) / k!.
inline WordMap segment(const std::vector<double>& delta, std::size_t m) {
  WordMap s;
  for (const auto& w : words_up_to(delta.size(), m)) {
    double v = 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) v *= delta[w[i]] / static_cast<double>(i + 1);
    s[w] = v;
  }
  return s;
}

// Chen: S(ab)^w = sum over splits w = uv of S(a)^u S(b)^v.
inline WordMap concat(const WordMap& a, const WordMap& b, std::size_t m) {
  WordMap out;
  for (const auto& [w, unused] : a) {
    (void)unused;
    if (w.size() > m) continue;
    double v = 0.0;
    for (std::size_t cut = 0; cut <= w.size(); ++cut) {
      Word u(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(cut));
      Word r(w.begin() + static_cast<std::ptrdiff_t>(cut), w.end());
      v += a.at(u) * b.at(r);
    }
    out[w] = v;
  }
  return out;
}

inline WordMap signature(const std::vector<std::vector<double>>& pts, std::size_t m) {
  const std::size_t d = pts.front().size();
  WordMap s = segment(std::vector<double>(d, 0.0), m);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    std::vector<double> delta(d);
    for (std::size_t c = 0; c < d; ++c) delta[c] = pts[i][c] - pts[i - 1][c];
    s = concat(s, segment(delta, m), m);
  }
  return s;
}

inline double max_diff(const WordMap& a, const possig::TruncatedTensor& t) {
  double worst = 0.0;
  for (const auto& [w, v] : a) worst = std::max(worst, std::abs(v - t.at(w)));
  return worst;
}

// A word is Lyndon iff it is strictly smaller than each of its proper rotations.
inline bool is_lyndon(const Word& w) {
  for (std::size_t r = 1; r < w.size(); ++r) {
    Word rot(w.begin() + static_cast<std::ptrdiff_t>(r), w.end());
    rot.insert(rot.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(r));
    if (!(w < rot)) return false;
  }
  return !w.empty();
}

inline std::vector<Word> lyndon_brute(std::size_t d, std::size_t m) {
  std::vector<Word> out;
  for (std::size_t k = 1; k <= m; ++k) {
    std::vector<Word> ws;
    Word cur;
    all_words(d, k, cur, ws);
    for (const auto& w : ws)
      if (is_lyndon(w)) out.push_back(w);
  }
  return out;
}

inline std::vector<std::vector<double>> random_path(std::mt19937_64& rng, std::size_t d, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  for (auto& p : pts)
    for (auto& c : p) c = u(rng);
  return pts;
}

// KL(p || q) in nats, plain sum with 0 log 0 = 0.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

}  // namespace oracle
