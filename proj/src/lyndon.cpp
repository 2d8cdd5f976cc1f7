#include "possig/lyndon.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "possig/errors.hpp"

namespace possig {

std::vector<Word> lyndon_words(std::size_t dim, std::size_t max_len) {
  require(dim >= 1, "lyndon_words: dim must be >= 1");
  std::vector<Word> words;
  if (max_len == 0) return words;

  // Duval's generation in lexicographic order
  Word w{0};
  while (!w.empty()) {
    words.push_back(w);
    const std::size_t m = w.size();
    while (w.size() < max_len) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == dim - 1) w.pop_back();
    if (!w.empty()) ++w.back();
  }
  std::stable_sort(words.begin(), words.end(),
                   [](const Word& a, const Word& b) { return a.size() < b.size(); });
  return words;
}

std::shared_ptr<const std::vector<Word>> lyndon_basis(std::size_t dim, std::size_t max_len) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const std::vector<Word>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{dim, max_len}];
  if (!slot) slot = std::make_shared<const std::vector<Word>>(lyndon_words(dim, max_len));
  return slot;
}

namespace {

int mobius(std::size_t n) {
  int result = 1;
  for (std::size_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    n /= p;
    if (n % p == 0) return 0;
    result = -result;
  }
  if (n > 1) result = -result;
  return result;
}

}  // namespace

std::size_t witt_dimension(std::size_t dim, std::size_t max_len) {
  std::size_t total = 0;
  for (std::size_t n = 1; n <= max_len; ++n) {
    long long sum = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (n % k != 0) continue;
      long long power = 1;
      for (std::size_t i = 0; i < n / k; ++i) power *= static_cast<long long>(dim);
      sum += mobius(k) * power;
    }
    total += static_cast<std::size_t>(sum / static_cast<long long>(n));
  }
  return total;
}

LogSigVector project_lyndon(const TruncatedTensor& logtensor) {
  LogSigVector out;
  out.dim = logtensor.dim();
  out.order = logtensor.order();
  out.basis_words = lyndon_basis(out.dim, out.order);
  out.coeffs.reserve(out.basis_words->size());
  for (const auto& w : *out.basis_words) out.coeffs.push_back(logtensor.at(w));
  return out;
}

}  // namespace possig
