#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "possig/tensor.hpp"

namespace possig {

using Word = std::vector<std::size_t>;

/// Lyndon words of length 1..max_len over the zero-based alphabet {0..dim-1},
/// ordered by length and then lexicographically.
std::vector<Word> lyndon_words(std::size_t dim, std::size_t max_len);

/// Cached variant of lyndon_words; safe to call concurrently.
std::shared_ptr<const std::vector<Word>> lyndon_basis(std::size_t dim, std::size_t max_len);

/// Number of Lyndon words of length <= max_len (Witt's necklace formula).
std::size_t witt_dimension(std::size_t dim, std::size_t max_len);

/// Log-signature coordinates at Lyndon-word positions.
struct LogSigVector {
  std::size_t dim = 0;
  std::size_t order = 0;
  std::vector<double> coeffs;
  std::shared_ptr<const std::vector<Word>> basis_words;
};

LogSigVector project_lyndon(const TruncatedTensor& logtensor);

}  // namespace possig
