#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace possig {

/// Element of the tensor algebra over R^d truncated at order M.
///
/// Coefficients are stored densely, level by level. Level k holds d^k
/// entries indexed by words (i1..ik) in row-major order, i.e. the word
/// index is i1*d^(k-1) + ... + ik with zero-based letters.
class TruncatedTensor {
 public:
  TruncatedTensor() = default;
  /// Zero tensor.
  TruncatedTensor(std::size_t dim, std::size_t order);

  static TruncatedTensor zero(std::size_t dim, std::size_t order) { return {dim, order}; }
  static TruncatedTensor identity(std::size_t dim, std::size_t order);

  std::size_t dim() const { return dim_; }
  std::size_t order() const { return order_; }
  std::size_t size() const { return coeffs_.size(); }

  std::span<double> level(std::size_t k);
  std::span<const double> level(std::size_t k) const;

  /// Coefficient of a word given as zero-based letters.
  double at(std::span<const std::size_t> word) const;
  double& at(std::span<const std::size_t> word);

  double scalar() const { return coeffs_[0]; }

  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  TruncatedTensor& operator+=(const TruncatedTensor& other);
  TruncatedTensor& operator-=(const TruncatedTensor& other);
  TruncatedTensor& operator*=(double s);

  /// Largest absolute coefficient difference; requires equal shape.
  double max_abs_diff(const TruncatedTensor& other) const;

 private:
  std::size_t dim_ = 0;
  std::size_t order_ = 0;
  std::vector<std::size_t> offsets_;  // order_+2 entries
  std::vector<double> coeffs_;
};

TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b);
TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b);
TruncatedTensor operator*(TruncatedTensor a, double s);

/// (d^(M+1) - 1) / (d - 1), or M + 1 when d == 1.
std::size_t tensor_size(std::size_t dim, std::size_t order);

/// Truncated tensor product.
TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b);

/// Truncated exponential. A nonzero scalar part c contributes the factor e^c.
TruncatedTensor tensor_exp(const TruncatedTensor& x);

/// Truncated logarithm of a group-like element (scalar part must be 1).
TruncatedTensor tensor_log(const TruncatedTensor& sig);

}  // namespace possig
