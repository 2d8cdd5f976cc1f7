#include "possig/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "possig/errors.hpp"

namespace possig {

std::size_t tensor_size(std::size_t dim, std::size_t order) {
  std::size_t total = 0;
  std::size_t width = 1;
  for (std::size_t k = 0; k <= order; ++k) {
    total += width;
    width *= dim;
  }
  return total;
}

TruncatedTensor::TruncatedTensor(std::size_t dim, std::size_t order) : dim_(dim), order_(order) {
  require(dim >= 1, "TruncatedTensor: dim must be >= 1");
  offsets_.resize(order + 2);
  std::size_t width = 1;
  offsets_[0] = 0;
  for (std::size_t k = 0; k <= order; ++k) {
    offsets_[k + 1] = offsets_[k] + width;
    width *= dim;
  }
  coeffs_.assign(offsets_.back(), 0.0);
}

TruncatedTensor TruncatedTensor::identity(std::size_t dim, std::size_t order) {
  TruncatedTensor t(dim, order);
  t.coeffs_[0] = 1.0;
  return t;
}

std::span<double> TruncatedTensor::level(std::size_t k) {
  require(k <= order_, "TruncatedTensor::level: level above truncation order");
  return {coeffs_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
}

std::span<const double> TruncatedTensor::level(std::size_t k) const {
  require(k <= order_, "TruncatedTensor::level: level above truncation order");
  return {coeffs_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
}

namespace {

std::size_t word_index(std::span<const std::size_t> word, std::size_t dim) {
  std::size_t idx = 0;
  for (auto letter : word) {
    require(letter < dim, "TruncatedTensor: letter out of range");
    idx = idx * dim + letter;
  }
  return idx;
}

void require_same_shape(const TruncatedTensor& a, const TruncatedTensor& b, const char* op) {
  if (a.dim() != b.dim() || a.order() != b.order()) {
    throw ContractError(std::string(op) + ": dimension/order mismatch (" + std::to_string(a.dim()) + "," +
                        std::to_string(a.order()) + ") vs (" + std::to_string(b.dim()) + "," +
                        std::to_string(b.order()) + ")");
  }
}

}  // namespace

double TruncatedTensor::at(std::span<const std::size_t> word) const {
  return level(word.size())[word_index(word, dim_)];
}

double& TruncatedTensor::at(std::span<const std::size_t> word) {
  return level(word.size())[word_index(word, dim_)];
}

TruncatedTensor& TruncatedTensor::operator+=(const TruncatedTensor& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

TruncatedTensor& TruncatedTensor::operator-=(const TruncatedTensor& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

TruncatedTensor& TruncatedTensor::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

double TruncatedTensor::max_abs_diff(const TruncatedTensor& other) const {
  require_same_shape(*this, other, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) worst = std::max(worst, std::abs(coeffs_[i] - other.coeffs_[i]));
  return worst;
}

TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b) { return a += b; }
TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b) { return a -= b; }
TruncatedTensor operator*(TruncatedTensor a, double s) { return a *= s; }

TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b) {
  require_same_shape(a, b, "tensor_mul");
  const std::size_t d = a.dim();
  const std::size_t m = a.order();
  TruncatedTensor out(d, m);
  for (std::size_t k = 0; k <= m; ++k) {
    auto dst = out.level(k);
    for (std::size_t i = 0; i <= k; ++i) {
      const std::size_t j = k - i;
      auto left = a.level(i);
      auto right = b.level(j);
      // word (u, v) has index idx(u) * d^|v| + idx(v)
      for (std::size_t u = 0; u < left.size(); ++u) {
        const double lu = left[u];
        if (lu == 0.0) continue;
        double* row = dst.data() + u * right.size();
        for (std::size_t v = 0; v < right.size(); ++v) row[v] += lu * right[v];
      }
    }
  }
  return out;
}

TruncatedTensor tensor_exp(const TruncatedTensor& x) {
  const double c = x.scalar();
  TruncatedTensor nil = x;
  nil.coeffs()[0] = 0.0;

  // sum_{n=0}^{M} nil^n / n!, evaluated Horner-style: 1 + nil(1 + nil/2 (1 + nil/3 (...)))
  const std::size_t m = x.order();
  auto result = TruncatedTensor::identity(x.dim(), m);
  for (std::size_t n = m; n >= 1; --n) {
    result = tensor_mul(nil, result) * (1.0 / static_cast<double>(n));
    result.coeffs()[0] += 1.0;
  }
  if (c != 0.0) result *= std::exp(c);
  return result;
}

TruncatedTensor tensor_log(const TruncatedTensor& sig) {
  if (std::abs(sig.scalar() - 1.0) > 1e-12) {
    throw ContractError("tensor_log: tensor is not group-like (scalar part " + std::to_string(sig.scalar()) + ")");
  }
  TruncatedTensor u = sig;
  u.coeffs()[0] = 0.0;

  // log(1+u) = sum_{n=1}^{M} (-1)^(n+1) u^n / n; Horner form
  // u (1/1 - u (1/2 - u (1/3 - ...)))
  const std::size_t m = sig.order();
  auto acc = TruncatedTensor::zero(sig.dim(), m);
  for (std::size_t n = m; n >= 1; --n) {
    auto term = tensor_mul(u, acc) * -1.0;
    term.coeffs()[0] += 1.0 / static_cast<double>(n);
    acc = std::move(term);
  }
  auto out = tensor_mul(u, acc);
  out.coeffs()[0] = 0.0;
  return out;
}

}  // namespace possig
