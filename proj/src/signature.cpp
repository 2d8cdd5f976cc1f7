#include "possig/signature.hpp"

#include "possig/errors.hpp"

namespace possig {

TruncatedTensor segment_signature(std::span<const double> delta, std::size_t order) {
  require(!delta.empty(), "segment_signature: empty increment");
  require(order >= 1, "segment_signature: order must be >= 1");
  const std::size_t d = delta.size();
  auto sig = TruncatedTensor::identity(d, order);
  // level k = level (k-1) (x) delta / k
  for (std::size_t k = 1; k <= order; ++k) {
    auto prev = sig.level(k - 1);
    auto cur = sig.level(k);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t u = 0; u < prev.size(); ++u) {
      const double base = prev[u] * inv_k;
      for (std::size_t i = 0; i < d; ++i) cur[u * d + i] = base * delta[i];
    }
  }
  return sig;
}

TruncatedTensor path_signature(std::span<const std::vector<double>> points, std::size_t order) {
  require(points.size() >= 2, "path_signature: need at least 2 points");
  const std::size_t d = points.front().size();
  require(d >= 1, "path_signature: zero-dimensional path");
  auto sig = TruncatedTensor::identity(d, order);
  std::vector<double> delta(d);
  for (std::size_t p = 1; p < points.size(); ++p) {
    require(points[p].size() == d, "path_signature: ragged path");
    bool still = true;
    for (std::size_t i = 0; i < d; ++i) {
      delta[i] = points[p][i] - points[p - 1][i];
      still = still && delta[i] == 0.0;
    }
    if (still) continue;
    sig = tensor_mul(sig, segment_signature(delta, order));
  }
  return sig;
}

TruncatedTensor path_signature(const AugmentedPath& path, std::size_t order) {
  return path_signature(std::span<const std::vector<double>>(path.points), order);
}

AugmentedPath augment(std::span<const PointXYT> path) {
  require(!path.empty(), "augment: empty path");
  const std::size_t n = path.size();
  AugmentedPath out;
  out.dim = kAugmentedDim;
  out.time_augmented = true;
  out.visibility_augmented = true;
  out.channels = {"x", "y", "T", "idx", "vis"};
  out.points.reserve(n + 1);
  out.points.push_back({path[0].x, path[0].y, path[0].t, 0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    const double idx = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.points.push_back({path[i].x, path[i].y, path[i].t, idx, 1.0});
  }
  return out;
}

LogSigVector logsig_of_possession(std::span<const PointXYT> path, std::size_t order) {
  return project_lyndon(tensor_log(path_signature(augment(path), order)));
}

}  // namespace possig
