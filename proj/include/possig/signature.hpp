#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "possig/lyndon.hpp"
#include "possig/tensor.hpp"

namespace possig {

/// Spatio-temporal location of one event on the unit pitch.
struct PointXYT {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

/// Piecewise-linear path in R^d after augmentation.
struct AugmentedPath {
  std::size_t dim = 0;
  std::vector<std::vector<double>> points;
  bool time_augmented = false;
  bool visibility_augmented = false;
  std::vector<std::string> channels;
};

/// Channel layout of augment(): (x, y, T, idx, vis).
inline constexpr std::size_t kAugmentedDim = 5;
/// Truncation order used for possession encodings.
inline constexpr std::size_t kDefaultSigOrder = 3;

/// Signature of the straight segment with increment `delta`: the tensor
/// exponential of delta viewed as a level-1 element.
TruncatedTensor segment_signature(std::span<const double> delta, std::size_t order);

/// Signature of a piecewise-linear path, chaining segment signatures.
TruncatedTensor path_signature(const AugmentedPath& path, std::size_t order);
TruncatedTensor path_signature(std::span<const std::vector<double>> points, std::size_t order);

/// Adds the normalized sample-index channel and the visibility channel.
/// A basepoint equal to the first point (with vis = 0, idx = 0) is prepended.
AugmentedPath augment(std::span<const PointXYT> path);

/// augment -> path_signature -> tensor_log -> project_lyndon.
LogSigVector logsig_of_possession(std::span<const PointXYT> path, std::size_t order = kDefaultSigOrder);

}  // namespace possig
