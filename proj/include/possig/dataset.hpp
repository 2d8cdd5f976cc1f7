#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "possig/events.hpp"
#include "possig/lyndon.hpp"
#include "possig/signature.hpp"

namespace possig {

/// One supervised example: the possession prefix encoded as a log-signature
/// plus the n_r most recent actions, with the next event as target.
struct Sample {
  std::vector<double> logsig;
  std::vector<ActionType> recent_actions;  // most recent first
  int scrad = 0;
  ActionType target_action = ActionType::Pass;
  double target_x = 0.0;
  double target_y = 0.0;

  // provenance
  std::string match_id;
  std::string team_id;
  std::size_t possession = 0;  // index within the match
  std::size_t position = 0;    // zero-based index of the target event within the possession
};

inline constexpr int kMinRecent = 3;
inline constexpr int kMaxRecent = 7;

/// Emits one sample per prefix length L in [n_r, len-1].
std::vector<Sample> build_samples(const Possession& possession, int n_r, std::size_t sig_order = kDefaultSigOrder,
                                  std::size_t possession_index = 0);

/// Samples from all possessions of all matches (events grouped by match).
std::vector<Sample> build_dataset(const std::vector<MatchEvent>& events, int n_r,
                                  std::size_t sig_order = kDefaultSigOrder);

/// Match-level random split; deterministic given the seed.
std::pair<std::vector<std::string>, std::vector<std::string>> split_train_test(
    const std::vector<std::string>& matches, std::uint64_t seed, double ratio);

/// Match ids in order of first appearance.
std::vector<std::string> match_ids(const std::vector<Sample>& samples);
std::vector<std::string> match_ids(const std::vector<MatchEvent>& events);

/// Keeps samples whose match id is in `matches`.
std::vector<Sample> select_matches(const std::vector<Sample>& samples, const std::vector<std::string>& matches);

struct Dataset {
  int n_r = 3;
  std::size_t sig_order = kDefaultSigOrder;
  std::vector<Sample> samples;
};

inline constexpr int kDatasetVersion = 1;

void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace possig
