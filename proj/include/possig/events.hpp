#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace possig {

/// The seven action categories. Order is the class index used everywhere
/// (softmax outputs, Brier vectors, embedding rows).
enum class ActionType : std::uint8_t {
  Pass = 0,
  Dribble = 1,
  Cross = 2,
  Shot = 3,
  Goal = 4,
  PossessionEnd = 5,
  MatchEnd = 6,
};

inline constexpr std::size_t kNumActions = 7;
inline constexpr std::array<ActionType, kNumActions> kAllActions = {
    ActionType::Pass, ActionType::Dribble, ActionType::Cross,         ActionType::Shot,
    ActionType::Goal, ActionType::PossessionEnd, ActionType::MatchEnd};

char action_code(ActionType a);
std::optional<ActionType> action_from_code(std::string_view code);
inline std::size_t action_index(ActionType a) { return static_cast<std::size_t>(a); }

/// Style actions {p,d,x,s} versus contextual {g,_,@}.
bool is_style_action(ActionType a);

struct MatchEvent {
  std::string match_id;
  std::string team_id;
  ActionType action = ActionType::Pass;
  double x = 0.0;  // unit-scaled, attacking left to right
  double y = 0.0;
  double t = 0.0;  // unit-scaled match clock
  int scrad = 0;   // goal difference from this team's view before the event
  std::string competition;
  double raw_time = 0.0;  // seconds on the continuous match clock
};

enum class PossessionEnd : std::uint8_t { Loss, Goal, TeamChange, MatchEnd, EndOfData };

struct Possession {
  std::vector<MatchEvent> events;
  PossessionEnd terminal = PossessionEnd::EndOfData;
  std::size_t first_index = 0;  // position of events[0] in the segmented list

  std::size_t size() const { return events.size(); }
  const std::string& match_id() const { return events.front().match_id; }
  const std::string& team_id() const { return events.front().team_id; }
};

struct RejectedRecord {
  std::size_t line = 0;
  std::string reason;
};

struct IngestResult {
  std::vector<MatchEvent> events;
  std::vector<RejectedRecord> rejected;
  std::vector<std::string> warnings;
};

/// Parses newline-delimited JSON events (see README for the schema),
/// rescales to the unit pitch, flips coordinates for teams attacking right
/// to left, sorts by (match_id, clock) and derives scrad.
IngestResult ingest_events(std::istream& in);
IngestResult ingest_events_file(const std::string& path);

/// Writes canonical events in the ingest schema (unit pitch, period 1,
/// clock = T) so that re-ingesting reproduces them.
void export_events(std::ostream& out, const std::vector<MatchEvent>& events);

/// Splits one match's events into possessions. '@' events close the current
/// possession and are not part of any possession.
std::vector<Possession> segment_possessions(const std::vector<MatchEvent>& events);

/// Groups events by match_id, preserving order of first appearance.
std::vector<std::vector<MatchEvent>> group_by_match(const std::vector<MatchEvent>& events);

}  // namespace possig
