#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "possig/events.hpp"
#include "possig/valuation.hpp"

namespace possig {

/// Per-team per-match sums of the possession metrics.
struct TeamMatchRow {
  std::string match_id;
  std::string team_id;
  std::size_t possessions = 0;
  double lpv_pred = 0.0;
  double lpv_obs = 0.0;
  double hpus_pred = 0.0;
  double hpus_obs = 0.0;
  double poss_util_pred = 0.0;
  double poss_util_obs = 0.0;
  double rel_diff = 0.0;  // sum over possessions where it is defined
  double goals = 0.0;
  std::optional<double> external_xg;
};

struct Outcome {
  double goals = 0.0;
  std::optional<double> external_xg;
};

/// (match_id, team_id) -> outcome, read from a CSV with header
/// match_id,team_id,goals,external_xg.
using OutcomeTable = std::map<std::pair<std::string, std::string>, Outcome>;
OutcomeTable read_outcomes(std::istream& in);

/// Rows ordered by match (first appearance in `events`) then team. Goals
/// are counted from the events unless an outcome table overrides them.
std::vector<TeamMatchRow> aggregate(const std::vector<ValuedPossession>& valued, const std::vector<MatchEvent>& events,
                                    const OutcomeTable* outcomes = nullptr);

/// Pearson correlation; empty when either column is constant or n < 2.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationTable {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<std::optional<double>>> values;
};

/// Metric columns available on every row (plus external_xg when all rows carry it).
std::vector<std::string> metric_columns(const std::vector<TeamMatchRow>& rows);
double column_value(const TeamMatchRow& row, const std::string& column);

/// Correlation matrix among the metric and outcome columns.
CorrelationTable correlate(const std::vector<TeamMatchRow>& rows);

/// Pairs each team-match with the same team's next match and correlates the
/// current metrics with next-match goals, xG and predicted LPV. Teams with a
/// single match contribute nothing.
CorrelationTable future_correlations(const std::vector<TeamMatchRow>& rows);

struct Report {
  std::vector<TeamMatchRow> rows;
  CorrelationTable same_match;
  CorrelationTable next_match;
};

Report aggregate_and_correlate(const std::vector<ValuedPossession>& valued, const std::vector<MatchEvent>& events,
                               const OutcomeTable* outcomes = nullptr);

/// Shortest round-trip decimal form; "NA" for empty values.
std::string format_number(double v);
std::string format_number(const std::optional<double>& v);

void write_team_match_csv(std::ostream& out, const std::vector<TeamMatchRow>& rows);
void write_correlation_csv(std::ostream& out, const CorrelationTable& table);
void write_valued_possessions_csv(std::ostream& out, const std::vector<ValuedPossession>& valued);
void write_valued_actions_csv(std::ostream& out, const std::vector<ValuedPossession>& valued);

}  // namespace possig
