#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "zdq/dp_designer.hpp"
#include "zdq/horizon_infinite.hpp"
#include "zdq/quantizers.hpp"

namespace zdq {

using json = nlohmann::json;

json to_json(const IntervalQuantizer& q);
json to_json(const HyperplaneQuantizer& q);
json to_json(const FinitePartition& q);
json to_json(const Quantizer& q);
// Inverse of to_json; throws InvalidArgument on malformed input.
Quantizer quantizer_from_json(const json& j);

json candidates_json(const GridEnvironment& env);
json candidates_json(const FiniteEnvironment& env);

// Nested tree with the quantizer of every node; `candidates` as returned by
// candidates_json.
json to_json(const PolicyTree& tree, const json& candidates);
json to_json(const PiecingSchedule& schedule);
json to_json(const OccupationHistogram& hist);
json to_json(const BeliefBinning& binning);

// One row per node: t,node,parent,symbol,probability,candidate,<quantizer columns>,stage_cost,value.
void write_policy_csv(std::ostream& out, const PolicyTree& tree, const json& candidates);
void write_schedule_csv(std::ostream& out, const PiecingSchedule& schedule);
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);

// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace zdq
