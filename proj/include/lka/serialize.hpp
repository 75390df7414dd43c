#ifndef LKA_SERIALIZE_HPP
#define LKA_SERIALIZE_HPP

#include <json.hpp>

#include "lka/asymptotics.hpp"
#include "lka/info.hpp"
#include "lka/maxent.hpp"
#include "lka/scenarios.hpp"
#include "lka/secondary.hpp"
#include "lka/worlds.hpp"

namespace lka {

using json = nlohmann::json;

// infinities travel as the strings "inf" / "-inf" (JSON has no literal)
json json_real(double v);
double real_from_json(const json& j);

json to_json(const WorldSpace& s);
json to_json(const TruthSet& t);
json to_json(const Partition& p);
json to_json(const BeliefMeasure& m);
json to_json(const FeatureSet& f);
json to_json(const FitReport& r);
json to_json(const LkaReport& r);
json to_json(const ExpansionReport& r);
json to_json(const SecondaryReport& r);
json to_json(const BayesianSecondaryResult& r);

WorldSpace space_from_json(const json& j);
TruthSet truthset_from_json(const json& j);
Partition partition_from_json(const json& j, const WorldSpace& space);
BeliefMeasure measure_from_json(const json& j);
FeatureSet features_from_json(const json& j);
SolverOptions solver_options_from_json(const json& j);

PollScenario poll_from_json(const json& j);
CoinCubeScenario coin_from_json(const json& j);
DecimalScenario decimal_from_json(const json& j);
TreeScenario tree_from_json(const json& j);
SpikeScenario spike_from_json(const json& j);

}  // namespace lka

#endif
