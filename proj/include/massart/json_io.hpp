#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <json.hpp>

#include "massart/hard_pair.hpp"
#include "massart/instance.hpp"
#include "massart/lift.hpp"
#include "massart/moments.hpp"
#include "massart/planner.hpp"
#include "massart/sq_lab.hpp"

namespace massart::io {

using nlohmann::json;

/// %.17g; non-finite values become the strings "inf", "-inf", "nan" in JSON.
std::string format17(double x);

/// Serializes with every floating value at 17 significant digits.
std::string dump17(const json& j, int indent = 2);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

json to_json(const HardPairConfig& c);
json to_json(const MomentReport& r);
json to_json(const ChiSquare& c);
json to_json(const AsymptoticPlan& p);
json to_json(const ConsistencyReport& r);
json to_json(const ExperimentReport& r);
json to_json(const HalfspaceWeights& w);

/// Header x_1,...,x_m,y.
void write_dataset_csv(std::ostream& out, const LabeledBatch& batch);

/// Columns x,density_A,density_B,in_J1,in_J2 on a uniform grid of `points` over [lo, hi].
void write_density_csv(std::ostream& out, const HardPair& pair, double lo, double hi,
                       std::size_t points);

}  // namespace massart::io
