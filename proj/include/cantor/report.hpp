#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cantor/pipeline.hpp"
#include "cantor/stats.hpp"

namespace cantor {

/// Header: checkpoint,kind,k,m,r,block,count,expected,ratio,err_bound
std::string rows_to_csv(const std::vector<ReportRow>& rows);
nlohmann::json rows_to_json(const std::vector<ReportRow>& rows);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Minified dump; nlohmann objects keep keys sorted, so equal inputs give equal bytes.
std::string dump_json(const nlohmann::json& j);

/// Schedule state files: parameters, Q spec and the resolved stages.
nlohmann::json state_to_json(const ScheduleState& state);
ScheduleState state_from_json(const nlohmann::json& j);

}  // namespace cantor
