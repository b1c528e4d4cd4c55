#ifndef WAVE_REPORT_HPP
#define WAVE_REPORT_HPP

#include "wave/config.hpp"
#include "wave/functional.hpp"
#include "wave/minimize.hpp"
#include "wave/speed.hpp"
#include "wave/verify.hpp"

#include <json.hpp>

#include <string>

namespace wave {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

Json to_json(const Point<double>& p);
Json to_json(const PotentialConstants<double>& k);
Json to_json(const BoundsReport<double>& b);
/// Everything except the profile, which goes to CSV.
Json to_json(const GammaResult<double>& r);
Json to_json(const SpeedResult<double>& r);
Json to_json(const Check& c);
Json to_json(const VerifyReport<double>& r);
/// Normalized echo of every setting, defaults included.
Json to_json(const RunConfig& cfg);

std::string sha256_hex(const std::string& data);

/// Adds `digest`: SHA-256 of the compact dump of schema_version, command,
/// config and results. `timings` and `tool_version` stay outside.
void seal_report(Json& report);

}  // namespace wave

#endif  // WAVE_REPORT_HPP
