#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "json.hpp"
#include "logcap/capacity.hpp"
#include "logcap/elliptic.hpp"
#include "logcap/geometry.hpp"
#include "logcap/hdp.hpp"
#include "logcap/hpath.hpp"
#include "logcap/wiener.hpp"

namespace logcap {

using json = nlohmann::json;

// Geometry files: {"a": number, "label": string, "primitives": [
//   {"kind": "radial_segment", "t_lo", "t_hi", "theta", "log_len"?},
//   {"kind": "arc", "t", "theta_lo", "theta_hi"},
//   {"kind": "disk", "center_t", "center_theta", "radius"},
//   {"kind": "annulus_band", "t_lo", "t_hi", "theta_lo", "theta_hi"}]}
// Angles in radians, t dimensionless. log_len preserves segment lengths
// whose value only exists as an exponent.
json geometry_to_json(const CompactSetSpec& spec, double a = 2.0);
CompactSetSpec geometry_from_json(const json& j);
double geometry_ratio(const json& j);  // the "a" field, default 2

// Coefficient fields: {"kind": "identity" | "diag" | "rotated_diag" |
// "checkerboard" | <registered name>, ...params}. register_field installs
// programmatic kinds.
CoefficientField field_from_json(const json& j);
void register_field(const std::string& kind,
                    std::function<CoefficientField(const json&)> factory);

// Boundary data: {"f_bar": number, "default": number,
//                 "per_primitive": [numbers...]} (piecewise constant).
BoundaryData boundary_from_json(const json& j, const CompactSetSpec& geometry);

json capacity_result_to_json(const CapacityResult& r);
json wiener_report_to_json(const WienerReport& r);
json measure_estimate_to_json(const MeasureEstimate& est,
                              const std::vector<LogPolarPoint>& probes);

std::string wiener_terms_csv(const WienerReport& r);
std::string integral_samples_csv(const std::vector<IntegralSample>& samples);
std::string hit_stats_csv(const HitStats& stats);
std::string law_rows_csv(const std::vector<LawRow>& rows);
// solution export columns: t, theta, u, v
std::string hdp_solution_csv(const HdpSolution& sol);
std::string path_dump_csv(const std::vector<PathSample>& paths);

// shortest round-trip double formatting shared by every emitter
std::string format_double(double x);

// write-to-temp-then-rename so partial files never appear
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace logcap
