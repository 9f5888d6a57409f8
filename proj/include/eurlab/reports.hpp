#pragma once

// JSON summaries and CSV tables for the scenario results.
//
// JSON keeps insertion order so output is byte-stable. Non-finite numbers
// are written as the strings "inf", "-inf" and "nan". CSV numbers use 17
// significant digits.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "eurlab/operators.hpp"
#include "eurlab/scenarios.hpp"

namespace eurlab::report {

using Json = nlohmann::ordered_json;

Json number(double v);

Json to_json(const BoundResult& r);
Json to_json(const PovmReport& r);
Json to_json(const ContourResult& r);  // summary only; the grid goes to CSV
Json to_json(const KeyRateResult& r);
Json to_json(const CvSaturationReport& r);
Json to_json(const AttackReport& r);
Json to_json(const FalsifierReport& r);
Json to_json(const EquivalenceReport& r);

// p_z_null,p_x_null,raw_bound,bound
void write_csv(std::ostream& out, const ContourResult& r);
// distance_km,transmission,p_t_null_bob,h_max_proxy,leak,raw_bound,bound,clamped,key_rate
void write_csv(std::ostream& out, const KeyRateResult& r);

// Two-space indentation, trailing newline.
std::string dump(const Json& j);

}  // namespace eurlab::report
