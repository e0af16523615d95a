#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "fowler_lab/cylinder_pde.hpp"
#include "fowler_lab/decay_fit.hpp"
#include "fowler_lab/expansion.hpp"
#include "fowler_lab/floquet.hpp"
#include "fowler_lab/fowler.hpp"
#include "fowler_lab/index_set.hpp"
#include "fowler_lab/verify.hpp"

namespace fowler_lab::io {

using json = nlohmann::ordered_json;

/// %.17g
std::string number(double x);

json to_json(const FowlerParams& params);
/// Samples are included when requested; the summary always is.
json to_json(const FowlerOrbit& orbit, bool samples = false);
json to_json(const ExponentEntry& entry);
json to_json(const BoundEntry& entry);
json to_json(const IndexSet& set);
json to_json(const ExpansionTerm& term, int samples = 0);
json to_json(const DecayFit& fit);
json to_json(const DecayModels& models);
json to_json(const IterationRecord& record);
/// Trace, convergence summary and settings; no field values.
json to_json(const ContractionResult& result);
json to_json(const CriterionReport& report);

/// Columns t, xi, xi_prime over one period.
void write_orbit_csv(const FowlerOrbit& orbit, const std::string& path);
/// Columns t, c_0, ..., c_{modes-1}.
void write_field_csv(const CylinderField& field, const std::string& path);
void write_json(const json& value, const std::string& path);

}  // namespace fowler_lab::io
