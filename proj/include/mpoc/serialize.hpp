#pragma once

// JSON views of the result types, plus a deterministic dumper: keys keep
// insertion order, doubles print with 17 significant digits, non-finite
// values become null.  Identical inputs therefore produce byte-identical
// records on every platform.

#include "mpoc/landscape.hpp"
#include "mpoc/nondegeneracy.hpp"
#include "mpoc/scholtes.hpp"
#include "mpoc/scno.hpp"
#include "mpoc/stationarity.hpp"

#include <json.hpp>

#include <string>

namespace mpoc {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const ActivePattern& pattern);
Json to_json(const LicqReport& licq);
Json to_json(const MultiplierSet& multipliers);
Json to_json(const StationarityCertificate& certificate);
Json to_json(const NondegeneracyReport& report);
Json to_json(const ClassificationResult& result);
Json to_json(const InnerKktPoint& point);
Json to_json(const RegularizationTrace& trace);  // without the per-t iterates
Json to_json(const RelaxIndexSets& sets);
Json to_json(const RelaxationMultipliers& multipliers);
Json to_json(const RelaxationCertificate& certificate);
Json to_json(const DegeneracyAudit& audit);
Json to_json(const LevelSweepReport& report);

// One line, no trailing newline.
std::string dump_fixed(const Json& record);

}  // namespace mpoc
