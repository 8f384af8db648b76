#pragma once

#include <filesystem>
#include <string>

#include "cbi/analysis.hpp"
#include "cbi/model.hpp"
#include "cbi/moments.hpp"
#include "cbi/simulate.hpp"
#include "cbi/spectral.hpp"

// Single-header nlohmann/json lives in vendor/ as json.hpp.
#include <json.hpp>

namespace cbi {

using Json = nlohmann::json;

Json measure_to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const Json& j, int dim);

Json params_to_json(const CbiParams& p);
CbiParams params_from_json(const Json& j);

Json initial_law_to_json(const InitialLaw& law);
InitialLaw initial_law_from_json(const Json& j, int d);

Json spectral_to_json(const SpectralSummary& s);
Json sigma_report_to_json(const SigmaReport& r);
Json test_report_to_json(const TestReport& r);

std::uint64_t params_hash(const CbiParams& p);

/// Writes via a temp file in the same directory plus rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace cbi
