#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vg/dynamics.hpp"
#include "vg/experiments.hpp"
#include "vg/kernel.hpp"
#include "vg/rigidity.hpp"
#include "vg/steady.hpp"

namespace vg {

using Json = nlohmann::ordered_json;

/// Finite values as numbers, non-finite ones as the strings "inf", "-inf", "nan".
Json json_number(double x);

Json to_json(const ModelParams& params);
Json to_json(const CasimirCheck& check);
Json to_json(const FunctionalReport& report);
Json to_json(const GroundState& state);
Json to_json(const IdentityResiduals& residuals);
Json to_json(const SupportReport& report);
Json to_json(const KjEstimate& estimate);
Json to_json(const ThresholdVerdict& verdict);
Json to_json(const ScalingReport& report);
Json to_json(const MonotonicityReport& report);
Json to_json(const FRoots& roots);
Json to_json(const EquimeasureReport& report);
Json to_json(const LevelAsymptotic& fit);
Json to_json(const BootstrapResult& result);
Json to_json(const ConservationReport& report);
Json to_json(const StabilityRun& run);
Json to_json(const StabilityReport& report);
Json to_json(const BlowupReport& report);

/// Pretty-printed with a trailing newline.
void write_json(const Json& doc, const std::filesystem::path& path);

/// Numbers printed with %.17g.
void write_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                 const std::filesystem::path& path);

/// Columns t,hc,m1,ekin,epot,virial,rho_center,dist_rho (empty when absent).
void write_diagnostics(const std::vector<DiagnosticsRecord>& records, const std::filesystem::path& path);

std::string format17(double x);

}  // namespace vg
