#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "copoly/certificate.hpp"
#include "copoly/coarsegrain.hpp"
#include "copoly/estimator.hpp"

namespace copoly {

inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const LawSpec& spec);
LawSpec law_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const MCEstimate& e, const ModelParams& p);
nlohmann::json to_json(const FreeEnergyEstimate& e);
nlohmann::json to_json(const DecomposeReport& r, const ModelParams& p, std::uint64_t seed);
nlohmann::json to_json(const CertificateReport& r);
nlohmann::json to_json(const RhoSearchResult& r);
nlohmann::json to_json(const CriticalHResult& r);

/// A named table of numeric columns; missing values are written empty.
struct Curve {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
};

/// "# schema_version: 1", optional "# config: {...}" line, header, rows.
void write_csv(std::ostream& os, const Curve& curve, const nlohmann::json* config = nullptr);

Curve renewal_curve(const Vector& u);
Curve log_z_curve(const Vector& log_z);
Curve slope_curve(const std::vector<SlopeRow>& rows);
Curve doney_curve(const std::vector<Index>& js, const std::vector<double>& ratios);
Curve free_energy_curve(const std::vector<FreeEnergyEstimate>& estimates);
Curve excursion_curve(const std::vector<double>& qs, const std::vector<double>& values);

/// Writes each curve to dir/<name>.csv and returns the paths.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir,
                                                  const std::vector<Curve>& curves,
                                                  const nlohmann::json* config = nullptr);

}  // namespace copoly
