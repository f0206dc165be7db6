#include "copoly/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

namespace copoly {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const LawSpec& spec) {
  return {{"kind", to_string(spec.kind)}, {"alpha", spec.alpha}, {"n_max", spec.n_max}};
}

LawSpec law_spec_from_json(const json& j) {
  for (const auto& [key, _] : j.items())
    if (key != "kind" && key != "alpha" && key != "n_max")
      throw std::invalid_argument("law spec: unknown key '" + key + "'");
  LawSpec spec;
  spec.kind = law_kind_from_string(j.at("kind").get<std::string>());
  spec.alpha = spec.kind == LawKind::srw ? 0.5 : j.at("alpha").get<double>();
  spec.n_max = j.at("n_max").get<Index>();
  return spec;
}

json to_json(const ModelParams& p) { return {{"lambda", p.lambda}, {"h", p.h}, {"gamma", p.gamma}}; }

json to_json(const MCEstimate& e, const ModelParams& p) {
  return {{"estimate", number_or_null(e.estimate)},
          {"stderr", number_or_null(e.std_error)},
          {"replicas", e.replicas},
          {"seed", e.seed},
          {"params", to_json(p)}};
}

json to_json(const FreeEnergyEstimate& e) {
  return {{"value", number_or_null(e.value)}, {"stderr", number_or_null(e.std_error)},
          {"n", e.n},                          {"replicas", e.replicas},
          {"seed", e.seed},                    {"params", to_json(e.params)}};
}

json to_json(const DecomposeReport& r, const ModelParams& p, std::uint64_t seed) {
  return {{"N", r.n},
          {"k", r.k},
          {"lambda", p.lambda},
          {"h", p.h},
          {"seed", seed},
          {"direct_log", number_or_null(r.direct_log)},
          {"sum_log", number_or_null(r.sum_log)},
          {"rel_err", number_or_null(r.rel_err)},
          {"n_configs", r.n_configs}};
}

json to_json(const CertificateReport& r) {
  const auto& s = r.structural;
  const auto num = [&](double v) { return r.evaluated ? number_or_null(v) : json(nullptr); };
  return {{"alpha", r.alpha},
          {"gamma", r.gamma},
          {"rho", r.rho},
          {"lambda", r.lambda},
          {"k", r.k},
          {"tilt_rate", num(r.tilt_rate)},
          {"structural",
           {{"gamma_range", s.gamma_range},
            {"rho_range", s.rho_range},
            {"lambda_positive", s.lambda_positive},
            {"sqrt_condition", s.sqrt_condition},
            {"tilt_rate_nonpositive", s.tilt_rate_nonpositive},
            {"k_large", s.k_large}}},
          {"decided_by", r.decided_by},
          {"lhs1", num(r.lhs1)},
          {"y_value", num(r.y_value)},
          {"eps1", num(r.eps1)},
          {"lhs2", num(r.lhs2)},
          {"eps2", num(r.eps2)},
          {"eps_achieved", num(r.eps_achieved)},
          {"xi", num(r.xi)},
          {"pass", r.pass},
          {"caveat", r.caveat}};
}

json to_json(const RhoSearchResult& r) {
  json per_gamma = json::array();
  for (const auto& g : r.per_gamma) {
    json per_lambda = json::array();
    for (const auto& v : g.rho_per_lambda) per_lambda.push_back(optional_number(v));
    per_gamma.push_back({{"gamma", g.gamma},
                         {"rho_star", optional_number(g.rho_star)},
                         {"rho_per_lambda", per_lambda},
                         {"bracket_verified", g.bracket_verified},
                         {"lambda_trend_violation", g.lambda_trend_violation},
                         {"note", g.note}});
  }
  json trace = json::array();
  for (const auto& e : r.trace)
    trace.push_back({{"gamma", e.gamma},
                     {"lambda", e.lambda},
                     {"rho", e.rho},
                     {"k", e.k},
                     {"eps_achieved", number_or_null(e.eps_achieved)},
                     {"xi", number_or_null(e.xi)},
                     {"pass", e.pass},
                     {"decided_by", e.decided_by},
                     {"phase", e.phase}});
  return {{"alpha", r.alpha},
          {"lambda_grid", r.lambda_grid},
          {"gamma_grid", r.gamma_grid},
          {"per_gamma", per_gamma},
          {"rho_alpha", optional_number(r.rho_alpha)},
          {"status", r.rho_alpha ? "found" : "no certificate at this grid"},
          {"sanity_floor_ok", r.sanity_floor_ok},
          {"trace", trace},
          {"caveat", r.caveat}};
}

json to_json(const CriticalHResult& r) {
  json trace = json::array();
  for (const auto& s : r.trace)
    trace.push_back({{"h", s.h},
                     {"n", s.n},
                     {"estimate", s.estimate},
                     {"stderr", s.std_error},
                     {"verdict", to_string(s.verdict)}});
  return {{"lambda", r.lambda},
          {"h_hat", optional_number(r.h_hat)},
          {"hc_over_lambda",
           r.h_hat && r.lambda > 0.0 ? json(*r.h_hat / r.lambda) : json(nullptr)},
          {"bracket", {r.bracket_lo, r.bracket_hi}},
          {"threshold", r.threshold},
          {"n", r.n},
          {"status", r.h_hat ? "converged" : "indeterminate"},
          {"trace", trace}};
}

void write_csv(std::ostream& os, const Curve& curve, const json* config) {
  os << "# schema_version: " << kSchemaVersion << '\n';
  if (config) os << "# config: " << config->dump() << '\n';
  for (std::size_t c = 0; c < curve.columns.size(); ++c) os << (c ? "," : "") << curve.columns[c];
  os << '\n' << std::setprecision(17);
  for (const auto& row : curve.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      if (row[c]) os << *row[c];
    }
    os << '\n';
  }
}

Curve renewal_curve(const Vector& u) {
  Curve c{"renewal", {"n", "u_n"}, {}};
  for (Index n = 0; n < u.size(); ++n) c.rows.push_back({double(n), u(n)});
  return c;
}

Curve log_z_curve(const Vector& log_z) {
  Curve c{"log_z", {"n", "log_z"}, {}};
  for (Index n = 0; n < log_z.size(); ++n)
    c.rows.push_back({double(n), std::isfinite(log_z(n)) ? std::optional(log_z(n)) : std::nullopt});
  return c;
}

Curve slope_curve(const std::vector<SlopeRow>& rows) {
  Curve c{"slope", {"lambda", "hc", "hc_over_lambda", "bracket_lo", "bracket_hi"}, {}};
  for (const auto& r : rows) c.rows.push_back({r.lambda, r.h_hat, r.slope(), r.bracket_lo, r.bracket_hi});
  return c;
}

Curve doney_curve(const std::vector<Index>& js, const std::vector<double>& ratios) {
  Curve c{"doney", {"j", "ratio"}, {}};
  for (std::size_t i = 0; i < js.size(); ++i) c.rows.push_back({double(js[i]), ratios[i]});
  return c;
}

Curve free_energy_curve(const std::vector<FreeEnergyEstimate>& estimates) {
  Curve c{"free_energy", {"n", "f", "stderr"}, {}};
  for (const auto& e : estimates) c.rows.push_back({double(e.n), e.value, e.std_error});
  return c;
}

Curve excursion_curve(const std::vector<double>& qs, const std::vector<double>& values) {
  Curve c{"excursion", {"q", "value"}, {}};
  for (std::size_t i = 0; i < qs.size(); ++i) c.rows.push_back({qs[i], values[i]});
  return c;
}

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir,
                                                  const std::vector<Curve>& curves,
                                                  const json* config) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& curve : curves) {
    const auto path = dir / (curve.name + ".csv");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_csv(os, curve, config);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace copoly
