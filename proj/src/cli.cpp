#include "copoly/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <list>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "copoly/io.hpp"
#include "copoly/parallel.hpp"

namespace copoly {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string law = "power";
  double alpha = 0.5;
  Index n_max = 0;  // 0: smallest size the command needs
  Index n = 0;
  double lambda = 0.5, h = 0.2, gamma = 1.0, rho = 0.0, xi = 0.0;
  Index replicas = 100;
  std::uint64_t seed = 0;
  Index k = 0, cap = kDefaultBlockCap;
  Index k_min = 100, k_budget = Index(1) << 16, scan_points = 6;
  double tol = 1e-3;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  Index max_refinements = 2;
  std::vector<double> lambdas, gammas, qs;
  std::vector<Index> ratio_ns;

  std::string format = "json", out, plot_dir;
  unsigned threads = 0;
};

struct Field {
  std::string name;
  std::function<json()> get;
  bool echo = true;
};

struct Command;
using Runner = std::function<int(Command&)>;

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  Settings s;
  std::vector<Field> fields;
  CLI::Option* seed_opt = nullptr;
  Runner run;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  template <typename T>
  CLI::Option* add(const std::string& key, T& var, const std::string& desc, bool echo = true) {
    auto* opt = app->add_option("--" + key, var, desc);
    if constexpr (requires { var.push_back(var.front()); }) opt->delimiter(',');
    else opt->capture_default_str();
    fields.push_back({key,
                      [&var]() -> json {
                        if constexpr (std::is_floating_point_v<T>)
                          return std::isfinite(var) ? json(var) : json(nullptr);
                        else return json(var);
                      },
                      echo});
    return opt;
  }

  bool has_field(const std::string& key) const {
    return std::any_of(fields.begin(), fields.end(), [&](const Field& f) { return f.name == key; });
  }

  json echo() const {
    json cfg = {{"command", name}};
    for (const auto& f : fields)
      if (f.echo) cfg[f.name] = f.get();
    return cfg;
  }
};

void add_law(Command& c, const std::string& default_law) {
  c.s.law = default_law;
  c.add("law", c.s.law, "inter-arrival law: power or srw")
      ->check(CLI::IsMember({"power", "srw"}));
  c.add("alpha", c.s.alpha, "tail exponent of the power law (srw: 0.5)");
  c.add("n-max", c.s.n_max, "largest tabulated gap (0: as needed)");
}

void add_output(Command& c, std::initializer_list<const char*> formats = {"json", "csv"}) {
  c.add("format", c.s.format, "output format")->check(CLI::IsMember(std::vector<std::string>(formats.begin(), formats.end())));
  c.add("out", c.s.out, "output file (default: stdout or $" + std::string(kOutDirEnv) + ")", false);
  c.add("plot-dir", c.s.plot_dir, "directory for plot CSV files", false);
  c.add("threads", c.s.threads, "worker thread cap (0: hardware)", false);
}

void add_seed(Command& c) {
  c.seed_opt = c.add("seed", c.s.seed, "master seed (generated and printed when absent)");
}

void add_params(Command& c, bool required) {
  auto* l = c.add("lambda", c.s.lambda, "coupling lambda");
  auto* h = c.add("h", c.s.h, "asymmetry h");
  if (required) {
    l->required();
    h->required();
  }
}

InterArrivalLaw resolve_law(Command& c, Index needed) {
  auto& s = c.s;
  const LawKind kind = law_kind_from_string(s.law);
  if (kind == LawKind::srw) {
    if (s.alpha != 0.5) throw std::invalid_argument("the srw law has alpha = 0.5");
    if (s.n_max == 0) s.n_max = std::max<Index>(4, needed + (needed % 2));
  } else if (s.n_max == 0) {
    s.n_max = std::max<Index>(2, needed);
  }
  return make_law({kind, s.alpha, s.n_max});
}

std::uint64_t resolve_seed(Command& c) {
  if (c.seed_opt->count() == 0) {
    std::random_device rd;
    c.s.seed = (std::uint64_t(rd()) << 32) ^ rd();
    *c.err << "generated seed: " << c.s.seed << '\n';
  }
  return c.s.seed;
}

ModelParams params_of(const Settings& s) { return ModelParams{s.lambda, s.h, s.gamma}; }

void emit(Command& c, json record, const Curve& table, const std::vector<Curve>& plots) {
  const json config = c.echo();
  std::string out = c.s.out;
  if (out.empty()) {
    if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) {
      fs::create_directories(dir);
      out = (fs::path(dir) / (c.name + "." + c.s.format)).string();
    }
  }
  std::ostringstream body;
  if (c.s.format == "csv") {
    write_csv(body, table, &config);
  } else {
    json full = {{"schema_version", kSchemaVersion}, {"command", c.name}, {"config", config}};
    full["result"] = std::move(record);
    body << full.dump(2) << '\n';
  }
  if (out.empty()) {
    *c.out << body.str();
  } else {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + out);
    os << body.str();
  }
  if (!c.s.plot_dir.empty()) emit_plot_data(c.s.plot_dir, plots, &config);
}

Curve single_row(const std::string& name, const std::vector<std::pair<std::string, double>>& cols) {
  Curve curve{name, {}, {{}}};
  for (const auto& [k, v] : cols) {
    curve.columns.push_back(k);
    curve.rows[0].push_back(std::isfinite(v) ? std::optional(v) : std::nullopt);
  }
  return curve;
}

std::vector<Index> powers_of_two_up_to(Index n) {
  std::vector<Index> js;
  for (Index j = 2; j <= n; j *= 2) js.push_back(j);
  return js;
}

int run_renewal(Command& c) {
  const auto& s = c.s;
  const auto law = resolve_law(c, s.n);
  const Vector u = renewal_mass(law, s.n);
  std::vector<Index> js = powers_of_two_up_to(s.n);
  std::vector<double> ratios;
  json doney = json::array();
  for (Index j : js) {
    ratios.push_back(doney_ratio(law, u, j));
    doney.push_back({{"j", j}, {"ratio", ratios.back()}});
  }
  json record = {{"law", to_json(law.spec())},
                 {"c_k", law.c_k()},
                 {"u", std::vector<double>(u.begin(), u.end())},
                 {"doney", doney}};
  if (s.xi > 0.0) record["pinned_sum"] = pinned_sum(law, s.xi, s.n);
  emit(c, record, renewal_curve(u), {renewal_curve(u), doney_curve(js, ratios)});
  return kExitOk;
}

int run_free_energy(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, s.n);
  const auto seed = resolve_seed(c);
  const auto params = params_of(s);
  const auto est = quenched_free_energy(law, params, s.n, s.replicas, seed);
  std::vector<FreeEnergyEstimate> curve;
  if (!s.plot_dir.empty()) {
    for (Index m = std::max<Index>(8, s.n / 8); m < s.n; m *= 2)
      if (law.reachable(m)) curve.push_back(quenched_free_energy(law, params, m, s.replicas, seed));
  }
  curve.push_back(est);
  json record = to_json(est);
  record["annealed"] = annealed_free_energy(s.lambda, s.h);
  emit(c, record, free_energy_curve({est}), {free_energy_curve(curve)});
  return kExitOk;
}

int run_annealed(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, s.n);
  const auto table = annealed_log_z(law, params_of(s), s.n);
  const double log_z = table.log_z(s.n);
  json record = {{"n", s.n},
                 {"log_z", log_z},
                 {"per_site", log_z / double(s.n)},
                 {"annealed_free_energy", annealed_free_energy(s.lambda, s.h)},
                 {"params", to_json(params_of(s))}};
  emit(c, record, log_z_curve(table.log_z), {log_z_curve(table.log_z)});
  return kExitOk;
}

int run_frac_moment(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, s.n);
  const auto seed = resolve_seed(c);
  const auto params = params_of(s);
  const auto est = fractional_moment(law, params, s.n, s.replicas, seed);
  emit(c, to_json(est, params),
       single_row("frac_moment", {{"gamma", s.gamma}, {"estimate", est.estimate}, {"stderr", est.std_error}}),
       {});
  return kExitOk;
}

int run_coarse_check(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, s.n);
  const auto seed = resolve_seed(c);
  const auto params = params_of(s);
  const auto report = decompose_check(law, sample(seed, s.n), params, s.n, s.k, s.cap);
  emit(c, to_json(report, params, seed),
       single_row("coarse_check", {{"N", double(report.n)},
                                   {"k", double(report.k)},
                                   {"direct_log", report.direct_log},
                                   {"sum_log", report.sum_log},
                                   {"rel_err", report.rel_err},
                                   {"n_configs", double(report.n_configs)}}),
       {});
  if (!(report.rel_err < 1e-9)) {
    *c.err << json{{"error", "computational"},
                   {"message", "decomposition identity violated"},
                   {"rel_err", report.rel_err}}.dump()
           << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

CertifyOptions certify_options(const Settings& s) { return {s.k_min, s.k_budget}; }

int run_certify(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, s.k_budget);
  const auto report = certify(s.alpha, s.gamma, s.rho, s.lambda, law, certify_options(s));
  emit(c, to_json(report),
       single_row("certificate", {{"k", double(report.k)},
                                  {"eps1", report.eps1},
                                  {"eps2", report.eps2},
                                  {"eps_achieved", report.eps_achieved},
                                  {"xi", report.xi},
                                  {"pass", report.pass ? 1.0 : 0.0}}),
       {});
  return kExitOk;
}

int run_optimize_rho(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, s.k_budget);
  RhoSearchOptions opts;
  opts.tol = s.tol;
  opts.certify = certify_options(s);
  opts.scan_points = s.scan_points;
  const auto result = optimize_rho(s.alpha, law, s.lambdas, s.gammas, opts);
  Curve table{"rho_search", {"gamma", "rho_star", "bracket_verified"}, {}};
  for (const auto& g : result.per_gamma)
    table.rows.push_back({g.gamma, g.rho_star, g.bracket_verified ? 1.0 : 0.0});
  emit(c, to_json(result), table, {table});
  return kExitOk;
}

CriticalHOptions critical_options(Command& c) {
  CriticalHOptions opts;
  opts.replicas = c.s.replicas;
  opts.seed = resolve_seed(c);
  if (std::isfinite(c.s.threshold)) opts.threshold = c.s.threshold;
  opts.tol = c.s.tol;
  opts.max_refinements = c.s.max_refinements;
  return opts;
}

Index max_size(const Settings& s) { return s.n << s.max_refinements; }

int run_critical_h(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, max_size(s));
  const auto opts = critical_options(c);
  const auto result = critical_h(law, s.lambda, s.n, opts);
  if (!std::isfinite(s.threshold)) s.threshold = result.threshold;
  const std::vector<SlopeRow> rows = {{s.lambda, result.h_hat, result.bracket_lo, result.bracket_hi}};
  emit(c, to_json(result), slope_curve(rows), {slope_curve(rows)});
  if (!result.h_hat) {
    *c.err << json{{"error", "computational"}, {"message", "indeterminate bisection"}}.dump() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int run_slope(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, max_size(s));
  const auto rows = slope_table(law, s.lambdas, s.n, critical_options(c));
  json record = json::array();
  bool complete = true;
  for (const auto& r : rows) {
    complete = complete && r.h_hat.has_value();
    record.push_back({{"lambda", r.lambda},
                      {"hc", r.h_hat ? json(*r.h_hat) : json(nullptr)},
                      {"hc_over_lambda", r.slope() ? json(*r.slope()) : json(nullptr)},
                      {"bracket_lo", r.bracket_lo},
                      {"bracket_hi", r.bracket_hi}});
  }
  emit(c, record, slope_curve(rows), {slope_curve(rows)});
  if (!complete) {
    *c.err << json{{"error", "computational"}, {"message", "indeterminate bisection"}}.dump() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int run_excursion(Command& c) {
  auto& s = c.s;
  const auto law = resolve_law(c, s.n);
  std::vector<double> values;
  json record = json::array();
  for (double q : s.qs) {
    values.push_back(excursion_expectation(law, q, s.n));
    json row = {{"q", q}, {"value", values.back()}, {"lower_bound", std::exp(-q / 2.0)}};
    if (law.kind() == LawKind::srw)
      row["srw_limit"] = q > 0.0 ? -std::expm1(-q) / q : 1.0;
    record.push_back(row);
  }
  const Curve curve = excursion_curve(s.qs, values);
  emit(c, record, curve, {curve});
  return kExitOk;
}

int run_appendix_checks(Command& c) {
  auto& s = c.s;
  Index largest = s.n;
  for (Index m : s.ratio_ns) largest = std::max(largest, m);
  const auto law = resolve_law(c, largest);

  const Vector neg = srw_negative_time_law(s.n);
  const double uniform = 1.0 / double(s.n / 2 + 1);
  const double deviation = (neg.array() - uniform).abs().maxCoeff();

  const Vector u = renewal_mass(law, largest);
  json ratios = json::array();
  Curve ratio_curve{"last_renewal_ratio", {"n", "max_ratio", "argmax_i"}, {}};
  for (Index m : s.ratio_ns) {
    if (m % 2 != 0) throw std::invalid_argument("ratio sizes must be even");
    double best = 0.0;
    Index arg = 0;
    for (Index i = 0; i <= m / 2; ++i) {
      if (u(i) <= 0.0) continue;
      const double r = last_renewal_ratio(law, u, m, i);
      if (r > best) best = r, arg = i;
    }
    ratios.push_back({{"n", m}, {"max_ratio", best}, {"argmax_i", arg}});
    ratio_curve.rows.push_back({double(m), best, double(arg)});
  }
  json record = {{"negative_time_law",
                  {{"n", s.n},
                   {"probabilities", std::vector<double>(neg.begin(), neg.end())},
                   {"uniform", uniform},
                   {"max_deviation", deviation}}},
                 {"last_renewal_ratio", ratios}};
  emit(c, record, ratio_curve, {ratio_curve});
  if (!(deviation <= 1e-10)) {
    *c.err << json{{"error", "computational"}, {"message", "negative-time law is not uniform"}}.dump()
           << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

void build(CLI::App& app, std::list<Command>& cmds) {
  const auto make = [&](const std::string& name, const std::string& desc, Runner run) -> Command& {
    auto& c = cmds.emplace_back();
    c.name = name;
    c.app = app.add_subcommand(name, desc);
    c.run = std::move(run);
    return c;
  };

  {
    auto& c = make("renewal", "renewal mass u(n) and its asymptotic ratio", run_renewal);
    add_law(c, "power");
    c.add("n", c.s.n, "largest n")->required();
    c.add("xi", c.s.xi, "also report the pinned sum at this weight (0: skip)");
    add_output(c);
  }
  {
    auto& c = make("free-energy", "replica estimate of the quenched free energy", run_free_energy);
    add_law(c, "power");
    add_params(c, true);
    c.add("n", c.s.n, "system size")->required();
    c.add("replicas", c.s.replicas, "disorder replicas");
    add_seed(c);
    add_output(c);
  }
  {
    auto& c = make("annealed", "annealed partition function", run_annealed);
    add_law(c, "power");
    add_params(c, true);
    c.add("n", c.s.n, "system size")->required();
    add_output(c);
  }
  {
    auto& c = make("frac-moment", "Monte-Carlo fractional moment E Z^gamma", run_frac_moment);
    add_law(c, "power");
    add_params(c, true);
    c.add("gamma", c.s.gamma, "moment exponent in (0, 1]")->required();
    c.add("n", c.s.n, "system size")->required();
    c.add("replicas", c.s.replicas, "disorder replicas");
    add_seed(c);
    add_output(c);
  }
  {
    auto& c = make("coarse-check", "block decomposition identity check", run_coarse_check);
    add_law(c, "srw");
    add_params(c, false);
    c.add("n", c.s.n, "system size")->required();
    c.add("k", c.s.k, "block length")->required();
    c.add("cap", c.s.cap, "largest number of blocks enumerated");
    add_seed(c);
    add_output(c);
  }
  {
    auto& c = make("certify", "evaluate the delocalization conditions", run_certify);
    add_law(c, "power");
    c.add("gamma", c.s.gamma, "fractional exponent")->required();
    c.add("rho", c.s.rho, "h / lambda")->required();
    c.add("lambda", c.s.lambda, "coupling")->required();
    c.add("k-min", c.s.k_min, "smallest acceptable block length");
    c.add("k-budget", c.s.k_budget, "largest block length evaluated exactly");
    add_output(c);
  }
  {
    auto& c = make("optimize-rho", "smallest certified rho over a grid", run_optimize_rho);
    add_law(c, "power");
    c.s.gammas = {0.70, 0.75, 0.80};
    c.s.lambdas = {0.05, 0.02, 0.01};
    c.add("gammas", c.s.gammas, "gamma grid");
    c.add("lambdas", c.s.lambdas, "lambda grid");
    c.add("tol", c.s.tol, "bisection tolerance on rho");
    c.add("scan-points", c.s.scan_points, "rho points logged when nothing passes");
    c.add("k-min", c.s.k_min, "smallest acceptable block length");
    c.add("k-budget", c.s.k_budget, "largest block length evaluated exactly");
    add_output(c);
  }
  const auto add_critical = [](Command& c) {
    add_law(c, "srw");
    c.s.replicas = 200;
    c.s.tol = 0.01;
    c.add("n", c.s.n, "working system size")->required();
    c.add("replicas", c.s.replicas, "disorder replicas");
    add_seed(c);
    c.add("threshold", c.s.threshold, "free-energy threshold (default: 10 stderr at h = lambda/2)");
    c.add("tol", c.s.tol, "bracket width in h");
    c.add("max-refinements", c.s.max_refinements, "size doublings at indeterminate points");
    add_output(c);
  };
  {
    auto& c = make("critical-h", "critical asymmetry at one lambda", run_critical_h);
    c.add("lambda", c.s.lambda, "coupling")->required();
    add_critical(c);
  }
  {
    auto& c = make("slope", "critical slope table over several lambda", run_slope);
    c.add("lambdas", c.s.lambdas, "coupling values")->required();
    add_critical(c);
  }
  {
    auto& c = make("excursion", "excursion expectation for several q", run_excursion);
    add_law(c, "srw");
    c.s.qs = {1.0, 2.0, 5.0, 10.0};
    c.add("n", c.s.n, "return time")->required();
    c.add("q", c.s.qs, "decay parameters");
    add_output(c);
  }
  {
    auto& c = make("appendix-checks", "negative-time law and last-renewal ratio sweeps",
                   run_appendix_checks);
    add_law(c, "srw");
    c.s.n = 64;
    c.s.ratio_ns = {64, 256, 1024, 4096};
    c.add("n", c.s.n, "size for the negative-time law (even, <= 512)");
    c.add("ratio-n", c.s.ratio_ns, "sizes for the last-renewal ratio sweep");
    add_output(c);
  }
}

std::string token_of(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string joined;
    for (const auto& e : v) joined += (joined.empty() ? "" : ",") + token_of(e);
    return joined;
  }
  return v.dump();
}

// Splices --config values in front of the explicit arguments.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::list<Command>& cmds) {
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return rest;

  std::ifstream is(*path);
  if (!is) throw UsageError("cannot read config " + *path);
  json cfg;
  try {
    cfg = json::parse(is);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config must be a JSON object");

  std::string name;
  if (!rest.empty() && rest.front().rfind("-", 0) != 0) {
    name = rest.front();
    rest.erase(rest.begin());
  }
  if (cfg.contains("command")) {
    if (!cfg["command"].is_string()) throw UsageError("config key 'command' must be a string");
    const auto from_cfg = cfg["command"].get<std::string>();
    if (!name.empty() && name != from_cfg)
      throw UsageError("command '" + name + "' does not match config command '" + from_cfg + "'");
    name = from_cfg;
  }
  const auto it = std::find_if(cmds.begin(), cmds.end(), [&](const Command& c) { return c.name == name; });
  if (it == cmds.end()) throw UsageError("unknown or missing command '" + name + "'");

  std::set<std::string> explicit_keys;
  for (const auto& a : rest)
    if (a.rfind("--", 0) == 0) explicit_keys.insert(a.substr(2, a.find('=') - 2));

  std::vector<std::string> expanded = {name};
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") continue;
    if (!it->has_field(key)) throw UsageError("unknown config key '" + key + "' for " + name);
    if (value.is_null() || explicit_keys.count(key)) continue;
    if (value.is_object()) throw UsageError("config key '" + key + "' must be a scalar or list");
    expanded.push_back("--" + key);
    expanded.push_back(token_of(value));
  }
  expanded.insert(expanded.end(), rest.begin(), rest.end());
  return expanded;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Renewal copolymer model: partition functions, coarse graining and certificates",
               "copolymer"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of option values (keys are long option names)");
  std::list<Command> cmds;
  build(app, cmds);

  std::vector<std::string> argv;
  try {
    argv = expand_config(args, cmds);
  } catch (const UsageError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  }
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  }

  Command* chosen = nullptr;
  for (auto& c : cmds)
    if (c.app->parsed()) chosen = &c;
  if (!chosen) {
    report_error(err, "usage", "no command given");
    return kExitUsage;
  }
  chosen->out = &out;
  chosen->err = &err;
  set_thread_limit(chosen->s.threads);
  try {
    return chosen->run(*chosen);
  } catch (const std::invalid_argument& e) {
    report_error(err, "invalid_argument", e.what());
    return kExitUsage;
  } catch (const ResourceLimit& e) {
    report_error(err, "resource_limit", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    report_error(err, "computational", e.what());
    return kExitFailure;
  }
}

}  // namespace copoly
