#include "isolab/cli.hpp"

#include "isolab/constants.hpp"
#include "isolab/flow.hpp"
#include "isolab/io.hpp"
#include "isolab/profiles.hpp"
#include "isolab/psibound.hpp"
#include "isolab/typical.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace isolab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names{
      {Command::measure_info, "measure-info"}, {Command::profile, "profile"},
      {Command::flow, "flow"},                 {Command::theta, "theta"},
      {Command::psi, "psi"},                   {Command::constants, "constants"},
      {Command::ldp, "ldp"},                   {Command::conjecture, "conjecture"},
  };
  return names;
}

const std::set<std::string>& allowed_params(Command c) {
  static const std::map<Command, std::set<std::string>> table{
      {Command::measure_info, {}},
      {Command::profile, {"a"}},
      {Command::flow, {"b", "var", "t-end", "dt"}},
      {Command::theta, {"alpha"}},
      {Command::psi, {"alpha", "tau"}},
      {Command::constants, {}},
      {Command::ldp, {"alpha", "n", "eps", "tau"}},
      {Command::conjecture, {"a"}},
  };
  return table.at(c);
}

std::string fixed(double x, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

// Output of one command before it is written out.
struct Outcome {
  std::string summary;
  std::vector<std::string> flags;
};

class Runner {
 public:
  Runner(const RunConfig& cfg, const ReferenceMeasure& m) : cfg_(cfg), m_(m) {}

  double param(const std::string& key, double fallback) const {
    const auto it = cfg_.params.find(key);
    return it == cfg_.params.end() ? fallback : it->second;
  }
  double required(const std::string& key) const {
    const auto it = cfg_.params.find(key);
    if (it == cfg_.params.end()) throw SpecError("missing --" + key + " for " + command_name(cfg_.command));
    return it->second;
  }
  double tol(double fallback) const { return cfg_.tol.value_or(fallback); }

  fs::path out_path(const std::string& ext) const {
    if (!cfg_.out_path.empty()) return cfg_.out_path;
    return command_name(cfg_.command) + ext;
  }
  fs::path sibling(const fs::path& main, const std::string& suffix) const {
    fs::path p = main;
    p.replace_extension();
    return p.string() + suffix;
  }

  void write_json(const fs::path& path, json doc) const {
    doc["schema"] = "v1";
    doc["seed"] = cfg_.seed;
    if (cfg_.timestamp) doc["generated"] = utc_timestamp();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write '" + path.string() + "'");
    out << doc.dump(2) << "\n";
  }

  json measure_json() const {
    return {{"family", m_.family().describe()},
            {"support", {m_.lo(), m_.hi()}},
            {"grid_nodes", m_.grid_size()}};
  }

  Outcome measure_info() const {
    const GridDensity base = GridDensity::uniform(m_);
    const CurvatureBound kcd = kcd_constant(m_);
    const LyapunovExponent lyap = lyapunov_exponent(m_, base.mean());
    json doc = measure_json();
    doc["mean"] = base.mean();
    doc["variance"] = base.variance();
    doc["k_cd"] = kcd.value;
    doc["lyapunov"] = lyap.value;
    doc["lyapunov_effectively_infinite"] = lyap.effectively_infinite;
    doc["log_concave"] = m_.is_log_concave();
    write_json(out_path(".json"), doc);
    Outcome o;
    o.summary = "measure-info: " + m_.family().describe() + " K_CD=" + fixed(kcd.value) +
                " support=[" + fixed(m_.lo()) + ", " + fixed(m_.hi()) + "]";
    if (!m_.is_log_concave()) o.flags.push_back("measure is not log-concave");
    return o;
  }

  Outcome profile() const {
    const ProfileCurve curve = ProfileCurve::bobkov(m_);
    const int points = 200;
    Vector a(points);
    for (int k = 0; k < points; ++k) a(k) = (k + 0.5) / points;
    const Vector value = curve.sample(a);
    CsvTable table{{"a", "I", "I_gaussian"}, {}};
    for (int k = 0; k < points; ++k) table.add_numbers({a(k), value(k), gaussian_profile(a(k))});
    write_csv(out_path(".csv"), table, cfg_.timestamp);

    const double t = tol(1e-9);
    bool concave = true, monotone = true;
    for (int k = 1; k + 1 < points; ++k)
      if (value(k - 1) - 2.0 * value(k) + value(k + 1) > t) concave = false;
    for (int k = 1; k < points; ++k)
      if (value(k) / a(k) > value(k - 1) / a(k - 1) + t) monotone = false;
    Outcome o;
    const double at = param("a", 0.5);
    o.summary = "profile: I(" + fixed(at) + ")=" + fixed(curve(at), 6) +
                " concave=" + (concave ? "yes" : "no") + " I/a monotone=" + (monotone ? "yes" : "no");
    if (!concave) o.flags.push_back("profile not concave on the sample grid");
    if (!monotone) o.flags.push_back("I(a)/a not monotone on the sample grid");
    return o;
  }

  Outcome flow() const {
    const double b = param("b", 1.0), var = param("var", 1.0);
    if (!(var > 0.0)) throw SpecError("--var must be positive");
    FlowOptions opts;
    opts.t_end = param("t-end", 1.0);
    opts.dt = param("dt", opts.dt);
    const GridDensity rho0 = GridDensity::from_log_values(m_, [&] {
      Vector lr(m_.grid_size());
      for (Eigen::Index i = 0; i < lr.size(); ++i) {
        const double x = m_.nodes()(i), z = (x - b) / std::sqrt(var);
        lr(i) = -0.5 * z * z + m_.potential(x);
      }
      return lr;
    }());
    const FlowTrace trace = evolve(m_, rho0, opts);
    CsvTable table{{"t", "D", "I", "W2", "mass"}, {}};
    for (const FlowRecord& r : trace.records)
      table.add_numbers({r.t, r.entropy, r.fisher, r.w2_from_start, r.mass});
    write_csv(out_path(".csv"), table, cfg_.timestamp);

    Outcome o;
    const double d0 = trace.records.front().entropy, d1 = trace.records.back().entropy;
    o.summary = "flow: D0=" + fixed(d0, 6) + " D(" + fixed(trace.records.back().t, 2) + ")=" + fixed(d1, 6);
    if (trace.records.size() >= 3) {
      const DissipationReport dis = check_dissipation(trace);
      o.summary += " dissipation violation=" + fixed(dis.max_violation, 6);
      if (dis.max_violation > tol(1e-2)) o.flags.push_back("dissipation violation above tolerance");
    }
    if (trace.aborted) o.flags.push_back("flow aborted: " + trace.abort_reason);
    if (trace.rho0_out_of_range) o.flags.push_back("rho0 outside [1e-6, 1e6]");
    return o;
  }

  Outcome theta() const {
    Outcome o;
    CsvTable table{{"alpha", "theta", "parametric", "dual_lower", "certificate"}, {}};
    if (cfg_.params.count("alpha")) {
      const ThetaPoint p = theta_at(m_, required("alpha"));
      table.add({format_number(p.alpha), format_number(p.value), format_number(p.parametric_value),
                 format_number(p.dual_lower), p.certificate.tag()});
      o.summary = "theta: Theta(" + fixed(p.alpha) + ")=" + fixed(p.value, 6);
      if (p.descent_failed) o.flags.push_back("grid descent failed");
    } else {
      const ThetaCurve curve = theta_curve(m_, default_alpha_grid());
      for (std::size_t k = 0; k < curve.alphas.size(); ++k)
        table.add({format_number(curve.alphas[k]), format_number(curve.theta_vals[k]), "",
                   format_number(curve.dual_lower[k]), curve.certificates[k].tag()});
      o.summary = "theta: " + std::to_string(curve.alphas.size()) + " points, envelope nodes " +
                  std::to_string(curve.envelope.size());
      if (curve.any_descent_failed) o.flags.push_back("grid descent failed at some alpha");
    }
    write_csv(out_path(".csv"), table, cfg_.timestamp);
    return o;
  }

  Outcome psi() const {
    const double alpha = required("alpha"), tau = required("tau");
    const ThetaCurve curve = theta_curve(m_, default_alpha_grid());
    const ThetaFunction env = theta_breve(curve);
    const PsiBoundSolution s = psi_upper_bound(env, alpha, tau);
    json doc = measure_json();
    doc["alpha"] = alpha;
    doc["tau"] = tau;
    doc["lambda"] = s.lambda;
    doc["alpha0"] = s.alpha0;
    doc["alpha1"] = s.alpha1;
    doc["s0"] = s.s0;
    doc["s1"] = s.s1;
    doc["bound"] = s.bound;
    doc["degenerate"] = s.degenerate;
    write_json(out_path(".json"), doc);
    Outcome o;
    o.summary = "psi: bound(" + fixed(alpha) + ", " + fixed(tau) + ")=" + fixed(s.bound, 6) +
                " lambda=" + fixed(s.lambda);
    if (curve.any_descent_failed) o.flags.push_back("grid descent failed at some alpha");
    return o;
  }

  Outcome constants() const {
    const ThetaCurve curve = theta_curve(m_, extended_alpha_grid());
    const ConstantsReport r = compute_constants(m_, curve);
    const ChainAudit audit = chain_audit(r, tol(0.02));
    json doc = measure_json();
    doc["k_cd"] = r.k_cd;
    doc["k_ls"] = {{"value", r.k_ls}, {"bracket", {r.k_ls_bracket.lower, r.k_ls_bracket.upper}}};
    doc["k_ls_plus"] = {{"value", r.k_ls_plus},
                        {"bracket", {r.k_ls_plus_bracket.lower, r.k_ls_plus_bracket.upper}},
                        {"extrapolated", r.k_ls_plus_extrapolated}};
    doc["k_t_upper"] = r.k_t_upper;
    doc["k_is1_plus"] = r.k_is1_plus;
    doc["lyapunov_finite"] = r.lyapunov_finite;
    doc["provenance"] = r.provenance;
    doc["flags"] = r.flags;
    doc["not_computed"] = r.not_computed;
    const fs::path main = out_path(".json");
    write_json(main, doc);

    CsvTable table{{"check", "lhs", "rhs", "margin", "pass", "applicable", "decisive"}, {}};
    int passed = 0;
    for (const AuditCheck& c : audit.checks) {
      table.add({c.name, format_number(c.lhs), format_number(c.rhs), format_number(c.margin),
                 c.pass ? "1" : "0", c.applicable ? "1" : "0", c.decisive ? "1" : "0"});
      passed += c.pass;
    }
    write_csv(sibling(main, ".audit.csv"), table, cfg_.timestamp);

    Outcome o;
    o.summary = "constants: audit " + std::to_string(passed) + "/" + std::to_string(audit.checks.size()) +
                " pass; K_CD=" + fixed(r.k_cd) + " K_LS=" + fixed(r.k_ls) + " K_LS+=" + fixed(r.k_ls_plus) +
                " K_T<=" + fixed(r.k_t_upper) + " K_IS1+=" + fixed(r.k_is1_plus);
    o.flags = r.flags;
    for (const AuditCheck& c : audit.checks)
      if (!c.pass) o.flags.push_back("audit failed: " + c.name + (c.decisive ? "" : " (not decisive)"));
    return o;
  }

  Outcome ldp() const {
    const double alpha = required("alpha");
    const ThetaCurve curve = theta_curve(m_, default_alpha_grid());
    CsvTable table{{"alpha", "theta", "envelope", "Lambda"}, {}};
    for (std::size_t k = 0; k < curve.alphas.size(); ++k) {
      const double e = curve.envelope_at(curve.alphas[k]);
      table.add_numbers({curve.alphas[k], curve.theta_vals[k], e, std::sqrt(e)});
    }
    const fs::path main = out_path(".csv");
    write_csv(main, table, cfg_.timestamp);

    Outcome o;
    const double lambda = ldp_value(theta_breve(curve), alpha);
    std::ostringstream head;
    head << "Lambda(" << format_number(alpha) << ")=" << fixed(lambda);
    o.summary = head.str();
    if (alpha > curve.alphas.back()) o.flags.push_back("alpha beyond the computed curve; envelope extrapolated");
    if (curve.any_descent_failed) o.flags.push_back("grid descent failed at some alpha");

    if (cfg_.params.count("n")) {
      // exact Gaussian half-space check at the same exponent
      const long n = static_cast<long>(required("n"));
      const double eps = param("eps", 0.0);
      const double c = std::sqrt(2.0 * alpha);
      const double b = 0.5 * (c + std::sqrt(c * c + 4.0 * eps));
      std::vector<double> taus{1e-2, 1e-3, 1e-4};
      if (cfg_.params.count("tau")) taus = {required("tau")};
      CsvTable hs{{"tau", "alpha_n", "alpha_enlarged_n", "ratio", "limit_prediction"}, {}};
      for (double tau : taus) {
        const HalfspaceLdp r = gaussian_halfspace_ldp(b, eps, n, tau);
        hs.add_numbers({tau, r.alpha_n, r.alpha_enlarged_n, r.ratio, r.limit_prediction});
      }
      write_csv(sibling(main, ".halfspace.csv"), hs, cfg_.timestamp);
      if (taus.size() >= 2)
        o.summary += " halfspace_extrapolated=" + fixed(extrapolate_halfspace_ratio(b, eps, n, taus));
    }
    return o;
  }

  Outcome conjecture() const {
    const double a = param("a", 0.01);
    const ProfileCurve curve = ProfileCurve::bobkov(m_);
    const ConjectureReport r = conjecture_check(curve, curve, a, tol(1e-3));
    json doc = measure_json();
    doc["a"] = a;
    doc["value"] = r.value;
    doc["lhs_sq"] = r.lhs_sq;
    doc["rhs_inf"] = r.rhs_inf;
    doc["a1"] = r.a1;
    doc["a2"] = r.a2;
    doc["holds"] = r.holds;
    doc["inconclusive"] = r.inconclusive;
    doc["stalled"] = r.stalled;
    doc["exact_reduction"] = r.exact_reduction;
    write_json(out_path(".json"), doc);
    Outcome o;
    o.summary = "conjecture: lhs_sq=" + fixed(r.lhs_sq, 6) + " rhs_inf=" + fixed(r.rhs_inf, 6) +
                (r.holds ? " holds" : " fails");
    if (r.inconclusive) o.flags.push_back("inconclusive at tolerance");
    if (r.stalled) o.flags.push_back("variational solve stalled");
    if (!r.exact_reduction) o.flags.push_back("asymmetric factor: variational value is a lower bound only");
    return o;
  }

  Outcome dispatch() const {
    switch (cfg_.command) {
      case Command::measure_info: return measure_info();
      case Command::profile: return profile();
      case Command::flow: return flow();
      case Command::theta: return theta();
      case Command::psi: return psi();
      case Command::constants: return constants();
      case Command::ldp: return ldp();
      case Command::conjecture: return conjecture();
    }
    throw ContractError("unknown command");
  }

 private:
  const RunConfig& cfg_;
  const ReferenceMeasure& m_;
};

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  for (const auto& [c, n] : command_names())
    if (n == name) return c;
  return std::nullopt;
}

std::string command_name(Command c) {
  for (const auto& [cmd, n] : command_names())
    if (cmd == c) return n;
  return "?";
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto& allowed = allowed_params(config.command);
    for (const auto& [key, _] : config.params)
      if (!allowed.count(key))
        throw SpecError("--" + key + " is not accepted by " + command_name(config.command));
    if (config.measure_spec_path.empty()) throw SpecError("missing --measure");
    MeasureSpec spec = load_measure_spec(config.measure_spec_path);
    if (config.grid_nodes) spec.options.grid_nodes = *config.grid_nodes;
    const ReferenceMeasure m = build_measure(spec);

    const Outcome o = Runner(config, m).dispatch();
    out << o.summary;
    if (!o.flags.empty()) {
      out << " [flags:";
      for (std::size_t i = 0; i < o.flags.size(); ++i) out << (i ? ";" : "") << " " << o.flags[i];
      out << "]";
    }
    out << "\n";
    return o.flags.empty() ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"iso_lab: isoperimetry and log-Sobolev numerics for 1-D log-concave measures"};
  RunConfig cfg;
  std::string command;
  app.add_option("command", command, "measure-info | profile | flow | theta | psi | constants | ldp | conjecture")
      ->required();
  app.add_option("--measure", cfg.measure_spec_path, "measure spec JSON");
  app.add_option("--out", cfg.out_path, "output file");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option_function<int>("--grid-nodes", [&](int n) { cfg.grid_nodes = n; }, "override grid size");
  app.add_option_function<double>("--tol", [&](double t) { cfg.tol = t; }, "command tolerance");
  bool no_timestamp = false;
  app.add_flag("--no-timestamp", no_timestamp, "omit the generated-at line in artifacts");
  const std::pair<const char*, const char*> per_command[] = {
      {"alpha", "entropy level (theta, psi, ldp)"},
      {"tau", "enlargement scale (psi, ldp)"},
      {"b", "start mean (flow)"},
      {"var", "start variance (flow)"},
      {"t-end", "flow horizon"},
      {"dt", "flow time step"},
      {"n", "sample size (ldp)"},
      {"eps", "typical-set tolerance (ldp)"},
      {"a", "set mass (profile, conjecture)"},
  };
  for (const auto& [key, help] : per_command) {
    const std::string name = key;
    app.add_option_function<double>("--" + name, [&cfg, name](double v) { cfg.params[name] = v; }, help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  const auto c = parse_command(command);
  if (!c) {
    std::cerr << "error: unknown command '" << command << "'\n";
    return 1;
  }
  cfg.command = *c;
  cfg.timestamp = !no_timestamp;
  return run(cfg, std::cout, std::cerr);
}

}  // namespace isolab
