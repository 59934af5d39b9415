// Command-line driver: scenario configs in, JSON/CSV reports out.

#include <CLI11.hpp>
#include <json.hpp>

#include "lhyp/curve_solver.hpp"
#include "lhyp/flow.hpp"
#include "lhyp/identities.hpp"
#include "lhyp/stability.hpp"
#include "lhyp/variation.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lhyp;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, const std::string& where,
                  const std::vector<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

int thread_count() {
  if (const char* env = std::getenv("LHYP_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

PolylineCurve parse_curve(const json& spec, const std::string& where);

Hypersurface parse_hypersurface(const json& spec, const std::string& where) {
  if (!spec.is_object() || !spec.contains("type"))
    throw ConfigError(where + ": hypersurface spec needs a 'type'");
  const std::string type = spec.at("type").get<std::string>();
  if (type == "sphere") {
    require_keys(spec, where, {"type", "n", "r"});
    return make_sphere(spec.at("n").get<int>(), spec.at("r").get<Real>());
  }
  if (type == "cylinder") {
    require_keys(spec, where, {"type", "n", "k", "r"});
    return make_cylinder(spec.at("n").get<int>(), spec.at("k").get<int>(),
                         spec.at("r").get<Real>());
  }
  if (type == "curve_product") {
    require_keys(spec, where, {"type", "curve", "flat_dims", "residual_gate"});
    return product_with_line(parse_curve(spec.at("curve"), where + ".curve"),
                             spec.at("flat_dims").get<int>(),
                             get_or<Real>(spec, "residual_gate", 1e-3));
  }
  return make_polyline(parse_curve(spec, where));
}

PolylineCurve parse_curve(const json& spec, const std::string& where) {
  const std::string type = spec.at("type").get<std::string>();
  if (type == "curve_file") {
    require_keys(spec, where, {"type", "path"});
    return read_curve_csv(spec.at("path").get<std::string>());
  }
  if (type == "circle") {
    require_keys(spec, where, {"type", "r", "vertices", "lambda"});
    PolylineCurve c =
        make_circle_polyline(spec.at("r").get<Real>(), get_or<int>(spec, "vertices", 512));
    if (spec.contains("lambda")) c.lambda_tag = spec.at("lambda").get<Real>();
    return c;
  }
  if (type == "ellipse") {
    require_keys(spec, where, {"type", "a", "b", "vertices"});
    return make_ellipse_polyline(spec.at("a").get<Real>(), spec.at("b").get<Real>(),
                                 get_or<int>(spec, "vertices", 512));
  }
  if (type == "perturbed_circle") {
    require_keys(spec, where, {"type", "r", "vertices", "amplitude"});
    const Real r = get_or<Real>(spec, "r", 1.0);
    const int m = get_or<int>(spec, "vertices", 256);
    const Real amp = get_or<Real>(spec, "amplitude", 0.05);
    PolylineCurve c = make_circle_polyline(r, m);
    for (int i = 0; i < m; ++i) {
      const Real t = 2 * std::numbers::pi * i / m;
      Eigen::Vector2d u(std::cos(t), std::sin(t));
      const Real f = amp * (-u.x());  // <e1, N>, N = -u
      c.vertices.row(i) = ((r - f) * u).transpose();
    }
    return c;
  }
  throw ConfigError(where + ": unknown curve type '" + type + "'");
}

struct Scenario {
  json config;
  std::string config_hash;
  fs::path out_dir;
  int resolution = 32;
  Real tol = -1;  // negative = per-check defaults
};

Scenario load_scenario(const std::string& command, const std::string& config_path,
                       const std::string& out_override, int resolution_override,
                       Real tol_override) {
  Scenario sc;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("cannot open config: " + config_path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(text)));
    sc.config_hash = buf;
    try {
      sc.config = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!sc.config.is_object()) throw ConfigError("config root must be an object");
    if (sc.config.contains("command") &&
        sc.config.at("command").get<std::string>() != command)
      throw ConfigError("config command does not match the subcommand");
  } else {
    sc.config = json::object();
    sc.config_hash = "0000000000000000";
  }
  sc.out_dir = out_override.empty() ? fs::path(get_or<std::string>(sc.config, "out", "."))
                                    : fs::path(out_override);
  fs::create_directories(sc.out_dir);
  sc.resolution = resolution_override > 0 ? resolution_override
                                          : get_or<int>(sc.config, "resolution", 32);
  sc.tol = tol_override > 0 ? tol_override : get_or<Real>(sc.config, "tol", -1.0);
  return sc;
}

json report_header(const std::string& command, const Scenario& sc) {
  json rep;
  rep["version"] = kVersion;
  rep["command"] = command;
  rep["config_hash"] = sc.config_hash;
  return rep;
}

int write_report(const json& rep, const fs::path& path, bool pass) {
  std::ofstream f(path);
  f << rep.dump(2) << "\n";
  std::cout << (pass ? "PASS " : "FAIL ") << path.string() << "\n";
  return pass ? 0 : 1;
}

json to_json(const IdentityReport& r) {
  json j;
  j["id"] = r.id;
  j["surface"] = r.surface;
  j["residual_abs"] = r.residual_abs;
  j["residual_rel"] = r.residual_rel;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  if (r.skipped) j["skipped"] = true;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

int cmd_verify(const Scenario& sc) {
  require_keys(sc.config, "config", {"command", "hypersurface", "resolution", "tol", "out"});
  const Hypersurface M = parse_hypersurface(sc.config.at("hypersurface"), "hypersurface");
  const QuadratureGrid grid = build_grid(M, sc.resolution);

  json rep = report_header("verify", sc);
  json checks = json::array();
  bool pass = true;
  auto push = [&](const IdentityReport& r) {
    checks.push_back(to_json(r));
    pass = pass && r.pass;
  };

  if (M.lambda_exact()) {
    IdentityReport gate;
    gate.id = "lambda_residual";
    gate.surface = M.describe();
    gate.residual_abs = lambda_residual(M, grid, *M.lambda_exact()).sup_norm;
    gate.residual_rel = gate.residual_abs;
    gate.tolerance = sc.tol > 0 ? sc.tol : (M.as<Sphere>() || M.as<Cylinder>() ? 1e-10 : 1e-4);
    gate.pass = gate.residual_abs <= gate.tolerance;
    push(gate);
  }
  for (const auto& r : check_pointwise(M, grid, sc.tol)) push(r);
  for (const auto& r : check_integral(M, grid)) push(r);

  const auto diag = classification_diagnostics(M, grid);
  json d;
  d["min_h_minus_lambda"] = diag.min_h_minus_lambda;
  d["min_lambda_f3_term"] = diag.min_lambda_f3_term;
  d["h_constant"] = diag.h_constant;
  d["lambda_residual_sup"] = diag.lambda_residual_sup;
  if (diag.matched_cylinder) {
    d["matched_k"] = diag.matched_cylinder->first;
    d["matched_r"] = diag.matched_cylinder->second;
  }
  rep["classification"] = d;
  rep["checks"] = checks;
  rep["pass"] = pass;
  return write_report(rep, sc.out_dir / "verify_report.json", pass);
}

int cmd_flow(const Scenario& sc) {
  require_keys(sc.config, "config",
               {"command", "curve", "dt", "duration", "sample_every", "out", "resolution", "tol",
                "check_self_intersection"});
  const PolylineCurve initial = parse_curve(sc.config.at("curve"), "curve");
  FlowOptions opts;
  opts.dt = sc.config.at("dt").get<Real>();
  opts.duration = sc.config.at("duration").get<Real>();
  opts.sample_every = get_or<int>(sc.config, "sample_every", 10);
  opts.check_self_intersection = get_or<bool>(sc.config, "check_self_intersection", true);
  const FlowHistory hist = flow_run(initial, opts);

  std::ofstream lines(sc.out_dir / "flow_history.jsonl");
  for (const auto& obs : hist.samples) {
    json j;
    j["t"] = obs.t;
    j["V"] = obs.weighted_volume;
    j["alpha"] = obs.alpha;
    j["min_seg"] = obs.min_segment;
    j["max_displacement"] = obs.max_displacement;
    lines << j.dump() << "\n";
  }
  write_curve_csv((sc.out_dir / "flow_final.csv").string(), hist.final_curve);

  const Real v0 = hist.samples.front().weighted_volume;
  Real defect = 0;
  for (const auto& obs : hist.samples)
    defect = std::max(defect, std::abs(obs.weighted_volume - v0));
  json rep = report_header("flow", sc);
  rep["initial_volume"] = v0;
  rep["conservation_defect"] = defect;
  rep["relative_defect"] = defect / std::abs(v0);
  rep["self_intersection"] = hist.self_intersection_flag;
  const Real tol = sc.tol > 0 ? sc.tol : 1e-4;
  const bool pass = defect / std::abs(v0) <= tol && !hist.self_intersection_flag;
  rep["pass"] = pass;
  return write_report(rep, sc.out_dir / "flow_report.json", pass);
}

int cmd_spectrum(const Scenario& sc) {
  require_keys(sc.config, "config", {"command", "n", "r", "k_max", "out"});
  const int n = sc.config.at("n").get<int>();
  const Real r = sc.config.at("r").get<Real>();
  const int k_max = get_or<int>(sc.config, "k_max", 8);
  std::ofstream csv(sc.out_dir / "spectrum.csv");
  csv.precision(17);
  csv << "k,mu,multiplicity\n";
  for (const auto& e : sphere_spectrum(n, r, k_max))
    csv << e.k << "," << e.eigenvalue << "," << e.multiplicity << "\n";
  json rep = report_header("spectrum", sc);
  rep["pass"] = true;
  return write_report(rep, sc.out_dir / "spectrum_report.json", true);
}

struct SweepRange {
  int n = 2;
  Real begin = 0.5, end = 2.5, step = 0.01;
};

SweepRange parse_sweep_flag(const std::string& text) {
  // "n=2 r=1.0:2.0:0.05"
  SweepRange out;
  std::istringstream ss(text);
  std::string tok;
  bool saw_n = false, saw_r = false;
  while (ss >> tok) {
    if (tok.rfind("n=", 0) == 0) {
      out.n = std::stoi(tok.substr(2));
      saw_n = true;
    } else if (tok.rfind("r=", 0) == 0) {
      const std::string range = tok.substr(2);
      const auto c1 = range.find(':'), c2 = range.rfind(':');
      if (c1 == std::string::npos || c2 == c1)
        throw ConfigError("--sweep r must look like r=start:end:step");
      out.begin = std::stod(range.substr(0, c1));
      out.end = std::stod(range.substr(c1 + 1, c2 - c1 - 1));
      out.step = std::stod(range.substr(c2 + 1));
      saw_r = true;
    } else {
      throw ConfigError("unrecognized --sweep token: " + tok);
    }
  }
  if (!saw_n || !saw_r) throw ConfigError("--sweep needs both n= and r=");
  return out;
}

int cmd_stability(const Scenario& sc, const std::string& sweep_flag) {
  require_keys(sc.config, "config",
               {"command", "n", "r_begin", "r_end", "r_step", "resolution", "out", "tol"});
  SweepRange range;
  if (!sweep_flag.empty()) {
    range = parse_sweep_flag(sweep_flag);
  } else {
    range.n = sc.config.at("n").get<int>();
    range.begin = sc.config.at("r_begin").get<Real>();
    range.end = sc.config.at("r_end").get<Real>();
    range.step = get_or<Real>(sc.config, "r_step", 0.01);
  }
  const auto rows =
      stability_sweep(range.n, range.begin, range.end, range.step, thread_count(), sc.resolution);

  std::ofstream csv(sc.out_dir / "stability_sweep.csv");
  csv.precision(17);
  csv << "n,r,lambda,f_stable,weak_stable,witness_value\n";
  bool witnesses_ok = true;
  for (const auto& row : rows) {
    csv << row.n << "," << row.r << "," << row.lambda << ","
        << (row.f_stable == Verdict::Stable ? "stable" : "unstable") << ","
        << (row.weak_stable == Verdict::Stable ? "stable" : "unstable") << ",";
    if (row.f_witness)
      csv << row.f_witness->form_value;
    else if (row.weak_witness)
      csv << row.weak_witness->form_value;
    csv << "\n";
    if (row.f_witness && !(row.f_witness->form_value < 0)) witnesses_ok = false;
    if (row.weak_witness && !(row.weak_witness->form_value < 0)) witnesses_ok = false;
  }
  json rep = report_header("stability", sc);
  rep["rows"] = rows.size();
  rep["witnesses_negative"] = witnesses_ok;
  rep["pass"] = witnesses_ok;
  return write_report(rep, sc.out_dir / "stability_report.json", witnesses_ok);
}

int cmd_curve(const Scenario& sc) {
  require_keys(sc.config, "config",
               {"command", "lambda", "bracket", "vertices", "tolerance", "out"});
  const Real lambda = sc.config.at("lambda").get<Real>();
  const auto bracket = sc.config.at("bracket").get<std::vector<Real>>();
  if (bracket.size() != 2) throw ConfigError("bracket must be [lo, hi]");
  ShootOptions opts;
  opts.output_vertices = get_or<int>(sc.config, "vertices", 8192);
  opts.tolerance = get_or<Real>(sc.config, "tolerance", 1e-12);
  const ShootResult res = shoot_closed(lambda, bracket[0], bracket[1], opts);

  json rep = report_header("curve", sc);
  rep["found"] = res.found;
  if (res.found) {
    write_curve_csv((sc.out_dir / "curve.csv").string(), res.curve);
    rep["rho0"] = res.rho0;
    rep["closure_gap"] = res.closure_gap;
    rep["tangent_gap"] = res.tangent_gap;
    rep["embedded"] = res.embedded;
    rep["total_turning"] = res.total_turning;
    const auto M = make_polyline(res.curve);
    rep["lambda_residual_sup"] = lambda_residual(M, build_grid(M, 8), lambda).sup_norm;
  }
  rep["pass"] = res.found;
  return write_report(rep, sc.out_dir / "curve_report.json", res.found);
}

int cmd_growth(const Scenario& sc) {
  require_keys(sc.config, "config", {"command", "hypersurface", "radii", "out", "tol"});
  const Hypersurface M = parse_hypersurface(sc.config.at("hypersurface"), "hypersurface");
  const auto radii_vec = sc.config.at("radii").get<std::vector<Real>>();
  Vector radii = Eigen::Map<const Vector>(radii_vec.data(), Eigen::Index(radii_vec.size()));
  const GrowthFit fit = area_growth_slope(M, radii);
  const Real exponent = growth_exponent_bound(M);

  json rep = report_header("growth", sc);
  rep["slope"] = fit.slope;
  rep["intercept"] = fit.intercept;
  rep["max_residual"] = fit.max_residual;
  rep["exponent_bound"] = exponent;
  json areas = json::array();
  for (Eigen::Index i = 0; i < radii.size(); ++i) {
    json row;
    row["R"] = radii(i);
    row["area"] = ball_intersection_area(M, radii(i));
    areas.push_back(row);
  }
  rep["areas"] = areas;
  const Real tol = sc.tol > 0 ? sc.tol : 0.05;
  const bool pass = !M.compact() ? (std::abs(fit.slope - exponent) <= tol && fit.slope >= 1 - tol)
                                 : std::abs(fit.slope) <= tol;
  rep["pass"] = pass;
  return write_report(rep, sc.out_dir / "growth_report.json", pass);
}

int cmd_variation(const Scenario& sc) {
  require_keys(sc.config, "config",
               {"command", "hypersurface", "eps", "resolution", "out", "tol"});
  const Hypersurface M = parse_hypersurface(sc.config.at("hypersurface"), "hypersurface");
  const Real eps = get_or<Real>(sc.config, "eps", 1e-3);
  const QuadratureGrid grid = build_grid(M, sc.resolution);
  const Real lambda = M.lambda_exact() ? *M.lambda_exact() : mean_lambda(M, grid);

  FunctionalContext ctx;
  ctx.lambda = lambda;
  const int amb = M.ambient_dimension();
  Vector z = Vector::Zero(amb);
  z(amb - 1) = 0.6;
  z(0) = -0.3;

  std::vector<std::pair<std::string, VariationSpec>> battery;
  {
    VariationSpec s;
    s.f = VariationField::constant(1.0);
    battery.emplace_back("constant", s);
    s.f = VariationField::linear(z);
    battery.emplace_back("first_harmonic", s);
    s.f = VariationField::linear(z).add_constant(0.5);
    s.y = z;
    s.h = 0.3;
    battery.emplace_back("mixed", s);
  }

  json rows = json::array();
  bool pass = true;
  for (const auto& [name, spec] : battery) {
    for (const auto& [fname, tag] :
         std::vector<std::pair<std::string, Functional>>{{"area", Functional::Area},
                                                         {"volume", Functional::Volume},
                                                         {"F", Functional::F}}) {
      VariationSpec use = spec;
      if (tag != Functional::F) {
        use.y = Vector();
        use.h = 0;
      }
      Real analytic = 0;
      switch (tag) {
        case Functional::Area:
          analytic = analytic_first_variation_area(M, grid, use);
          break;
        case Functional::Volume:
          analytic = analytic_first_variation_volume(M, grid, use);
          break;
        default:
          analytic = analytic_first_variation_f(M, grid, use, lambda);
      }
      const Real full = numeric_variation(M, ctx, use, tag, eps, 1, sc.resolution);
      const Real half = numeric_variation(M, ctx, use, tag, eps / 2, 1, sc.resolution);
      const Real e_full = std::abs(full - analytic);
      const Real e_half = std::abs(half - analytic);
      json row;
      row["field"] = name;
      row["functional"] = fname;
      row["analytic"] = analytic;
      row["numeric"] = full;
      row["error"] = e_full;
      row["error_half"] = e_half;
      const Real scale = std::max(Real(1), std::abs(analytic));
      const bool ok = e_half <= std::max(e_full / 3, 1e-12 * scale);
      row["pass"] = ok;
      pass = pass && ok;
      rows.push_back(row);
    }
  }
  json rep = report_header("variation", sc);
  rep["rows"] = rows;
  rep["pass"] = pass;
  return write_report(rep, sc.out_dir / "variation_report.json", pass);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for lambda-hypersurfaces of the weighted "
               "volume-preserving mean curvature flow"};
  app.require_subcommand(1);

  std::string config_path, out_dir, sweep_flag;
  int resolution = -1;
  Real tol = -1;
  app.add_option("--config", config_path, "scenario config file (JSON)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--resolution", resolution, "quadrature resolution override");
  app.add_option("--tol", tol, "tolerance override");

  auto* verify = app.add_subcommand("verify", "identity suite on a hypersurface");
  auto* flow = app.add_subcommand("flow", "run the weighted volume-preserving flow");
  auto* spectrum = app.add_subcommand("spectrum", "Laplacian spectrum on a sphere");
  auto* stability = app.add_subcommand("stability", "stability sweep over sphere radii");
  stability->add_option("--sweep", sweep_flag, "inline sweep, e.g. \"n=2 r=1.0:2.0:0.05\"");
  auto* curve = app.add_subcommand("curve", "closed lambda-curve shooting");
  auto* growth = app.add_subcommand("growth", "area growth measurements");
  auto* variation = app.add_subcommand("variation", "finite-difference variation checks");
  for (auto* sub : {verify, flow, spectrum, stability, curve, growth, variation})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    const Scenario sc = load_scenario(name, config_path, out_dir, resolution, tol);
    if (verify->parsed()) return cmd_verify(sc);
    if (flow->parsed()) return cmd_flow(sc);
    if (spectrum->parsed()) return cmd_spectrum(sc);
    if (stability->parsed()) return cmd_stability(sc, sweep_flag);
    if (curve->parsed()) return cmd_curve(sc);
    if (growth->parsed()) return cmd_growth(sc);
    if (variation->parsed()) return cmd_variation(sc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
