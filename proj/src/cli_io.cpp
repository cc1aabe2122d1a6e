#include "nln/cli_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nln/eigenpairs.hpp"
#include "nln/errors.hpp"
#include "nln/evolution.hpp"
#include "nln/forms.hpp"
#include "nln/mesh.hpp"
#include "nln/pointops.hpp"
#include "nln/quadrature.hpp"
#include "nln/solvers.hpp"
#include "nln/stationary.hpp"

namespace nln {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json echo_config(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["p"] = c.params.p;
  j["s"] = c.params.s;
  j["r"] = c.params.r;
  j["collar"] = c.params.collar;
  j["quad_order"] = c.params.quad_order;
  j["tol_solver"] = c.params.tol_solver;
  j["tol_quad"] = c.params.tol_quad;
  j["a"] = c.a;
  j["b"] = c.b;
  j["n_interior"] = c.n_interior;
  j["n_exterior"] = c.n_exterior;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["max_iter"] = c.max_iter;
  j["tau"] = c.tau;
  j["n_steps"] = c.n_steps;
  j["u0"] = c.u0;
  j["snapshots"] = c.snapshots;
  j["source"] = c.source;
  j["source_value"] = c.source_value;
  j["sign"] = c.sign;
  j["n_seeds"] = c.n_seeds;
  return j;
}

void add_inv(RunManifest& man, const std::string& name, double value,
             double threshold, const std::string& relation) {
  InvariantRecord rec;
  rec.name = name;
  rec.value = value;
  rec.threshold = threshold;
  rec.relation = relation;
  if (relation == "<=")
    rec.pass = value <= threshold;
  else if (relation == ">=")
    rec.pass = value >= threshold;
  else
    rec.pass = value > threshold;
  man.invariants.push_back(std::move(rec));
}

void write_rows(const std::filesystem::path& dir, const std::string& name,
                const std::string& header,
                const std::vector<std::vector<double>>& rows,
                RunManifest& man) {
  std::ofstream out(dir / name, std::ios::binary);
  out << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << fmt(row[i]);
    out << "\n";
  }
  man.files.push_back(name);
}

void write_solution(const std::filesystem::path& dir, const std::string& name,
                    const DiscreteFunction& u, RunManifest& man) {
  std::vector<std::vector<double>> rows;
  const Mesh& mesh = *u.mesh;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    rows.push_back({mesh.nodes[static_cast<std::size_t>(i)],
                    u.values[static_cast<std::size_t>(i)]});
  write_rows(dir, name, "x,u", rows, man);
}

DescentConfig descent_config(const RunConfig& cfg) {
  DescentConfig d;
  d.grad_tol = cfg.params.tol_solver;
  d.max_iter = cfg.max_iter;
  return d;
}

const char* sign_name(SignClass s) {
  switch (s) {
    case SignClass::Positive: return "positive";
    case SignClass::Negative: return "negative";
    case SignClass::Mixed: return "mixed";
    default: return "constant";
  }
}

DiscreteFunction profile_u0(const Mesh& mesh, const std::string& name) {
  const double m = 0.5 * (mesh.a + mesh.b);
  const double half = 0.5 * (mesh.b - mesh.a);
  if (name == "hat")
    return interpolate(mesh, [&](double x) {
      return std::max(0.0, 1.0 - std::fabs(x - m) / half);
    });
  if (name == "constant")
    return interpolate(mesh, [](double) { return 1.0; });
  if (name == "gauss")
    return interpolate(mesh, [&](double x) {
      const double z = (x - m) / (0.5 * half);
      return std::exp(-z * z);
    });
  return interpolate(mesh, [](double x) { return x; });  // linear
}

void run_verify(const RunConfig& cfg, const std::filesystem::path& dir,
                RunManifest& man) {
  const Params& prm = cfg.params;
  Mesh mesh = build_mesh(cfg.a, cfg.b, cfg.n_interior, prm.collar, cfg.n_exterior);
  auto u = [](double x) { return std::exp(-x * x); };

  IdentityReport div = check_divergence_theorem(u, mesh, prm);
  QuadTable table = build_quad_table(mesh, prm);
  DiscreteFunction ud = interpolate(mesh, u);
  DiscreteFunction vd =
      interpolate(mesh, [](double x) { return std::sin(3.0 * x) + 0.25 * x; });
  IdentityReport ibp = check_integration_by_parts(ud, vd, table, prm);

  std::ofstream out(dir / "verify.csv", std::ios::binary);
  out << "check,quad_order,residual\n";
  out << "divergence," << prm.quad_order << "," << fmt(div.residual) << "\n";
  out << "integration_by_parts," << prm.quad_order << "," << fmt(ibp.residual)
      << "\n";
  out.close();
  man.files.push_back("verify.csv");

  add_inv(man, "divergence_residual", div.residual, 1e-3, "<=");
  add_inv(man, "integration_by_parts_residual", ibp.residual, 1e-3, "<=");
  man.notes.emplace_back("collar_flagged", table.collar_flagged ? "true" : "false");
}

void run_eigen(const RunConfig& cfg, const std::filesystem::path& dir,
               RunManifest& man) {
  const Params& prm = cfg.params;
  Mesh mesh = build_mesh(cfg.a, cfg.b, cfg.n_interior, prm.collar, cfg.n_exterior);
  QuadTable table = build_quad_table(mesh, prm);
  DescentConfig dcfg = descent_config(cfg);

  EigenPair e1 = first_eigenpair(table);

  DiscreteFunction seed(mesh);
  if (cfg.seed == 0) {
    const double m = 0.5 * (cfg.a + cfg.b);
    seed = interpolate(mesh, [&](double x) { return x - m; });
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& v : seed.values) v = d(rng);
  }
  EigenPair e2 = next_eigenpair(table, seed, dcfg);

  std::vector<std::vector<double>> rows;
  for (const EigenPair* e : {&e1, &e2})
    rows.push_back({rows.empty() ? 1.0 : 2.0, e->lambda, e->residual,
                    e->certified ? 1.0 : 0.0, e->sign_change ? 1.0 : 0.0,
                    e->linf_interior, e->linf_exterior});
  write_rows(dir, "eigen.csv",
             "index,lambda,residual,certified,sign_change,linf_interior,linf_exterior",
             rows, man);
  write_solution(dir, "eigen_u1.csv", e1.u, man);
  write_solution(dir, "eigen_u2.csv", e2.u, man);

  add_inv(man, "lambda1_residual", e1.residual, 1e-12, "<=");
  add_inv(man, "pair2_residual", e2.residual, 1e-6, "<=");
  if (e2.lambda > 1e-8)
    add_inv(man, "pair2_sign_span",
            std::min(-e2.u.min_interior(), e2.u.max_interior()), 1e-8, ">");
  add_inv(man, "linf_gap", e2.linf_exterior - e2.linf_interior, 1e-10, "<=");
  if (prm.p == 2.0) {
    DenseEigenSolution oracle = dense_p2_eigen(table, 2);
    const double ref = oracle.lambdas.at(1);
    add_inv(man, "lambda2_oracle_rel_error",
            std::fabs(e2.lambda - ref) / std::max(ref, 1e-300), 1e-6, "<=");
  }
  man.notes.emplace_back("lambda1", fmt(e1.lambda));
  man.notes.emplace_back("lambda2", fmt(e2.lambda));
}

void run_heat(const RunConfig& cfg, const std::filesystem::path& dir,
              RunManifest& man) {
  const Params& prm = cfg.params;
  Mesh mesh = build_mesh(cfg.a, cfg.b, cfg.n_interior, prm.collar, cfg.n_exterior);
  QuadTable table = build_quad_table(mesh, prm);
  DescentConfig dcfg = descent_config(cfg);

  DiscreteFunction u0 = profile_u0(mesh, cfg.u0);
  EvolutionTrace trace =
      heat_solve(u0, cfg.tau, cfg.n_steps, table, dcfg, cfg.snapshots);

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < trace.times.size(); ++k)
    rows.push_back({trace.times[k], trace.mass[k], trace.energy[k]});
  write_rows(dir, "heat.csv", "t,mass,energy", rows, man);
  write_solution(dir, "solution.csv", trace.final, man);
  for (std::size_t i = 0; i < trace.snapshots.size(); ++i)
    write_solution(dir, "heat_snapshot_" + std::to_string(i) + ".csv",
                   trace.snapshots[i], man);

  double drift = 0.0;
  for (double m : trace.mass) drift = std::max(drift, std::fabs(m - trace.mass[0]));
  double rise = 0.0;
  for (std::size_t k = 1; k < trace.energy.size(); ++k)
    rise = std::max(rise, trace.energy[k] - trace.energy[k - 1]);
  add_inv(man, "mass_drift", drift,
          10.0 * dcfg.grad_tol * std::sqrt(cfg.b - cfg.a), "<=");
  add_inv(man, "energy_rise", std::max(rise, 0.0), 1e-12 * trace.energy[0], "<=");
}

void run_poisson(const RunConfig& cfg, const std::filesystem::path& dir,
                 RunManifest& man) {
  const Params& prm = cfg.params;
  Mesh mesh = build_mesh(cfg.a, cfg.b, cfg.n_interior, prm.collar, cfg.n_exterior);
  QuadTable table = build_quad_table(mesh, prm);
  DescentConfig dcfg = descent_config(cfg);

  const double m = 0.5 * (cfg.a + cfg.b);
  const double v = cfg.source_value;
  std::function<double(double)> f;
  if (cfg.source == "constant")
    f = [v](double) { return v; };
  else if (cfg.source == "linear")
    f = [v, m](double x) { return v * (x - m); };
  else if (cfg.source == "gauss")
    f = [v](double x) { return v * std::exp(-x * x); };
  else
    f = [](double) { return 0.0; };

  Compatibility compat = check_compatibility(f, mesh, prm);
  const char* cname = compat == Compatibility::Incompatible ? "incompatible"
                      : compat == Compatibility::CompatibleConstants
                          ? "compatible_constants"
                          : "compatible";
  man.notes.emplace_back("pure_neumann_compatibility", cname);

  DiscreteFunction u0(mesh);
  if (cfg.seed != 0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& w : u0.values) w = d(rng);
  }
  SolveReport rep = solve_poisson(f, table, u0, dcfg);
  write_solution(dir, "solution.csv", rep.u, man);

  add_inv(man, "grad_residual", rep.grad_residual, 50.0 * prm.tol_solver, "<=");
  add_inv(man, "converged", rep.certified ? 1.0 : 0.0, 1.0, ">=");
  man.notes.emplace_back("sign", sign_name(rep.sign));
  man.notes.emplace_back("objective", fmt(rep.objective));
}

void run_mountainpass(const RunConfig& cfg, const std::filesystem::path& dir,
                      RunManifest& man) {
  const Params& prm = cfg.params;
  Mesh mesh = build_mesh(cfg.a, cfg.b, cfg.n_interior, prm.collar, cfg.n_exterior);
  QuadTable table = build_quad_table(mesh, prm);
  DescentConfig dcfg = descent_config(cfg);
  const bool minus = cfg.sign == "minus";

  NonlinearitySpec spec = model_nonlinearity(prm.r);
  std::vector<double> positions;
  const int stride = std::max(1, cfg.n_interior / 8);
  for (int e = 0; e < cfg.n_interior; e += stride) {
    const double h = (cfg.b - cfg.a) / cfg.n_interior;
    positions.push_back(cfg.a + (e + 0.5) * h);
  }
  std::vector<double> values = {0.0};
  for (double t : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0}) {
    values.push_back(t);
    values.push_back(-t);
  }
  HypothesisReport hyp = check_growth_hypotheses(spec, prm, positions, values);
  add_inv(man, "growth_hypotheses", hyp.all() ? 1.0 : 0.0, 1.0, ">=");

  std::vector<DiscreteFunction> seeds;
  DiscreteFunction c0(mesh);
  for (double& w : c0.values) w = minus ? -0.9 : 0.9;
  seeds.push_back(c0);
  std::mt19937_64 rng(cfg.seed + 1);
  std::uniform_real_distribution<double> d(0.1, 1.1);
  for (int k = 1; k < cfg.n_seeds; ++k) {
    DiscreteFunction sk(mesh);
    for (double& w : sk.values) w = minus ? -d(rng) : d(rng);
    seeds.push_back(std::move(sk));
  }

  SolveReport rep = mountain_pass_solve(
      minus ? SolveSign::Minus : SolveSign::Plus, spec, table, seeds, dcfg);
  write_solution(dir, "solution.csv", rep.u, man);

  add_inv(man, "grad_residual", rep.grad_residual, 1e-6, "<=");
  const double lo = std::min(rep.min_interior, rep.min_exterior);
  const double hi = std::max(rep.max_interior, rep.max_exterior);
  add_inv(man, "wrong_sign_part", minus ? std::max(hi, 0.0) : std::max(-lo, 0.0),
          1e-8, "<=");
  add_inv(man, "exterior_strict_sign",
          minus ? -rep.max_exterior : rep.min_exterior, 0.0, ">");
  add_inv(man, "mountain_level", rep.objective, 0.0, ">");
  man.notes.emplace_back("sign", sign_name(rep.sign));
  man.notes.emplace_back("nehari_scale", fmt(rep.nehari_scale));
}

std::string compiler_string() {
#if defined(__VERSION__)
  return __VERSION__;
#else
  return "unknown";
#endif
}

void write_manifest(const std::filesystem::path& dir, RunManifest& man) {
  man.files.push_back("manifest.json");
  json j;
  j["config"] = json::parse(man.config_echo);
  j["versions"] = {{"artifact", "1.0.0"}, {"compiler", compiler_string()}};
  j["wall_time_seconds"] = man.wall_seconds;
  j["threads"] = man.threads;
  j["error"] = man.error;
  j["invariants"] = json::array();
  for (const InvariantRecord& rec : man.invariants)
    j["invariants"].push_back({{"name", rec.name},
                               {"value", rec.value},
                               {"threshold", rec.threshold},
                               {"relation", rec.relation},
                               {"pass", rec.pass}});
  j["notes"] = json::object();
  for (const auto& [k, v] : man.notes) j["notes"][k] = v;
  j["files"] = man.files;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << j.dump(2) << "\n";
}

double jnum(const json& j, const std::string& key) {
  if (!j.at(key).is_number())
    throw config_error("config key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

int jint(const json& j, const std::string& key) {
  if (!j.at(key).is_number_integer())
    throw config_error("config key '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

std::string jstr(const json& j, const std::string& key) {
  if (!j.at(key).is_string())
    throw config_error("config key '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

bool RunManifest::all_pass() const {
  if (!error.empty()) return false;
  for (const InvariantRecord& rec : invariants)
    if (!rec.pass) return false;
  return true;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw config_error("config: top level must be a JSON object");

  static const std::set<std::string> known = {
      "command",    "p",          "s",         "r",           "collar",
      "quad_order", "tol_solver", "tol_quad",  "a",           "b",
      "n_interior", "n_exterior", "output_dir", "seed",       "threads",
      "max_iter",   "tau",        "n_steps",   "u0",          "snapshots",
      "source",     "source_value", "sign",    "n_seeds"};
  for (const auto& [key, val] : j.items())
    if (!known.count(key))
      throw config_error("config: unknown key '" + key + "'");

  RunConfig c;
  if (!j.contains("command"))
    throw config_error("config: missing required key 'command'");
  c.command = jstr(j, "command");
  static const std::set<std::string> commands = {"verify", "eigen", "heat",
                                                 "poisson", "mountainpass"};
  if (!commands.count(c.command))
    throw config_error(
        "config: command must be one of verify|eigen|heat|poisson|mountainpass");

  if (j.contains("p")) c.params.p = jnum(j, "p");
  if (j.contains("s")) c.params.s = jnum(j, "s");
  if (j.contains("r")) c.params.r = jnum(j, "r");
  if (j.contains("collar")) c.params.collar = jnum(j, "collar");
  if (j.contains("quad_order")) c.params.quad_order = jint(j, "quad_order");
  if (j.contains("tol_solver")) c.params.tol_solver = jnum(j, "tol_solver");
  if (j.contains("tol_quad")) c.params.tol_quad = jnum(j, "tol_quad");
  c.params.validate();
  // Superlinearity of the model reaction term only constrains mountainpass.
  if (c.command == "mountainpass" && !(c.params.r > c.params.p))
    throw config_error("params: r must satisfy r > p");

  if (j.contains("a")) c.a = jnum(j, "a");
  if (j.contains("b")) c.b = jnum(j, "b");
  if (!(c.b > c.a)) throw config_error("config: require b > a");
  if (j.contains("n_interior")) c.n_interior = jint(j, "n_interior");
  if (c.n_interior < 2) throw config_error("config: n_interior must be >= 2");
  if (j.contains("n_exterior")) c.n_exterior = jint(j, "n_exterior");
  if (c.n_exterior < 1) throw config_error("config: n_exterior must be >= 1");
  if (j.contains("output_dir")) c.output_dir = jstr(j, "output_dir");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || jnum(j, "seed") < 0)
      throw config_error("config key 'seed' must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("threads")) c.threads = jint(j, "threads");
  if (c.threads < 1) throw config_error("config: threads must be >= 1");
  if (j.contains("max_iter")) c.max_iter = jint(j, "max_iter");
  if (c.max_iter < 1) throw config_error("config: max_iter must be >= 1");

  if (j.contains("tau")) c.tau = jnum(j, "tau");
  if (!(c.tau > 0.0)) throw config_error("config: tau must be positive");
  if (j.contains("n_steps")) c.n_steps = jint(j, "n_steps");
  if (c.n_steps < 0) throw config_error("config: n_steps must be >= 0");
  if (j.contains("u0")) c.u0 = jstr(j, "u0");
  if (c.u0 != "hat" && c.u0 != "constant" && c.u0 != "gauss" && c.u0 != "linear")
    throw config_error("config: u0 must be one of hat|constant|gauss|linear");
  if (j.contains("snapshots")) {
    if (!j.at("snapshots").is_array())
      throw config_error("config key 'snapshots' must be an array of numbers");
    for (const auto& t : j.at("snapshots")) {
      if (!t.is_number())
        throw config_error("config key 'snapshots' must be an array of numbers");
      c.snapshots.push_back(t.get<double>());
    }
  }

  if (j.contains("source")) c.source = jstr(j, "source");
  if (c.source != "constant" && c.source != "linear" && c.source != "gauss" &&
      c.source != "zero")
    throw config_error("config: source must be one of constant|linear|gauss|zero");
  if (j.contains("source_value")) c.source_value = jnum(j, "source_value");

  if (j.contains("sign")) c.sign = jstr(j, "sign");
  if (c.sign != "plus" && c.sign != "minus")
    throw config_error("config: sign must be plus or minus");
  if (j.contains("n_seeds")) c.n_seeds = jint(j, "n_seeds");
  if (c.n_seeds < 1) throw config_error("config: n_seeds must be >= 1");
  return c;
}

RunManifest run(const RunConfig& config) {
  RunConfig cfg = config;
  if (cfg.command.empty())
    throw config_error("config: missing required key 'command'");
  if (const char* env = std::getenv("NLNEUMANN_THREADS")) {
    char* end = nullptr;
    const long t = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || t < 1)
      throw config_error("NLNEUMANN_THREADS must be a positive integer");
    cfg.threads = static_cast<int>(t);
  }
  set_eval_threads(cfg.threads);

  const auto t0 = std::chrono::steady_clock::now();
  RunManifest man;
  man.threads = cfg.threads;
  man.config_echo = echo_config(cfg).dump(2);

  const std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw config_error("config: cannot create output_dir '" + cfg.output_dir +
                       "'");

  try {
    if (cfg.command == "verify")
      run_verify(cfg, dir, man);
    else if (cfg.command == "eigen")
      run_eigen(cfg, dir, man);
    else if (cfg.command == "heat")
      run_heat(cfg, dir, man);
    else if (cfg.command == "poisson")
      run_poisson(cfg, dir, man);
    else if (cfg.command == "mountainpass")
      run_mountainpass(cfg, dir, man);
    else
      throw config_error("config: unknown command '" + cfg.command + "'");
  } catch (const solver_error& e) {
    man.error = e.what();
  } catch (const domain_error& e) {
    man.error = e.what();
  }

  man.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(dir, man);
  return man;
}

RunManifest run_command(const std::string& command,
                        const std::string& config_text,
                        const std::string& out_override) {
  json j;
  if (config_text.find_first_not_of(" \t\r\n") == std::string::npos) {
    j = json::object();
  } else {
    try {
      j = json::parse(config_text);
    } catch (const json::parse_error& e) {
      throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
  }
  if (!j.is_object())
    throw config_error("config: top level must be a JSON object");
  if (j.contains("command")) {
    if (!j["command"].is_string() || j["command"].get<std::string>() != command)
      throw config_error("config: 'command' key conflicts with subcommand '" +
                         command + "'");
  } else {
    j["command"] = command;
  }
  RunConfig cfg = parse_config(j.dump());
  if (!out_override.empty()) cfg.output_dir = out_override;
  return run(cfg);
}

int exit_code(const RunManifest& manifest) {
  return manifest.all_pass() ? 0 : 1;
}

}  // namespace nln
