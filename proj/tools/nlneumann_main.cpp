#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nln/cli_io.hpp"
#include "nln/errors.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nln::config_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal Neumann fractional p-Laplacian toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_dir;

  const std::pair<const char*, const char*> commands[] = {
      {"verify", "quadrature identity checks (divergence theorem, integration by parts)"},
      {"eigen", "first and second eigenpairs with certification"},
      {"heat", "implicit nonlocal heat flow with mass/energy trace"},
      {"poisson", "coercive source problem (unique minimizer)"},
      {"mountainpass", "constant-sign solutions of the superlinear problem"}};
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory override");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    const std::string text = config_path.empty() ? "" : read_file(config_path);
    nln::RunManifest man = nln::run_command(cmd, text, out_dir);
    if (!man.error.empty()) std::cerr << "solver failure: " << man.error << "\n";
    for (const nln::InvariantRecord& rec : man.invariants)
      std::cout << (rec.pass ? "[PASS] " : "[FAIL] ") << rec.name << " = "
                << rec.value << " (" << rec.relation << " " << rec.threshold
                << ")\n";
    return nln::exit_code(man);
  } catch (const nln::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nln::solver_error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
