// Command-line driver: single solves, convergence studies and the identity checks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fvem/fvem.hpp"

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void save_study(const fvem::StudyReport& rep, const fs::path& dir, bool plot, bool timing) {
  auto csv = open_out(dir / "study.csv");
  fvem::write_csv(rep, csv, timing);
  if (plot && !rep.levels.empty()) {
    auto svg = open_out(dir / "study.svg");
    fvem::write_svg(rep, svg);
  }
}

int cmd_run(const std::string& config, const fs::path& out) {
  const fvem::StudyConfig cfg = fvem::load_config(config);
  const fvem::ProblemData prob = fvem::problem_from_config(cfg);
  const fvem::LevelResult res = fvem::run_level(prob, cfg.h0_denominator, cfg);

  auto sol = open_out(out / "solution.csv");
  fvem::write_solution_csv(res.solution, prob, sol);
  fvem::StudyReport rep{{res.errors}};
  auto err = open_out(out / "errors.csv");
  fvem::write_csv(rep, err);

  fvem::write_table(rep, std::cout);
  if (!prob.has_exact()) std::cout << "no u_exact given: error columns are absent\n";
  std::cout << "solver " << fvem::linalg::to_string(res.errors.solve.method) << ", "
            << res.errors.solve.iterations << " iterations, relative residual "
            << fvem::format_double(res.errors.solve.relative_residual) << '\n';
  return 0;
}

int cmd_study(const std::string& config, std::optional<std::size_t> levels, const fs::path& out, bool plot,
              bool timing) {
  fvem::StudyConfig cfg = fvem::load_config(config);
  if (levels) cfg.levels = *levels;
  if (!cfg.u_exact) std::cerr << "warning: no u_exact, superconvergence metrics are unavailable\n";
  try {
    const fvem::StudyReport rep = fvem::run_study(cfg, [](const fvem::LevelErrors& l) {
      std::cerr << "n = " << l.n << " done (" << l.dof << " unknowns)\n";
    });
    save_study(rep, out, plot, timing);
    fvem::write_table(rep, std::cout);
  } catch (const fvem::StudyAborted& e) {
    save_study(e.partial, out, plot, timing);
    std::cerr << "study aborted: " << e.what() << "\npartial results written to " << (out / "study.csv") << '\n';
    return 1;
  }
  return 0;
}

int cmd_verify(std::uint64_t seed, const std::string& out, std::optional<double> tolerance) {
  fvem::verify::SuiteOptions opt;
  opt.seed = seed;
  opt.tolerance_override = tolerance;
  const auto results = fvem::verify::run_suite(opt);
  const std::string report = fvem::verify::to_json(results, seed).dump(2) + "\n";
  if (out.empty()) {
    std::cout << report;
  } else {
    auto os = open_out(out);
    os << report;
    for (const auto& r : results)
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.family << ": " << r.name << " (max rel "
                << fvem::format_double(r.max_rel) << ")\n";
  }
  return fvem::verify::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilinear finite volume element solver"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";

  auto* run = app.add_subcommand("run", "Solve one level and write solution.csv and errors.csv");
  run->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");

  std::optional<std::size_t> levels;
  bool plot = false, timing = false;
  auto* study = app.add_subcommand("study", "Run successive halvings and write study.csv");
  study->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  study->add_option("--levels", levels, "Override the number of levels")->check(CLI::PositiveNumber);
  study->add_option("--out", out_dir, "Output directory");
  study->add_flag("--plot", plot, "Also write study.svg");
  study->add_flag("--timing", timing, "Fill the seconds column (makes the CSV run-dependent)");

  std::uint64_t seed = 42;
  std::string report;
  std::optional<double> tolerance;
  auto* verify = app.add_subcommand("verify", "Run the identity checks");
  verify->add_option("--seed", seed, "Generator seed");
  verify->add_option("--out", report, "Write the JSON report here instead of stdout");
  verify->add_option("--override-tolerance", tolerance)->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, out_dir);
    if (*study) return cmd_study(config, levels, out_dir, plot, timing);
    if (*verify) return cmd_verify(seed, report, tolerance);
  } catch (const fvem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const fvem::expr::ParseError& e) {
    std::cerr << "expression error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
