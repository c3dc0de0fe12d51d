#include "hcurlest/cli.hpp"

#include "hcurlest/config.hpp"
#include "hcurlest/parallel.hpp"
#include "hcurlest/vtk.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace hcurlest {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCsvHeader = "iter,dof,error,rel_error,eta,eff_index,seconds";

std::string format_row(const ConvergenceRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%zu,%.17g,%.17g,%.17g,%.17g,%.3f", r.iter, r.dof, r.error, r.rel_error, r.eta,
                r.eff_index, r.seconds);
  return buf;
}

void write_indicators(const fs::path& path, const EstimateReport& est) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "element,eta_K";
  for (const auto& n : est.component_names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < est.indicators.size(); ++t) {
    out << t;
    std::snprintf(buf, sizeof buf, ",%.17g", est.indicators[t]);
    out << buf;
    for (const auto& c : est.components) {
      std::snprintf(buf, sizeof buf, ",%.17g", c[t]);
      out << buf;
    }
    out << '\n';
  }
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig c = load_run_config(path);
    const ProblemSpec p = problem_by_name(c.problem, c.example2_a);
    (void)(c.subdivisions ? p.initial_mesh(*c.subdivisions) : p.initial_mesh());
    out << path << ": ok (" << c.problem << ", " << c.estimators.size() << " estimator(s))\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << path << ": " << e.what() << '\n';
  } catch (const InvalidInput& e) {
    err << path << ": key 'mesh.subdivisions': " << e.what() << '\n';
  }
  return kExitConfig;
}

int cmd_run(const std::string& path, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::unique_ptr<TetMesh> initial;
  ProblemSpec problem;
  try {
    c = load_run_config(path);
    problem = problem_by_name(c.problem, c.example2_a);
    initial = std::make_unique<TetMesh>(c.subdivisions ? problem.initial_mesh(*c.subdivisions) : problem.initial_mesh());
  } catch (const ConfigError& e) {
    err << path << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidInput& e) {
    err << path << ": key 'mesh.subdivisions': " << e.what() << '\n';
    return kExitConfig;
  }

  const fs::path dir = c.output_directory;
  fs::create_directories(dir);
  fs::copy_file(path, dir / "config.json", fs::copy_options::overwrite_existing);

  std::vector<std::pair<EstimatorKind, ConvergenceRecord>> finals;
  std::string failure;
  for (EstimatorKind k : c.estimators) {
    const std::string name = to_string(k);
    AmrConfig amr = c.amr;
    amr.estimator = k;
    std::ofstream csv;
    if (c.write_csv) {
      csv.open(dir / ("convergence_" + name + ".csv"));
      csv << kCsvHeader << '\n' << std::flush;
    }
    amr.on_iteration = [&](const IterationState& s) {
      if (c.write_csv) csv << format_row(s.record) << '\n' << std::flush;
      if (c.write_vtk) {
        const CellArray arrays[] = {subdomain_array(s.mesh), {"eta_K", s.estimate.indicators, false}};
        export_vtk(s.mesh, arrays, dir / ("mesh_" + name + "_" + std::to_string(s.record.iter) + ".vtk"));
      }
      out << name << " iter " << s.record.iter << "  dof " << s.record.dof << "  rel_error " << s.record.rel_error
          << "  eff " << s.record.eff_index << '\n';
    };
    const AmrResult res = run_amr(problem, *initial, amr);
    if (c.write_csv && res.estimate) write_indicators(dir / ("indicators_" + name + ".csv"), *res.estimate);
    if (!res.records.empty()) finals.emplace_back(k, res.records.back());
    if (!res.failure.empty()) {
      failure = name + ": " + res.failure;
      break;
    }
  }

  std::ofstream summary(dir / "summary.csv");
  summary << "estimator," << kCsvHeader << '\n';
  for (const auto& [k, r] : finals) summary << to_string(k) << ',' << format_row(r) << '\n';
  if (!failure.empty()) {
    err << "numerical failure: " << failure << '\n';
    return kExitNumerical;
  }
  out << "outputs written to " << dir.string() << '\n';
  return kExitOk;
}

// Renders convergence_*.csv of a run directory as Markdown tables.
int cmd_export(const std::string& run_dir, std::ostream& out, std::ostream& err) {
  const fs::path dir = run_dir;
  if (!fs::is_directory(dir)) {
    err << run_dir << ": not a directory\n";
    return kExitUsage;
  }
  std::map<std::string, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("convergence_", 0) == 0 && entry.path().extension() == ".csv") {
      files.emplace(fname.substr(12, fname.size() - 16), entry.path());
    }
  }
  if (files.empty()) {
    err << run_dir << ": no convergence_*.csv files\n";
    return kExitUsage;
  }
  std::ostringstream md;
  for (const auto& [name, file] : files) {
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    if (line != kCsvHeader) {
      err << file.string() << ": unexpected header\n";
      return kExitUsage;
    }
    md << "## " << name << "\n\n| #Iter | #DoF | error | rel-error | eta | eff-index |\n|---|---|---|---|---|---|\n";
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string item;
      while (std::getline(ss, item, ',')) f.push_back(item);
      if (f.size() != 7) {
        err << file.string() << ": malformed row '" << line << "'\n";
        return kExitUsage;
      }
      char buf[256];
      std::snprintf(buf, sizeof buf, "| %s | %s | %.4e | %.4f | %.4e | %.3f |\n", f[0].c_str(), f[1].c_str(),
                    std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]));
      md << buf;
    }
    md << '\n';
  }
  std::ofstream(dir / "tables.md") << md.str();
  out << md.str();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive H(curl) interface solver with duality-based error estimators"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (overrides HCURLEST_THREADS)")->check(CLI::Range(1, 1024));

  std::string run_path, validate_path, export_dir;
  auto* run = app.add_subcommand("run", "run the AMR experiments of a config file");
  run->add_option("config", run_path, "JSON config")->required();
  auto* validate = app.add_subcommand("validate", "check a config file without running it");
  validate->add_option("config", validate_path, "JSON config")->required();
  auto* exp = app.add_subcommand("export", "render the convergence tables of a run directory");
  exp->add_option("run-dir", export_dir, "output directory of a previous run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (threads > 0) set_thread_count(threads);
    (void)thread_count();
  } catch (const InvalidInput& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_path, out, err);
    if (*validate) return cmd_validate(validate_path, out, err);
    return cmd_export(export_dir, out, err);
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace hcurlest
