#include "hcurlest/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace hcurlest {

using nlohmann::json;

ConfigError::ConfigError(std::string key, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : "key '" + key + "': ") + message),
      key_(std::move(key)),
      line_(line) {}

namespace {

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  // Line of the last component of a dotted key path, found by scanning for
  // each quoted component in turn. Returns 1 for the document root.
  int line_of(const std::string& path) const {
    std::size_t pos = 0;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      const std::size_t hit = text_.find('"' + part + '"', pos);
      if (hit == std::string::npos) break;
      pos = hit;
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw ConfigError(path, line_of(path), msg);
  }

  void only_keys(const json& obj, const std::string& path, std::set<std::string> allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown key");
    }
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

  double number(const json& obj, const std::string& path, const std::string& key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    return v.get<double>();
  }

  long long integer(const json& obj, const std::string& path, const std::string& key, long long fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<long long>();
  }

  bool boolean(const json& obj, const std::string& path, const std::string& key, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(join(path, key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& obj, const std::string& path, const std::string& key) const {
    if (!obj.contains(key)) fail(join(path, key), "required key is missing");
    const json& v = obj.at(key);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
  }

  SolveConfig solver(const json& obj, const std::string& path) const {
    SolveConfig c;
    only_keys(obj, path, {"mode", "tolerance", "max_iterations", "inexact_iterations", "preconditioner"});
    if (obj.contains("mode")) {
      const std::string m = string(obj, path, "mode");
      if (m == "exact") {
        c.mode = SolveMode::Exact;
      } else if (m == "inexact") {
        c.mode = SolveMode::Inexact;
      } else {
        fail(join(path, "mode"), "expected \"exact\" or \"inexact\"");
      }
    }
    c.tolerance = number(obj, path, "tolerance", c.tolerance);
    if (!(c.tolerance > 0.0 && c.tolerance < 1.0)) fail(join(path, "tolerance"), "must lie in (0, 1)");
    c.max_iterations = static_cast<int>(integer(obj, path, "max_iterations", c.max_iterations));
    if (c.max_iterations < 1) fail(join(path, "max_iterations"), "must be >= 1");
    c.inexact_iterations = static_cast<int>(integer(obj, path, "inexact_iterations", c.inexact_iterations));
    if (c.inexact_iterations < 1) fail(join(path, "inexact_iterations"), "must be >= 1");
    if (obj.contains("preconditioner")) {
      const std::string p = string(obj, path, "preconditioner");
      if (p == "none") {
        c.preconditioner = Preconditioner::None;
      } else if (p == "jacobi") {
        c.preconditioner = Preconditioner::Jacobi;
      } else if (p == "sgs") {
        c.preconditioner = Preconditioner::SymmetricGaussSeidel;
      } else {
        fail(join(path, "preconditioner"), "expected \"none\", \"jacobi\" or \"sgs\"");
      }
    }
    return c;
  }

 private:
  const std::string& text_;
};

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(e.byte, text.size()));
    const int line = 1 + static_cast<int>(std::count(text.begin(), end, '\n'));
    throw ConfigError("", line, std::string("malformed JSON: ") + e.what());
  }
  const Reader r(text);
  if (!doc.is_object()) throw ConfigError("", 1, "top level must be an object");
  r.only_keys(doc, "", {"problem", "example2_a", "mesh", "estimators", "amr", "solver", "quadrature", "output", "seed"});

  RunConfig c;
  c.problem = r.string(doc, "", "problem");
  c.example2_a = r.number(doc, "", "example2_a", c.example2_a);
  if (!(c.example2_a > 0.0)) r.fail("example2_a", "must be positive");
  try {
    (void)problem_by_name(c.problem, c.example2_a);
  } catch (const InvalidInput& e) {
    r.fail("problem", std::string(e.what()) +
                          " (expected example1/fdiv0, example1/fnothdiv, example2/fdiv0 or example2/fnothdiv)");
  }

  if (doc.contains("mesh")) {
    const json& m = doc.at("mesh");
    r.only_keys(m, "mesh", {"subdivisions"});
    if (m.contains("subdivisions")) {
      const json& s = m.at("subdivisions");
      if (!s.is_array() || s.size() != 3) r.fail("mesh.subdivisions", "expected an array of three integers");
      std::array<int, 3> n{};
      for (int d = 0; d < 3; ++d) {
        if (!s[d].is_number_integer() || s[d].get<long long>() < 1 || s[d].get<long long>() > 1000) {
          r.fail("mesh.subdivisions", "entries must be integers in [1, 1000]");
        }
        n[d] = s[d].get<int>();
      }
      c.subdivisions = n;
    }
  }

  if (!doc.contains("estimators")) r.fail("estimators", "required key is missing");
  const json& est = doc.at("estimators");
  if (!est.is_array() || est.empty()) r.fail("estimators", "expected a non-empty array of names");
  for (const auto& e : est) {
    if (!e.is_string()) r.fail("estimators", "entries must be strings");
    try {
      const EstimatorKind k = estimator_from_string(e.get<std::string>());
      if (std::find(c.estimators.begin(), c.estimators.end(), k) != c.estimators.end()) {
        r.fail("estimators", "duplicate estimator " + e.get<std::string>());
      }
      c.estimators.push_back(k);
    } catch (const InvalidInput& ex) {
      r.fail("estimators", ex.what());
    }
  }

  if (doc.contains("amr")) {
    const json& a = doc.at("amr");
    r.only_keys(a, "amr", {"theta", "max_dofs", "max_iterations", "target_rel_error", "track_both"});
    c.amr.theta = r.number(a, "amr", "theta", c.amr.theta);
    if (!(c.amr.theta > 0.0 && c.amr.theta <= 1.0)) r.fail("amr.theta", "must lie in (0, 1]");
    const long long md = r.integer(a, "amr", "max_dofs", static_cast<long long>(c.amr.max_dofs));
    if (md < 0) r.fail("amr.max_dofs", "must be non-negative");
    c.amr.max_dofs = static_cast<std::size_t>(md);
    c.amr.max_iterations = static_cast<int>(r.integer(a, "amr", "max_iterations", c.amr.max_iterations));
    if (c.amr.max_iterations < 0) r.fail("amr.max_iterations", "must be non-negative");
    c.amr.target_rel_error = r.number(a, "amr", "target_rel_error", c.amr.target_rel_error);
    if (c.amr.target_rel_error < 0.0) r.fail("amr.target_rel_error", "must be non-negative");
    c.amr.track_both_new_estimators = r.boolean(a, "amr", "track_both", false);
    if (c.amr.max_dofs == 0 && c.amr.max_iterations == 0 && c.amr.target_rel_error == 0.0) {
      r.fail("amr", "at least one of max_dofs, max_iterations, target_rel_error must be set");
    }
  }

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    r.only_keys(s, "solver", {"primal", "auxiliary"});
    if (s.contains("primal")) c.amr.primal_solver = r.solver(s.at("primal"), "solver.primal");
    if (s.contains("auxiliary")) c.amr.auxiliary_solver = r.solver(s.at("auxiliary"), "solver.auxiliary");
  }

  if (doc.contains("quadrature")) {
    const json& q = doc.at("quadrature");
    r.only_keys(q, "quadrature", {"volume", "face", "edge", "error"});
    auto degree = [&](const std::string& key, int fallback, int lo) {
      const long long v = r.integer(q, "quadrature", key, fallback);
      if (v < lo || v > 40) r.fail("quadrature." + key, "must lie in [" + std::to_string(lo) + ", 40]");
      return static_cast<int>(v);
    };
    c.amr.quadrature.volume = degree("volume", c.amr.quadrature.volume, 2);
    c.amr.quadrature.face = degree("face", c.amr.quadrature.face, 2);
    c.amr.quadrature.edge = degree("edge", c.amr.quadrature.edge, 1);
    c.amr.error_degree = degree("error", c.amr.error_degree, 1);
  }

  if (!doc.contains("output")) r.fail("output", "required key is missing");
  const json& o = doc.at("output");
  r.only_keys(o, "output", {"directory", "csv", "vtk"});
  const std::string dir = r.string(o, "output", "directory");
  if (dir.empty()) r.fail("output.directory", "must not be empty");
  c.output_directory = dir;
  c.write_csv = r.boolean(o, "output", "csv", true);
  c.write_vtk = r.boolean(o, "output", "vtk", false);

  const long long seed = r.integer(doc, "", "seed", 0);
  if (seed < 0) r.fail("seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace hcurlest
