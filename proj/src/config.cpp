#include "bigsam/config.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace bigsam {

std::string_view to_string(SolverKind k) {
  return k == SolverKind::BigSam ? "bigsam" : "tikhonov";
}

SolverKind solver_kind_from_string(std::string_view name) {
  if (name == "bigsam") return SolverKind::BigSam;
  if (name == "tikhonov") return SolverKind::Tikhonov;
  throw ConfigError("unknown solver '" + std::string(name) + "' (expected bigsam or tikhonov)");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ConfigError(key + ": " + what);
  };
  if (problem.id.empty()) fail("problem.id", "must not be empty");
  if (problem.from_files()) {
    if (!problem.rhs_path) fail("problem.rhs", "required together with problem.matrix");
  } else {
    if (problem.rows < 1 || problem.cols < 1) fail("problem.rows/cols", "must be positive");
    if (problem.rank < 1 || problem.rank > std::min(problem.rows, problem.cols))
      fail("problem.rank", "must lie in [1, min(rows, cols)]");
    if (!(problem.sv_decay > 0.0 && problem.sv_decay < 1.0))
      fail("problem.sv_decay", "must lie in (0, 1)");
  }
  if (gammas.empty()) fail("solver.gamma", "needs at least one value");
  for (double g : gammas)
    if (!(g > 0.0 && g <= 1.0)) fail("solver.gamma", "values must lie in (0, 1]");
  if (step_inner && !(*step_inner > 0.0)) fail("solver.t", "must be positive");
  if (step_outer && !(*step_outer > 0.0)) fail("solver.s", "must be positive");
  if (!(lambda0 > 0.0)) fail("solver.lambda0", "must be positive");
  if (noise_levels.empty()) fail("benchmark.noise", "needs at least one value");
  for (double r : noise_levels)
    if (!(r >= 0.0)) fail("benchmark.noise", "values must be nonnegative");
  if (replications < 1) fail("benchmark.replications", "must be at least 1");
  if (parallelism < 1) fail("benchmark.parallelism", "must be at least 1");
  if (!(relative_gap > 0.0)) fail("stopping.relative_gap", "must be positive");
  if (max_iterations < 1) fail("stopping.max_iterations", "must be at least 1");
  if (time_limit_seconds && !(*time_limit_seconds >= 0.0))
    fail("stopping.time_limit", "must be nonnegative");
  if (reference_budget < 1) fail("oracle.budget", "must be at least 1");
  if (!(reference_residual > 0.0)) fail("oracle.residual", "must be positive");
  if (!(lower_bound_mu >= 0.0)) fail("oracle.mu", "must be nonnegative");
  if (record_every < 1) fail("output.record_every", "must be at least 1");
}

namespace {

// One TOML table; remembers which keys were read so leftovers can be reported.
class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  template <class T>
  std::optional<T> get(const std::string& key) {
    if (!table_) return std::nullopt;
    const toml::node* node = table_->get(key);
    if (!node) return std::nullopt;
    seen_.insert(key);
    if (auto v = node->value<T>()) return *v;
    throw ConfigError(qualified(key) + ": wrong type");
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    if (!table_) return std::nullopt;
    const toml::node* node = table_->get(key);
    if (!node) return std::nullopt;
    seen_.insert(key);
    std::vector<double> out;
    if (const auto* arr = node->as_array()) {
      for (const toml::node& item : *arr) {
        auto v = item.value<double>();
        if (!v) throw ConfigError(qualified(key) + ": array entries must be numbers");
        out.push_back(*v);
      }
    } else if (auto v = node->value<double>()) {
      out.push_back(*v);
    } else {
      throw ConfigError(qualified(key) + ": expected a number or an array of numbers");
    }
    return out;
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [key, node] : *table_)
      if (!seen_.count(std::string(key.str())))
        throw ConfigError("unknown key " + qualified(std::string(key.str())));
  }

 private:
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> seen_;
};

template <class T>
void assign(std::optional<T> v, T& target) {
  if (v) target = *v;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ':' << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }

  static const std::set<std::string> kSections{"problem", "solver", "benchmark",
                                               "stopping", "oracle", "output"};
  for (const auto& [key, node] : root) {
    if (!kSections.count(std::string(key.str())))
      throw ConfigError("unknown section [" + std::string(key.str()) + "]");
    if (!node.is_table())
      throw ConfigError("[" + std::string(key.str()) + "] must be a table");
  }

  RunConfig cfg;
  {
    Section s(root["problem"].as_table(), "problem");
    assign(s.get<std::string>("id"), cfg.problem.id);
    if (auto v = s.get<int64_t>("rows")) cfg.problem.rows = *v;
    if (auto v = s.get<int64_t>("cols")) cfg.problem.cols = *v;
    if (auto v = s.get<int64_t>("rank")) cfg.problem.rank = *v;
    assign(s.get<double>("sv_decay"), cfg.problem.sv_decay);
    if (auto v = s.get<int64_t>("seed")) {
      if (*v < 0) throw ConfigError("problem.seed: must be nonnegative");
      cfg.problem.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = s.get<std::string>("matrix")) cfg.problem.matrix_path = *v;
    if (auto v = s.get<std::string>("rhs")) cfg.problem.rhs_path = *v;
    s.finish();
  }
  {
    Section s(root["solver"].as_table(), "solver");
    if (auto v = s.get<std::string>("method")) cfg.solver = solver_kind_from_string(*v);
    assign(s.numbers("gamma"), cfg.gammas);
    if (auto v = s.get<double>("t")) cfg.step_inner = *v;
    if (auto v = s.get<double>("s")) cfg.step_outer = *v;
    assign(s.get<double>("lambda0"), cfg.lambda0);
    s.finish();
  }
  {
    Section s(root["benchmark"].as_table(), "benchmark");
    assign(s.numbers("noise"), cfg.noise_levels);
    if (auto v = s.get<int64_t>("replications")) cfg.replications = static_cast<int>(*v);
    if (auto v = s.get<int64_t>("seed")) {
      if (*v < 0) throw ConfigError("benchmark.seed: must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = s.get<int64_t>("parallelism")) cfg.parallelism = static_cast<int>(*v);
    s.finish();
  }
  {
    Section s(root["stopping"].as_table(), "stopping");
    assign(s.get<double>("relative_gap"), cfg.relative_gap);
    if (auto v = s.get<int64_t>("max_iterations")) cfg.max_iterations = static_cast<long>(*v);
    if (auto v = s.get<double>("time_limit")) cfg.time_limit_seconds = *v;
    s.finish();
  }
  {
    Section s(root["oracle"].as_table(), "oracle");
    if (auto v = s.get<int64_t>("budget")) cfg.reference_budget = static_cast<long>(*v);
    assign(s.get<double>("residual"), cfg.reference_residual);
    assign(s.get<double>("mu"), cfg.lower_bound_mu);
    s.finish();
  }
  {
    Section s(root["output"].as_table(), "output");
    if (auto v = s.get<std::string>("directory")) cfg.output_dir = *v;
    assign(s.get<bool>("trajectories"), cfg.trajectories);
    if (auto v = s.get<int64_t>("record_every")) cfg.record_every = static_cast<long>(*v);
    s.finish();
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::string to_toml(const RunConfig& cfg) {
  auto numbers = [](const std::vector<double>& v) {
    toml::array arr;
    for (double x : v) arr.push_back(x);
    return arr;
  };
  toml::table problem{{"id", cfg.problem.id}};
  if (cfg.problem.from_files()) {
    problem.insert("matrix", cfg.problem.matrix_path->string());
    if (cfg.problem.rhs_path) problem.insert("rhs", cfg.problem.rhs_path->string());
  } else {
    problem.insert("rows", static_cast<int64_t>(cfg.problem.rows));
    problem.insert("cols", static_cast<int64_t>(cfg.problem.cols));
    problem.insert("rank", static_cast<int64_t>(cfg.problem.rank));
    problem.insert("sv_decay", cfg.problem.sv_decay);
    problem.insert("seed", static_cast<int64_t>(cfg.problem.seed));
  }
  toml::table solver{{"method", std::string(to_string(cfg.solver))},
                     {"gamma", numbers(cfg.gammas)},
                     {"lambda0", cfg.lambda0}};
  if (cfg.step_inner) solver.insert("t", *cfg.step_inner);
  if (cfg.step_outer) solver.insert("s", *cfg.step_outer);
  toml::table benchmark{{"noise", numbers(cfg.noise_levels)},
                        {"replications", static_cast<int64_t>(cfg.replications)},
                        {"seed", static_cast<int64_t>(cfg.seed)},
                        {"parallelism", static_cast<int64_t>(cfg.parallelism)}};
  toml::table stopping{{"relative_gap", cfg.relative_gap},
                       {"max_iterations", static_cast<int64_t>(cfg.max_iterations)}};
  if (cfg.time_limit_seconds) stopping.insert("time_limit", *cfg.time_limit_seconds);
  toml::table oracle{{"budget", static_cast<int64_t>(cfg.reference_budget)},
                     {"residual", cfg.reference_residual},
                     {"mu", cfg.lower_bound_mu}};
  toml::table output{{"directory", cfg.output_dir.string()},
                     {"trajectories", cfg.trajectories},
                     {"record_every", static_cast<int64_t>(cfg.record_every)}};
  toml::table root{{"problem", problem}, {"solver", solver},     {"benchmark", benchmark},
                   {"stopping", stopping}, {"oracle", oracle},   {"output", output}};
  std::ostringstream out;
  out << root << '\n';
  return out.str();
}

std::filesystem::path default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  if (env && *env) return env;
  return ".";
}

}  // namespace bigsam
