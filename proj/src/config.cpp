#include "parasteady/config.hpp"

#include "parasteady/engine.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace parasteady {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, const std::string& scope,
                         const std::set<std::string>& known) {
  std::string unknown;
  for (const auto& [key, _] : object.items()) {
    if (known.count(key)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += scope.empty() ? key : scope + "." + key;
  }
  if (!unknown.empty())
    throw std::runtime_error("config: unknown key(s): " + unknown);
}

double require_number(const json& object, const std::string& scope, const std::string& key,
                      double fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_number())
    throw std::runtime_error("config: " + scope + "." + key + " must be a number");
  return object[key].get<double>();
}

int require_int(const json& object, const std::string& scope, const std::string& key,
                int fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_number_integer())
    throw std::runtime_error("config: " + scope + "." + key + " must be an integer");
  return object[key].get<int>();
}

std::string require_string(const json& object, const std::string& scope, const std::string& key,
                           const std::string& fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_string())
    throw std::runtime_error("config: " + scope + "." + key + " must be a string");
  return object[key].get<std::string>();
}

void apply_problem_section(const json& section, ProblemSpec& spec) {
  spec.name = require_string(section, "problem", "name", spec.name);
  if (spec.name == "scalar") {
    reject_unknown_keys(section, "problem", {"name", "m", "k", "amplitude", "frequency"});
    spec.scalar_m = require_number(section, "problem", "m", spec.scalar_m);
    spec.scalar_k = require_number(section, "problem", "k", spec.scalar_k);
    spec.scalar_amplitude = require_number(section, "problem", "amplitude", spec.scalar_amplitude);
    spec.scalar_frequency_hz =
        require_number(section, "problem", "frequency", spec.scalar_frequency_hz);
  } else if (spec.name == "dae_pair") {
    reject_unknown_keys(section, "problem", {"name"});
  } else if (spec.name == "coax" || spec.name == "coax_linear") {
    reject_unknown_keys(section, "problem",
                        {"name", "n_r", "r1", "r2", "r3", "sigma_wire", "sigma_sleeve",
                         "sigma_shield", "brauer_k1", "brauer_k2", "brauer_k3", "current",
                         "frequency", "source_region"});
    auto& c = spec.coax;
    c.n_r = require_int(section, "problem", "n_r", c.n_r);
    c.r1 = require_number(section, "problem", "r1", c.r1);
    c.r2 = require_number(section, "problem", "r2", c.r2);
    c.r3 = require_number(section, "problem", "r3", c.r3);
    c.sigma_wire = require_number(section, "problem", "sigma_wire", c.sigma_wire);
    c.sigma_sleeve = require_number(section, "problem", "sigma_sleeve", c.sigma_sleeve);
    c.sigma_shield = require_number(section, "problem", "sigma_shield", c.sigma_shield);
    c.brauer_k1 = require_number(section, "problem", "brauer_k1", c.brauer_k1);
    c.brauer_k2 = require_number(section, "problem", "brauer_k2", c.brauer_k2);
    c.brauer_k3 = require_number(section, "problem", "brauer_k3", c.brauer_k3);
    c.current = require_number(section, "problem", "current", c.current);
    c.frequency_hz = require_number(section, "problem", "frequency", c.frequency_hz);
    c.source_region = require_int(section, "problem", "source_region", c.source_region);
    c.linear_sleeve = spec.name == "coax_linear";
  } else if (spec.name == "files") {
    reject_unknown_keys(section, "problem", {"name", "mass", "stiffness", "excitation"});
    spec.mass_path = require_string(section, "problem", "mass", spec.mass_path);
    spec.stiffness_path = require_string(section, "problem", "stiffness", spec.stiffness_path);
    spec.excitation_path = require_string(section, "problem", "excitation", spec.excitation_path);
  } else {
    throw std::runtime_error("config: unknown problem name \"" + spec.name + "\"");
  }
}

void apply_json(const json& doc, RunConfig& config) {
  if (!doc.is_object()) throw std::runtime_error("config: document must be a JSON object");
  reject_unknown_keys(doc, "", {"problem", "mesh", "solver", "output"});

  if (doc.contains("problem")) {
    if (!doc["problem"].is_object())
      throw std::runtime_error("config: problem must be an object");
    apply_problem_section(doc["problem"], config.problem);
  }
  if (doc.contains("mesh")) {
    const auto& mesh = doc["mesh"];
    if (!mesh.is_object()) throw std::runtime_error("config: mesh must be an object");
    reject_unknown_keys(mesh, "mesh", {"subintervals", "fine_steps"});
    config.subintervals = require_int(mesh, "mesh", "subintervals", config.subintervals);
    config.fine_steps = require_int(mesh, "mesh", "fine_steps", config.fine_steps);
  }
  if (doc.contains("solver")) {
    const auto& solver = doc["solver"];
    if (!solver.is_object()) throw std::runtime_error("config: solver must be an object");
    reject_unknown_keys(solver, "solver",
                        {"variant", "tol", "max_iterations", "workers", "use_conjugate_symmetry",
                         "frozen_reference", "max_periods", "compare_variants"});
    config.variant = require_string(solver, "solver", "variant", config.variant);
    config.tol = require_number(solver, "solver", "tol", config.tol);
    config.max_iterations = require_int(solver, "solver", "max_iterations", config.max_iterations);
    config.workers = require_int(solver, "solver", "workers", config.workers);
    config.max_periods = require_int(solver, "solver", "max_periods", config.max_periods);
    if (solver.contains("use_conjugate_symmetry")) {
      if (!solver["use_conjugate_symmetry"].is_boolean())
        throw std::runtime_error("config: solver.use_conjugate_symmetry must be a boolean");
      config.use_conjugate_symmetry = solver["use_conjugate_symmetry"].get<bool>();
    }
    if (solver.contains("frozen_reference")) {
      const auto& ref = solver["frozen_reference"];
      if (ref.is_string()) {
        if (ref.get<std::string>() != "zero")
          throw std::runtime_error(
              "config: solver.frozen_reference must be \"zero\" or an array of numbers");
        config.frozen_reference.resize(0);
      } else if (ref.is_array()) {
        config.frozen_reference.resize(static_cast<Eigen::Index>(ref.size()));
        for (size_t i = 0; i < ref.size(); ++i) {
          if (!ref[i].is_number())
            throw std::runtime_error("config: solver.frozen_reference entries must be numbers");
          config.frozen_reference(static_cast<Eigen::Index>(i)) = ref[i].get<double>();
        }
      } else {
        throw std::runtime_error(
            "config: solver.frozen_reference must be \"zero\" or an array of numbers");
      }
    }
    if (solver.contains("compare_variants")) {
      if (!solver["compare_variants"].is_array())
        throw std::runtime_error("config: solver.compare_variants must be an array of names");
      config.compare_variants.clear();
      for (const auto& v : solver["compare_variants"])
        config.compare_variants.push_back(v.get<std::string>());
    }
  }
  if (doc.contains("output")) {
    const auto& output = doc["output"];
    if (!output.is_object()) throw std::runtime_error("config: output must be an object");
    reject_unknown_keys(output, "output", {"directory"});
    config.output_dir = require_string(output, "output", "directory", config.output_dir);
  }
}

void apply_overrides(const CliOverrides& o, RunConfig& config) {
  if (o.problem) {
    const std::string& value = *o.problem;
    if (value.find(',') != std::string::npos) {
      // "mass.mtx,stiffness.mtx,excitation.json"
      std::istringstream ss(value);
      std::string mass, stiff, exc, extra;
      if (!std::getline(ss, mass, ',') || !std::getline(ss, stiff, ',') ||
          !std::getline(ss, exc, ',') || std::getline(ss, extra, ','))
        throw std::runtime_error(
            "config: --problem file form needs exactly \"mass,stiffness,excitation\"");
      config.problem.name = "files";
      config.problem.mass_path = mass;
      config.problem.stiffness_path = stiff;
      config.problem.excitation_path = exc;
    } else {
      config.problem.name = value;
      config.problem.coax.linear_sleeve = value == "coax_linear";
    }
  }
  if (o.variant) config.variant = *o.variant;
  if (o.subintervals) config.subintervals = *o.subintervals;
  if (o.fine_steps) config.fine_steps = *o.fine_steps;
  if (o.tol) config.tol = *o.tol;
  if (o.max_iterations) config.max_iterations = *o.max_iterations;
  if (o.workers) config.workers = *o.workers;
  if (o.output_dir) config.output_dir = *o.output_dir;
  if (o.no_real_symmetry) config.use_conjugate_symmetry = false;
  if (!o.compare_variants.empty()) config.compare_variants = o.compare_variants;
}

void validate(RunConfig& config) {
  static const std::set<std::string> known_names = {"scalar", "dae_pair", "coax", "coax_linear",
                                                    "files"};
  if (!known_names.count(config.problem.name))
    throw std::runtime_error("config: unknown problem name \"" + config.problem.name + "\"");
  if (config.problem.name == "files" &&
      (config.problem.mass_path.empty() || config.problem.stiffness_path.empty() ||
       config.problem.excitation_path.empty()))
    throw std::runtime_error("config: problem \"files\" needs mass, stiffness and excitation");

  const SolverVariant variant = parse_variant(config.variant);  // rejects unknown names
  if (config.subintervals < 2)
    throw std::runtime_error("config: mesh.subintervals must be >= 2");
  if (variant == SolverVariant::PPPCMultiharmonic && config.subintervals % 2 != 0)
    throw std::runtime_error(
        "config: the multiharmonic variant needs an even mesh.subintervals");
  if (config.fine_steps < 1) throw std::runtime_error("config: mesh.fine_steps must be >= 1");
  if (!(config.tol > 0.0)) throw std::runtime_error("config: solver.tol must be positive");
  if (config.max_iterations < 1)
    throw std::runtime_error("config: solver.max_iterations must be >= 1");
  if (config.max_periods < 1) throw std::runtime_error("config: solver.max_periods must be >= 1");
  if (config.workers < 0) throw std::runtime_error("config: solver.workers must be >= 0");
  if (config.workers == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    config.workers = hw > 0 ? static_cast<int>(hw) : 1;
  }
  for (const auto& name : config.compare_variants) parse_variant(name);
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text, const CliOverrides& overrides) {
  RunConfig config;
  if (!json_text.empty()) {
    json doc;
    try {
      doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(std::string("config: JSON parse error: ") + e.what());
    }
    apply_json(doc, config);
  }
  apply_overrides(overrides, config);
  validate(config);
  return config;
}

RunConfig parse_config(const std::optional<std::string>& config_path,
                       const CliOverrides& overrides) {
  std::string text;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw std::runtime_error("config: cannot open " + *config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return parse_config_text(text, overrides);
}

PeriodicProblem build_problem(const ProblemSpec& spec) {
  if (spec.name == "scalar")
    return build_scalar_test(spec.scalar_m, spec.scalar_k, spec.scalar_amplitude,
                             spec.scalar_frequency_hz);
  if (spec.name == "dae_pair") return build_dae_pair();
  if (spec.name == "coax" || spec.name == "coax_linear") return build_coax_cable(spec.coax);
  if (spec.name == "files")
    return load_problem(spec.mass_path, spec.stiffness_path, spec.excitation_path);
  throw std::runtime_error("config: unknown problem name \"" + spec.name + "\"");
}

TimeMesh make_mesh(const RunConfig& config, const PeriodicProblem& problem) {
  return TimeMesh(config.subintervals, config.fine_steps, problem.period());
}

}  // namespace parasteady
