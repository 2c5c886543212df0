#include "vmslod/runspec.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "vmslod/errors.hpp"

namespace vmslod {

std::string to_string(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::table1: return "table1";
    case Command::table2: return "table2";
    case Command::decay: return "decay";
    case Command::convergence: return "convergence";
    case Command::compare: return "compare";
    case Command::correctors: return "correctors";
  }
  return "?";
}

Command command_from_string(const std::string& s) {
  if (s == "solve") return Command::solve;
  if (s == "table1") return Command::table1;
  if (s == "table2") return Command::table2;
  if (s == "decay") return Command::decay;
  if (s == "convergence") return Command::convergence;
  if (s == "compare") return Command::compare;
  if (s == "correctors") return Command::correctors;
  throw ConfigError("command: expected one of solve|table1|table2|decay|convergence|compare|correctors, got \"" + s + "\"");
}

int parse_ell(const std::string& s) {
  if (s == "inf") return MethodConfig::infinite_ell;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("ell: expected a positive integer or \"inf\", got \"" + s + "\"");
  }
}

std::string ell_to_string(int ell) {
  return ell == MethodConfig::infinite_ell ? "inf" : std::to_string(ell);
}

RunSpec::RunSpec() {
  cfg.epsilon = std::pow(2.0, -7);
  cfg.b_angle = 0.7;
  cfg.coarse_n = 16;
  cfg.fine_n = 256;
  cfg.ell = 1;
  cfg.method = Method::vms;
}

RunSpec RunSpec::from_json(const nlohmann::json& j) {
  RunSpec spec;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "epsilon") spec.cfg.epsilon = value.get<double>();
      else if (key == "b_angle") spec.cfg.b_angle = value.get<double>();
      else if (key == "coarse_n") spec.cfg.coarse_n = value.get<int>();
      else if (key == "fine_n") spec.cfg.fine_n = value.get<int>();
      else if (key == "ell") {
        if (value.is_string()) spec.cfg.ell = parse_ell(value.get<std::string>());
        else spec.cfg.ell = value.get<int>();
      } else if (key == "f") spec.cfg.f = FieldSpec::parse(value.get<std::string>());
      else if (key == "solver_tol") spec.cfg.solver_tol = value.get<double>();
      else if (key == "method") spec.cfg.method = method_from_string(value.get<std::string>());
      else if (key == "command") spec.command = command_from_string(value.get<std::string>());
      else if (key == "output_dir") spec.output_dir = value.get<std::string>();
      else if (key == "threads") spec.threads = value.get<int>();
      else if (key == "seed") spec.seed = value.get<unsigned>();
      else throw ConfigError("config: unknown key \"" + key + "\"");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config: invalid value for \"" + key + "\": " + e.what());
    }
  }
  return spec;
}

nlohmann::json RunSpec::to_json() const {
  nlohmann::json j;
  j["epsilon"] = cfg.epsilon;
  j["b_angle"] = cfg.b_angle;
  j["coarse_n"] = cfg.coarse_n;
  j["fine_n"] = cfg.fine_n;
  if (cfg.ell == MethodConfig::infinite_ell) j["ell"] = "inf";
  else j["ell"] = cfg.ell;
  j["f"] = cfg.f.text();
  j["solver_tol"] = cfg.solver_tol;
  j["method"] = to_string(cfg.method);
  j["command"] = to_string(command);
  j["output_dir"] = output_dir.string();
  j["threads"] = threads;
  j["seed"] = seed;
  return j;
}

void RunSpec::validate() const {
  cfg.validate();
  if (threads < 1) throw ConfigError("threads: must be >= 1, got " + std::to_string(threads));
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

bool RunSpec::operator==(const RunSpec& o) const {
  return cfg == o.cfg && command == o.command && output_dir == o.output_dir &&
         threads == o.threads && seed == o.seed;
}

}  // namespace vmslod
