#ifndef VMSLOD_RUNSPEC_HPP
#define VMSLOD_RUNSPEC_HPP

#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "vmslod/solvers.hpp"

namespace vmslod {

enum class Command { solve, table1, table2, decay, convergence, compare, correctors };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

/// A complete experiment description. Defaults reproduce the reference
/// experiment: epsilon = 2^-7, b = (cos 0.7, sin 0.7), f = 1, a 16/256
/// mesh pair and ell = 1.
struct RunSpec {
  MethodConfig cfg;
  Command command = Command::solve;
  std::filesystem::path output_dir = "out";
  int threads = 1;
  unsigned seed = 1;

  RunSpec();

  static RunSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;

  bool operator==(const RunSpec& o) const;
};

/// Parse "inf" or a positive integer.
int parse_ell(const std::string& s);
std::string ell_to_string(int ell);

}  // namespace vmslod

#endif
