#pragma once

#include <string>
#include <vector>

namespace qprtool {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Spot checks of every library invariant, fast enough to run on each
// release. data_dir must hold the committed golden files.
std::vector<CheckResult> run_verify_checks(const std::string& data_dir);

}  // namespace qprtool
