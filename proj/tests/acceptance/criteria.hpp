#pragma once

#include <string>
#include <vector>

namespace foodpair::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;  // printed above the verdict line
};

struct Criterion {
  std::string name;
  double budget_seconds;  // 0 = no runtime bound
  Outcome (*run)();
};

std::vector<Criterion> score_criteria();
std::vector<Criterion> model_criteria();
std::vector<Criterion> system_criteria();

}  // namespace foodpair::acceptance
