#pragma once

#include <string>
#include <vector>

#include "abstain/classifier.hpp"
#include "abstain/density.hpp"

namespace abstain {

/// A scenario plus classifier geometry loaded from a TOML-style file.
/// See README for the schema (sections f0/f1/f0_adv/f1_adv, priors,
/// classifier; `schema = 1`).  Unknown sections or keys are rejected.
struct ScenarioConfig {
  Scenario scenario;
  std::vector<double> y;
  std::vector<double> gamma;  // zeros when the file omits it

  Classifier1D classifier() const { return Classifier1D(y, gamma); }
};

ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace abstain
