#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netmpc/offline_synthesis.hpp"
#include "netmpc/simulation.hpp"

namespace netmpc {

/// Experiment block of a run configuration.
struct ExperimentConfig {
  std::string variant = "stochastic";
  int horizon = 60;
  std::vector<std::uint64_t> seeds{0};
  // Constant scripts for the age processes ("D=max" style runs).
  std::optional<int> d_script, h_script, s_script;
};

/// Full run configuration: plant, network model, controller weights and the
/// experiment description.
struct RunConfig {
  PlantModel plant;
  AgeBounds bounds;
  MarkovChain d_chain;
  std::optional<MarkovChain> h_chain;  // default: uniform over successors
  std::optional<MarkovChain> s_chain;
  CostWeights weights;
  int N = 0;
  Vec x0;
  ExperimentConfig experiment;

  SynthesisParams synthesis_params() const;
  ExperimentSpec experiment_spec(Variant v, std::uint64_t seed) const;
};

/// Parses a JSON document; throws std::invalid_argument with a descriptive
/// message on malformed input or any violated invariant (dimension checks,
/// N >= d_hi + 1, stabilizability, detectability).
RunConfig parse_config(const std::string& json_text);

/// Reads and parses a configuration file.
RunConfig load_config(const std::string& path);

/// Canonical JSON serialization; parse_config(serialize_config(c)) is c.
std::string serialize_config(const RunConfig& config);

/// Rank tests on the plant: (A, B) stabilizable and (A, Q^{1/2}) detectable.
bool is_stabilizable(const Mat& A, const Mat& B, double tol = 1e-9);
bool is_detectable(const Mat& A, const Mat& Q, double tol = 1e-9);

}  // namespace netmpc
