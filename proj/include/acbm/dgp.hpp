#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "acbm/core.hpp"
#include "acbm/metrics.hpp"

namespace acbm {

class DesignInvariantViolation : public AcbmError {
 public:
  using AcbmError::AcbmError;
};

struct MixtureCluster {
  int size = 1;
  std::vector<double> weights;
  std::vector<double> accuracies;
};

// Columns are laid out cluster by cluster in the listed order.
struct AcbmDesign {
  std::vector<MixtureCluster> clusters;
  std::size_t n_examinees = 0;
  std::uint64_t seed = 0;

  std::size_t n_questions() const;
  // Structural checks needed to simulate: sizes, weight sums, accuracies in
  // [0, 1], K within the bound.
  void validate() const;
  // Distinct accuracies strictly inside (0, 1) and positive weights, on top
  // of validate().
  bool satisfies_identifiability() const;
};

struct RaschDesign {
  std::vector<double> psi;         // difficulty per question
  std::vector<double> xi_support;  // abilities drawn uniformly from this set
  std::size_t n_examinees = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimulatedData {
  ResponseMatrix X;
  GroundTruth truth;
};

SimulatedData generate_acbm(const AcbmDesign& design);
SimulatedData generate_rasch(const RaschDesign& design);

double logistic(double x);

// Built-in designs. dgp1/dgp2 are mixture designs with fixed settings; dgp3
// and dgp4 are Rasch designs with difficulties -0.5 for the first half of the
// questions and +0.5 for the second half, abilities from {-2, 0, 2}.
AcbmDesign dgp1_design(std::size_t n, std::uint64_t seed);
AcbmDesign dgp2_design(std::size_t n, std::uint64_t seed);
RaschDesign dgp3_design(std::size_t n, std::uint64_t seed);
RaschDesign dgp4_design(std::size_t n, std::uint64_t seed);

bool is_builtin_design(const std::string& name);
bool is_rasch_design(const std::string& name);
// Throws AcbmError for unknown names.
SimulatedData simulate_builtin(const std::string& name, std::size_t n, std::uint64_t seed);

}  // namespace acbm
