#pragma once

#include "pagecurve/lattice_model.hpp"
#include "pagecurve/mps.hpp"

#include <functional>
#include <vector>

namespace pagecurve {

/// Fourth-order Trotter step U(t1) U(t1) U(t2) U(t1) U(t1) with
/// U(t) = exp(-i H_A t/2) exp(-i H_B t) exp(-i H_A t/2), where A holds the bonds with even
/// 0-based index and B the odd ones. Neighbouring half A-layers are merged, giving 11 layers.
struct TrotterPlan {
  struct Layer {
    int parity = 0;  // 0: bonds 0, 2, 4, ...; 1: bonds 1, 3, ...
    double duration = 0.0;
    std::vector<std::pair<int, int>> gates;  // (bond index, index into gate_store)
  };

  double dt = 0.0;
  double dt1 = 0.0;
  double dt2 = 0.0;
  int bond_count = 0;
  int local_dim = 2;
  std::vector<Layer> layers;
  std::vector<CMatrix> gate_store;

  /// Plan for a step of -dt (adjoint gates, layers reversed).
  TrotterPlan inverse() const;
};

/// Gates are cached per distinct (bond matrix, duration) pair.
TrotterPlan make_plan(const std::vector<BondOperator>& bonds, double dt);

/// Advances the state by plan.dt. The report's bond_index is -1, discarded_weight sums all
/// truncations of the step and new_bond_dim is the largest bond dimension afterwards.
TruncationReport step(MpsState& s, const TrotterPlan& plan);

/// Called at step 0 and every `cadence` steps with (step, time, state, cumulative discarded weight).
using EvolutionSink = std::function<void(int, double, const MpsState&, double)>;

/// Runs n_steps steps; returns the cumulative discarded weight.
double evolve(MpsState& s, const TrotterPlan& plan, int n_steps, int cadence, const EvolutionSink& sink);

}  // namespace pagecurve
