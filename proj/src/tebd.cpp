#include "pagecurve/tebd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pagecurve {

TrotterPlan make_plan(const std::vector<BondOperator>& bonds, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("make_plan: dt must be positive");
  if (bonds.empty()) throw std::invalid_argument("make_plan: no bonds");
  for (const auto& b : bonds)
    if (hermiticity_defect(b.matrix) > 1e-14) throw std::invalid_argument("make_plan: bond operator is not Hermitian");

  TrotterPlan plan;
  plan.dt = dt;
  plan.dt1 = dt / (4.0 - std::cbrt(4.0));
  plan.dt2 = dt - 4.0 * plan.dt1;
  plan.bond_count = static_cast<int>(bonds.size());
  plan.local_dim = bonds.front().local_dim;

  // Distinct bond matrices.
  std::vector<int> type_of(bonds.size());
  std::vector<const CMatrix*> types;
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    auto it = std::find_if(types.begin(), types.end(), [&](const CMatrix* m) { return *m == bonds[b].matrix; });
    if (it == types.end()) {
      type_of[b] = static_cast<int>(types.size());
      types.push_back(&bonds[b].matrix);
    } else {
      type_of[b] = static_cast<int>(it - types.begin());
    }
  }

  const double t1 = plan.dt1;
  const double t2 = plan.dt2;
  const std::vector<std::pair<int, double>> schedule = {
      {0, t1 / 2}, {1, t1}, {0, t1},          {1, t1}, {0, (t1 + t2) / 2}, {1, t2},
      {0, (t2 + t1) / 2}, {1, t1}, {0, t1}, {1, t1}, {0, t1 / 2}};

  std::map<std::pair<int, double>, int> cache;
  for (const auto& [parity, duration] : schedule) {
    TrotterPlan::Layer layer{parity, duration, {}};
    for (std::size_t b = parity; b < bonds.size(); b += 2) {
      const auto key = std::make_pair(type_of[b], duration);
      auto it = cache.find(key);
      if (it == cache.end()) {
        plan.gate_store.push_back(expm_hermitian(*types[type_of[b]], duration));
        it = cache.emplace(key, static_cast<int>(plan.gate_store.size()) - 1).first;
      }
      layer.gates.emplace_back(bonds[b].bond_index, it->second);
    }
    plan.layers.push_back(std::move(layer));
  }
  return plan;
}

TrotterPlan TrotterPlan::inverse() const {
  TrotterPlan inv = *this;
  inv.dt = -dt;
  inv.dt1 = -dt1;
  inv.dt2 = -dt2;
  for (auto& g : inv.gate_store) g = g.adjoint().eval();
  std::reverse(inv.layers.begin(), inv.layers.end());
  for (auto& l : inv.layers) l.duration = -l.duration;
  return inv;
}

TruncationReport step(MpsState& s, const TrotterPlan& plan) {
  if (plan.bond_count != s.size() - 1 || plan.local_dim != s.local_dim())
    throw std::invalid_argument("step: plan does not match the state geometry");
  TruncationReport total{-1, 0.0, 0};
  for (const auto& layer : plan.layers)
    for (const auto& [bond, g] : layer.gates) total.discarded_weight += s.apply_two_site_gate(bond, plan.gate_store[g]).discarded_weight;
  total.new_bond_dim = s.max_bond_dim();
  return total;
}

double evolve(MpsState& s, const TrotterPlan& plan, int n_steps, int cadence, const EvolutionSink& sink) {
  if (cadence < 1) throw std::invalid_argument("evolve: cadence must be >= 1");
  double cumulative = 0.0;
  if (sink) sink(0, 0.0, s, cumulative);
  for (int n = 1; n <= n_steps; ++n) {
    cumulative += step(s, plan).discarded_weight;
    if (sink && n % cadence == 0) sink(n, n * plan.dt, s, cumulative);
  }
  return cumulative;
}

}  // namespace pagecurve
