#pragma once

#include "pagecurve/lattice_model.hpp"
#include "pagecurve/mps.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pagecurve {

enum class InitialKind { filled, high_entropy };

InitialKind parse_initial_kind(const std::string& name);
std::string to_string(InitialKind kind);

struct InitialStateSpec {
  InitialKind kind = InitialKind::filled;
  std::uint64_t seed = 1;
  int circuit_depth = 0;  // 0 selects L_S
};

/// Haar-distributed dim x dim unitary (QR of a complex Gaussian matrix, R-diagonal phases
/// moved into Q).
CMatrix haar_unitary(std::mt19937_64& rng, int dim);

/// Dense system-only vector of the high-entropy state: alternating up/down, then
/// `depth` brickwork layers of Haar two-site gates (layer k on bonds of parity k mod 2).
CVector high_entropy_system_vector(int L_S, int depth, std::uint64_t seed);

/// Filled system (all up) + empty bath (all down), or the Haar-circuit system + empty bath.
/// The returned state uses the encoding picked by Geometry::for_model. Throws
/// std::invalid_argument when chi_max cannot hold the circuit state exactly. Per-seed
/// filling deviations above 0.15 L_S are reported through `warnings`.
MpsState prepare(const InitialStateSpec& spec, const ModelParams& p, int chi_max = 150, double svd_cutoff = 1e-12,
                 std::vector<std::string>* warnings = nullptr);

}  // namespace pagecurve
