#pragma once

// ===== Deterministic Brownian increments =====
//
// Counter-based Gaussian streams: every increment is a pure function of
// (seed, stream role, j, i, k), so draws never depend on evaluation order or
// thread count.  Plans are generated once and shared by every solver pass so
// perturbed and unperturbed runs see common random numbers.

#include <cstdint>
#include <stdexcept>

#include "mfsmp/tensor.hpp"
#include "mfsmp/time_grid.hpp"

namespace mfsmp {

/// Pre-generated increments for M_outer observation paths, each carrying
/// N_inner driving-noise particles.  dY is shared by all inner particles of
/// one outer path.
struct NoisePlan {
    std::uint64_t seed = 0;
    std::size_t M_outer = 0;
    std::size_t N_inner = 0;
    TimeGrid grid;
    Tensor3 dB1;  // (j, i, k)
    Tensor2 dY;   // (j, k)
};

/// Build a plan.  Same arguments give a bit-identical plan.
NoisePlan make_plan(std::uint64_t seed, std::size_t M_outer, std::size_t N_inner,
                    const TimeGrid& grid);

/// Double N_inner by appending sign-flipped driving-noise streams; the
/// observation increments are untouched so pairing is preserved.
NoisePlan antithetic_extend(const NoisePlan& plan);

/// Cumulative observed paths Y[j][k] = sum of dY[j][0..k-1], Y[j][0] = 0.
Tensor2 observed_paths(const NoisePlan& plan);

/// Order-independent digest of the plan's increments (driving noise first,
/// then observation noise, in index order).
std::uint64_t plan_content_hash(const NoisePlan& plan);

/// Standard normal draw for counter (seed, role, j, i, k).
double gaussian_at(std::uint64_t seed, std::uint64_t role, std::uint64_t j, std::uint64_t i,
                   std::uint64_t k);

}  // namespace mfsmp
