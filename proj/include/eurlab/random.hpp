#pragma once

// Seeded random generation of states and measurements.
//
// All randomness in the library flows through `Rng` (64-bit Mersenne
// twister). Independent work items derive their own generator with
// `derive_seed(base, index)` (SplitMix64 mixing), so results depend only on
// the base seed and the item index, never on scheduling.

#include <cstdint>
#include <random>

#include "eurlab/operators.hpp"

namespace eurlab {

using Rng = std::mt19937_64;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Matrix of i.i.d. standard complex Gaussian entries.
Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng);

// Haar-random unitary (QR of a Ginibre matrix with phase correction).
Matrix random_unitary(Eigen::Index dim, Rng& rng);

// Haar-random unit vector.
Eigen::VectorXcd random_pure_state(Eigen::Index dim, Rng& rng);

// Hilbert-Schmidt random density matrix of the given rank (0 = full rank).
Matrix random_density(Eigen::Index dim, Rng& rng, Eigen::Index rank = 0);

// `outcomes` random PSD elements G_k G_k^dag, normalized as
// S^{-1/2} A_k S^{-1/2} so that they sum to the identity.
MatrixPovm random_povm(Eigen::Index dim, std::size_t outcomes, Rng& rng);

// Rank-one projective measurement in a Haar-random basis with
// outcomes grouped into `outcomes` contiguous blocks of basis vectors.
MatrixPovm random_projective_povm(Eigen::Index dim, std::size_t outcomes, Rng& rng);

}  // namespace eurlab
