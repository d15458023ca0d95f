#ifndef RQPD_SAMPLING_HPP
#define RQPD_SAMPLING_HPP

#include <cstdint>
#include <random>

#include "rqpd/matrix.hpp"

namespace rqpd {

// Deterministic per-sample stream: the engine derives one generator per
// (seed, index) pair so parallel evaluation order cannot change results.
std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t index);

Mat haar_pure(int d, std::mt19937_64& rng);          // |v><v|
Mat haar_ket(int d, std::mt19937_64& rng);           // column vector
Mat random_density_matrix(int d, std::mt19937_64& rng);
Mat random_unitary_matrix(int d, std::mt19937_64& rng);
Mat random_hermitian_matrix(int d, std::mt19937_64& rng);

}  // namespace rqpd

#endif
