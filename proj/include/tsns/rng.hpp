#pragma once

#include <cstdint>
#include <random>

namespace tsns
{
using Rng = std::mt19937_64;

/*!
 * Independent generator for (master seed, stream id).
 *
 * The engine is seeded through std::seed_seq with the four 32-bit halves of
 * the two inputs, low word first. Both std::seed_seq and mt19937_64 are fully
 * specified by the standard, so a stream is identical on every platform and
 * does not depend on which thread draws from it.
 */
Rng make_stream(std::uint64_t master, std::uint64_t stream);

//! Stream ids used by the experiments; replica i uses base + i
namespace streams
{
inline constexpr std::uint64_t initial_condition = 0x1000'0000ULL;
inline constexpr std::uint64_t direction = 0x1000'0001ULL;
inline constexpr std::uint64_t replicas = 0x2000'0000ULL;
inline constexpr std::uint64_t trials = 0x3000'0000ULL;
}  // namespace streams
}  // namespace tsns
