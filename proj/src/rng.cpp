#include "tsns/rng.hpp"

namespace tsns
{
Rng make_stream(std::uint64_t master, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master & 0xffffffffu),
                      static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu),
                      static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}
}  // namespace tsns
