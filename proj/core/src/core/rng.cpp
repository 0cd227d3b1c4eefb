#include "promptforge/core/rng.hpp"

#include <cassert>

namespace promptforge {

namespace {
__extension__ typedef unsigned __int128 uint128;
}

std::size_t Rng::uniform_index(std::size_t n) {
    assert(n > 0);
    // Lemire's nearly-divisionless rejection method.
    const auto range = static_cast<std::uint64_t>(n);
    auto product = static_cast<uint128>(engine_()) * range;
    auto low = static_cast<std::uint64_t>(product);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            product = static_cast<uint128>(engine_()) * range;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::size_t>(product >> 64);
}

Rng Rng::fork(std::uint64_t stream) const {
    return Rng(mix64(seed_ ^ mix64(stream + 0x632be59bd9b4e019ULL)));
}

} // namespace promptforge
