#ifndef AFC_HASH_HPP
#define AFC_HASH_HPP

#include <cstdint>

namespace afc {

// Finalizer from splitmix64; full avalanche on 64 bits.
inline uint64_t mix64(uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Keyed hash of a small packed value. One call per observation; stage
// indices are derived from the result with per-stage salts.
inline uint64_t keyed_hash(uint64_t packed, uint64_t seed)
{
    return mix64(packed ^ mix64(seed));
}

} // namespace afc

#endif
