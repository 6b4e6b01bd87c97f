#ifndef AFC_RNG_HPP
#define AFC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace afc {

// mt19937_64 with hand-rolled variate transforms. The standard distribution
// adapters are implementation-defined, which would break the same-seed ->
// byte-identical-trace contract across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // [0, 1) with 53 random bits
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

    uint64_t below(uint64_t n) { return n == 0 ? 0 : gen_() % n; }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    // Geometric on {1, 2, ...} with the given mean.
    uint64_t geometric(double mean)
    {
        if (mean <= 1.0)
            return 1;
        double p = 1.0 / mean;
        double u = uniform();
        double k = 1.0 + std::floor(std::log1p(-u) / std::log1p(-p));
        if (!(k >= 1.0))
            return 1;
        if (k > 1e6)
            return 1000000;
        return uint64_t(k);
    }

    template <class T> void shuffle(std::vector<T>& v)
    {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace afc

#endif
