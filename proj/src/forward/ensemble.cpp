#include "smplab/forward/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smplab/error.hpp"

namespace smplab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform on (0, 1) from the top 53 bits.
double to_open_unit(std::uint64_t z) noexcept
{
    return (static_cast<double>(z >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

} // namespace

double PathEnsemble::standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                                     std::uint64_t mode) noexcept
{
    std::uint64_t z = splitmix64(seed);
    z = splitmix64(z ^ path);
    z = splitmix64(z ^ (step * 0x100000001b3ULL));
    z = splitmix64(z ^ mode);
    const double u1 = to_open_unit(z);
    const double u2 = to_open_unit(splitmix64(z));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

PathEnsemble::PathEnsemble(std::uint64_t seed, std::size_t paths, std::size_t n_t, std::size_t K, double dt)
    : seed_(seed), paths_(paths), n_t_(n_t), K_(K), dt_(dt)
{
    if (paths == 0 || n_t == 0 || K == 0 || !(dt > 0.0)) {
        throw ValidationError("ensemble.shape", "ensemble needs paths, steps and modes > 0 and dt > 0");
    }
    dw_.resize(paths * n_t * K);
    const double sd = std::sqrt(dt);
    for (std::size_t k = 0; k < n_t; ++k) {
        for (std::size_t p = 0; p < paths; ++p) {
            for (std::size_t m = 0; m < K; ++m) {
                dw_[(k * paths + p) * K + m] = sd * standard_normal(seed, p, k, m);
            }
        }
    }
}

PathEnsemble PathEnsemble::zeroed() const
{
    PathEnsemble z = *this;
    std::fill(z.dw_.begin(), z.dw_.end(), 0.0);
    return z;
}

} // namespace smplab
