#pragma once

#include <cstdint>
#include <vector>

namespace smplab {

/// Brownian increments dW^m_k for M paths, n_t steps and K modes. Each
/// increment is a pure function of (seed, path, step, mode), so any subset
/// can be regenerated bit-exactly; the ensemble caches all of them.
class PathEnsemble {
public:
    PathEnsemble() = default;
    PathEnsemble(std::uint64_t seed, std::size_t paths, std::size_t n_t, std::size_t K, double dt);

    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t paths() const noexcept { return paths_; }
    std::size_t n_t() const noexcept { return n_t_; }
    std::size_t K() const noexcept { return K_; }
    double dt() const noexcept { return dt_; }

    double dW(std::size_t step, std::size_t path, std::size_t mode) const noexcept
    {
        return dw_[(step * paths_ + path) * K_ + mode];
    }
    /// Row-major paths x K block of step k.
    const double* step(std::size_t k) const noexcept { return dw_.data() + k * paths_ * K_; }

    /// A standard normal draw addressed by its counter.
    static double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t mode) noexcept;

    /// Copy with every increment set to zero (scheme-reduction checks).
    PathEnsemble zeroed() const;

private:
    std::uint64_t seed_ = 0;
    std::size_t paths_ = 0;
    std::size_t n_t_ = 0;
    std::size_t K_ = 0;
    double dt_ = 0.0;
    std::vector<double> dw_;
};

} // namespace smplab
