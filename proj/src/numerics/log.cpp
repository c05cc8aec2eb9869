#include "smplab/log.hpp"

#include <atomic>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace smplab {

namespace {
std::atomic<std::size_t> g_warnings{0};
std::atomic<bool> g_quiet{false};
std::atomic<int> g_threads{0};
} // namespace

void warn(std::string_view message)
{
    ++g_warnings;
    if (!g_quiet.load()) {
        std::cerr << "[smplab] warning: " << message << '\n';
    }
}

std::size_t warning_count() noexcept { return g_warnings.load(); }

void set_warnings_quiet(bool quiet) noexcept { g_quiet.store(quiet); }

void set_max_threads(int threads) noexcept
{
    g_threads.store(threads);
#ifdef _OPENMP
    if (threads > 0) {
        omp_set_num_threads(threads);
    }
#endif
}

int max_threads() noexcept
{
#ifdef _OPENMP
    int t = g_threads.load();
    return t > 0 ? t : omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace smplab
