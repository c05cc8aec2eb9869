#pragma once

#include <cstddef>
#include <string_view>

namespace smplab {

/// Emit a warning on stderr. Warnings never alter results.
void warn(std::string_view message);

/// Number of warnings emitted since process start (used by tests).
std::size_t warning_count() noexcept;

/// Silence stderr output of warnings (the counter still advances).
void set_warnings_quiet(bool quiet) noexcept;

/// Cap the worker count used by path-parallel loops; 0 means library default.
void set_max_threads(int threads) noexcept;
int max_threads() noexcept;

} // namespace smplab
