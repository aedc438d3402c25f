#pragma once

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ivsum {

// Bad inputs caught before any work starts (manifest/config/shape problems).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failures during computation or I/O.
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename... Args>
std::string strcat(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    return os.str();
}

enum class LogLevel { error = 0, info = 1, debug = 2 };

// Level comes from IVSUM_LOG={error,info,debug}; defaults to error.
LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

template <typename... Args>
void log_info(Args&&... args) {
    if (log_level() >= LogLevel::info) log_line(LogLevel::info, strcat(args...));
}

template <typename... Args>
void log_debug(Args&&... args) {
    if (log_level() >= LogLevel::debug) log_line(LogLevel::debug, strcat(args...));
}

// splitmix64; used to derive independent rng streams from one seed.
uint64_t mix_seed(uint64_t seed, uint64_t salt);

// max(1, floor(t% of n)), nudged so exact rational boundaries (0.3 * 10 = 3)
// are not lost to binary rounding.
long top_k_count(double t_percent, long n);

// Runs fn(0..n-1); serial when threads <= 1. Callers own any ordering of
// result reduction.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace ivsum
