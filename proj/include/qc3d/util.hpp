#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qc3d {

static_assert(std::endian::native == std::endian::little,
              "binary containers are little-endian; big-endian hosts are not supported");

// Error categories, mirrored by the C API status codes and the CLI exit codes
// (input/validation problems vs. numerical failures).
enum class ErrorCode {
    invalid_argument,
    parse,
    io,
    numerical,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

// Thrown by the iterative solvers; keeps the residual history for diagnostics.
class SolveError : public Error {
  public:
    SolveError(std::string message, std::vector<double> history)
        : Error(ErrorCode::numerical, std::move(message)), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const noexcept { return history_; }

  private:
    std::vector<double> history_;
};

// SplitMix64. All randomness in the library goes through this generator so
// that fixed seeds give identical streams on every platform (the standard
// library distributions are not portable).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  private:
    std::uint64_t state_;
};

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xCBF29CE484222325ull);

// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double value);

// Runs fn(begin, end) over [0, count) split into contiguous chunks. Chunk
// boundaries depend only on (count, threads), so writes to disjoint slots
// give bit-identical results for any thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace qc3d
