#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace shapfed {

// Error taxonomy used across the library. The CLI maps ConfigError to
// exit code 2 and everything else to exit code 1.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Derives an independent sub-stream seed from a master seed and up to two
// stream tags (splitmix64 finalizer). Results never depend on scheduling,
// which keeps multi-worker runs bit-identical to serial ones.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Formats with 17 significant digits so the text round-trips to the same
// double.
std::string format_double(double v);

// Runs fn(0..count-1) on up to `workers` threads. Tasks must write only to
// their own slot; completion order is irrelevant to the result. workers <= 1
// runs inline.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace shapfed
