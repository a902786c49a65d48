#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace sigdeg::stoch {

/// Philox4x32-10 counter-based generator.
///
/// The key is the 64-bit seed, the upper half of the 128-bit counter is the
/// stream id and the lower half counts blocks. Two generators with the same
/// (seed, stream) produce identical sequences; distinct streams never share a
/// counter value. Satisfies UniformRandomBitGenerator for 64-bit output.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Independent generator with the same seed on another stream.
    Rng fork(std::uint64_t stream) const { return Rng(seed_, stream); }

    /// Raw Philox4x32-10 block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                     std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stable stream id for a named purpose and up to two indices
/// (e.g. purpose="teacher.batch", a=epoch, b=batch).
std::uint64_t stream_id(std::string_view purpose, std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace sigdeg::stoch
