#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace vcrisk {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the output is a
/// function of (counter, key) only, which is what makes per-iteration streams
/// independent of scheduling.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Hashes a user seed together with a purpose tag into a Philox key, so that
/// different consumers of one seed (shuffles, probability draws, simulation)
/// never share random numbers.
std::uint64_t derive_key(std::uint64_t seed, std::string_view purpose) noexcept;

// Counter-based random stream. The counter is (block index, stream id); the key
// is fixed per stream family. Two streams with the same (key, stream id) yield
// identical sequences.
//
// Variate conventions (fixed for bit-reproducibility):
//   uniform(): 53 random bits from two 32-bit words, mapped to (k + 0.5) / 2^53,
//              so the result is strictly inside (0, 1).
//   normal():  inverse CDF of one uniform via normal_quantile_fast.
class RandomStream {
public:
    RandomStream(std::uint64_t key, std::uint64_t stream_id) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
          stream_(stream_id) {}

    /// Child stream with the same key and a stream id mixed from (this id, child).
    RandomStream substream(std::uint64_t child) const noexcept;

    std::uint32_t next_u32() noexcept {
        if (avail_ == 0) {
            refill();
        }
        return buffer_[4 - avail_--];
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept;

    /// Uniform integer in [0, n), unbiased. n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;

    std::uint64_t stream_id() const noexcept { return stream_; }

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int avail_ = 0;
};

/// Fisher-Yates shuffle driven by `stream`. Spelled out rather than using
/// std::shuffle, whose algorithm is unspecified across standard libraries.
template <typename T>
void shuffle(std::span<T> items, RandomStream& stream) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(stream.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace vcrisk
