#include "vcrisk/random.hpp"

#include "vcrisk/normal.hpp"

namespace vcrisk {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t derive_key(std::uint64_t seed, std::string_view purpose) noexcept {
    // FNV-1a over the tag, then avalanche with the seed.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : purpose) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return splitmix64(seed ^ splitmix64(h));
}

RandomStream RandomStream::substream(std::uint64_t child) const noexcept {
    RandomStream s(0, splitmix64(stream_ ^ splitmix64(child + 0x632BE59BD9B4E019ULL)));
    s.key_ = key_;
    return s;
}

void RandomStream::refill() noexcept {
    buffer_ = philox4x32_10({static_cast<std::uint32_t>(block_),
                             static_cast<std::uint32_t>(block_ >> 32),
                             static_cast<std::uint32_t>(stream_),
                             static_cast<std::uint32_t>(stream_ >> 32)},
                            key_);
    ++block_;
    avail_ = 4;
}

double RandomStream::normal() noexcept { return normal_quantile_fast(uniform()); }

std::uint64_t RandomStream::below(std::uint64_t n) noexcept {
    // Rejection on the top of the range keeps the result unbiased.
    constexpr std::uint64_t kMax = ~std::uint64_t{0};
    const std::uint64_t excess = (kMax % n + 1) % n;  // 2^64 mod n
    std::uint64_t x = next_u64();
    while (x > kMax - excess) {
        x = next_u64();
    }
    return x % n;
}

}  // namespace vcrisk
