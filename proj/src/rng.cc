#include "certsamp/rng.h"

#include <stdexcept>

namespace certsamp {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : key_(mix64(seed + kGolden)) {
}

RngStream RngStream::substream(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t k = mix64(key_ ^ mix64(a * kGolden + 0x632BE59BD9B4E019ULL));
    k = mix64(k ^ mix64((b + 1) * 0xD1B54A32D192ED03ULL));
    return RngStream(k, 0);
}

std::uint64_t RngStream::next_u64() {
    std::uint64_t c = counter_++;
    return mix64(key_ ^ mix64(c * kGolden + 1));
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("RngStream::below: n must be positive");
    }
    // Lemire's multiply-shift with rejection; exact for every n.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

int RngStream::bit() {
    return static_cast<int>(next_u64() >> 63);
}

}  // namespace certsamp
