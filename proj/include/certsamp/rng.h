#pragma once

#include <cstdint>

namespace certsamp {

/// Counter-based random stream.
///
/// Output i of a stream is a pure function of (key, i), so a stream can be
/// re-derived anywhere from the seed and the labels used to split it. Every
/// protocol round draws from `substream(round, purpose)` of its run stream,
/// which keeps transcripts reproducible regardless of evaluation order.
class RngStream {
   public:
    explicit RngStream(std::uint64_t seed);

    /// Independent child stream labelled by (a, b). Does not advance `*this`.
    RngStream substream(std::uint64_t a, std::uint64_t b = 0) const;

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    int bit();

    std::uint64_t key() const {
        return key_;
    }
    std::uint64_t position() const {
        return counter_;
    }

   private:
    RngStream(std::uint64_t key, int) : key_(key) {
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Labels for `RngStream::substream` second argument.
enum class Purpose : std::uint64_t {
    kRoundType = 1,
    kVerifierMeasurement = 2,
    kProver = 3,
    kKeyGeneration = 4,
    kChallenge = 5,
    kSelection = 6,
    kMetaRun = 7,
};

inline RngStream substream(const RngStream &parent, std::uint64_t index, Purpose purpose) {
    return parent.substream(index, static_cast<std::uint64_t>(purpose));
}

}  // namespace certsamp
