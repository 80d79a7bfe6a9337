#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "certsamp/bits.h"

namespace certsamp {

inline constexpr double kNormTolerance = 1e-9;

/// Probability mass over n-bit strings, stored sparsely (zero masses dropped).
class Distribution {
   public:
    /// Validates n, key ranges, non-negativity and sum = 1 within kNormTolerance.
    Distribution(int num_bits, std::map<std::uint64_t, double> mass);

    static Distribution point(int num_bits, std::uint64_t x);
    static Distribution uniform(int num_bits);
    /// Dense probability vector of length 2^n. Entries must sum to 1.
    static Distribution from_dense(int num_bits, std::span<const double> probs);
    /// Relative frequencies of `samples`. Throws on an empty sample list.
    static Distribution empirical(int num_bits, std::span<const std::uint64_t> samples);

    int num_bits() const {
        return num_bits_;
    }
    double operator()(std::uint64_t x) const;
    const std::map<std::uint64_t, double> &mass() const {
        return mass_;
    }
    std::vector<double> dense() const;

    bool operator==(const Distribution &other) const = default;

   private:
    int num_bits_;
    std::map<std::uint64_t, double> mass_;
};

/// Σ_x √(P(x)Q(x)), the Bhattacharyya coefficient; equals 1 - d_H².
double bhattacharyya(const Distribution &p, const Distribution &q);

/// d_H(P,Q) = ‖√P − √Q‖₂ / √2. Computed from the square-root vectors
/// directly, not through the Bhattacharyya identity.
double hellinger(const Distribution &p, const Distribution &q);

/// ½‖P − Q‖₁.
double total_variation(const Distribution &p, const Distribution &q);

/// SWAP-test acceptance probability of two amplitude-encoded distributions
/// as a function of their Hellinger distance x: ½(1 + (1 − x²)²).
/// Strictly decreasing on [0, 1]; maps [0, 1] onto [½, 1].
double swap_accept_from_hellinger(double x);

/// Inverse of swap_accept_from_hellinger on [½, 1]: √(1 − √(2y − 1)).
double hellinger_from_swap_accept(double y);

enum class FDirection { kForward, kInverse };
inline double f_map(double x, FDirection direction) {
    return direction == FDirection::kForward ? swap_accept_from_hellinger(x) : hellinger_from_swap_accept(x);
}

/// Pointwise convex combination Σ wᵢ Dᵢ. Weights must be non-negative and sum
/// to 1 within kNormTolerance; all components must share n.
Distribution mix(std::span<const std::pair<double, Distribution>> components);

/// A distribution at Hellinger distance `target` from `base`, found on the
/// segment between `base` and the point mass on base's least likely string.
/// Throws if `target` exceeds the distance to that point mass.
Distribution toward_distance(const Distribution &base, double target);

void to_json(nlohmann::json &j, const Distribution &d);
void from_json(const nlohmann::json &j, Distribution &d);
Distribution distribution_from_json(const nlohmann::json &j);

}  // namespace certsamp
