#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace certsamp {

// A bitstring of length n is stored as an integer whose binary expansion,
// most significant bit first, reads the string left to right. Character i of
// the string is qubit i, so qubit 0 is the most significant bit.

inline constexpr int kMaxBits = 62;

inline std::uint64_t qubit_mask(int num_qubits, int qubit) {
    return std::uint64_t{1} << (num_qubits - 1 - qubit);
}

inline int bit_at(std::uint64_t value, int num_bits, int position) {
    return static_cast<int>((value >> (num_bits - 1 - position)) & 1U);
}

inline int parity(std::uint64_t value) {
    return __builtin_popcountll(value) & 1;
}

std::string to_bitstring(std::uint64_t value, int num_bits);

/// Parses a '0'/'1' string. Throws std::invalid_argument on other characters
/// or when the string is longer than kMaxBits.
std::uint64_t parse_bitstring(std::string_view text);

}  // namespace certsamp
