#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emtree/error.hpp"

namespace emtree {

// Fixed-width bit vector packed into 64-bit words. Bit j lives in bit (j % 64)
// of word j / 64. Trailing bits past dim() in the last word are always zero.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t dim) : dim_(dim), words_((dim + 63) / 64, 0) {}
    BitVector(std::size_t dim, std::vector<std::uint64_t> words);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t word_count() const noexcept { return words_.size(); }
    std::span<const std::uint64_t> words() const noexcept { return words_; }
    std::span<std::uint64_t> words() noexcept { return words_; }

    bool get(std::size_t j) const noexcept {
        assert(j < dim_);
        return (words_[j >> 6] >> (j & 63)) & 1u;
    }
    void set(std::size_t j, bool value = true) noexcept {
        assert(j < dim_);
        const std::uint64_t mask = std::uint64_t{1} << (j & 63);
        if (value) {
            words_[j >> 6] |= mask;
        } else {
            words_[j >> 6] &= ~mask;
        }
    }
    void flip(std::size_t j) noexcept {
        assert(j < dim_);
        words_[j >> 6] ^= std::uint64_t{1} << (j & 63);
    }

    BitVector complement() const;
    std::size_t popcount() const noexcept;

    // True when no bit at or beyond dim() is set.
    bool trailing_bits_clear() const noexcept;

    friend bool operator==(const BitVector&, const BitVector&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<std::uint64_t> words_;
};

// Word-wise XOR + popcount over equal-length word spans.
inline std::size_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) noexcept {
    std::size_t distance = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        distance += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
    }
    return distance;
}

inline std::size_t hamming(const BitVector& a, const BitVector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch(a.dim(), b.dim());
    }
    return hamming_words(a.words(), b.words());
}

}  // namespace emtree
