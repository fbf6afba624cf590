#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace emtree {

// std::mt19937_64 has a fully specified output sequence; the distributions in
// <random> do not, so bounded draws go through uniform_below instead.
using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, 64-bit.
inline constexpr std::uint64_t hash64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Unbiased draw from [0, bound) given a source of uniform 64-bit words.
template <typename Source>
std::uint64_t uniform_below(Source&& next, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t x = next();
        if (x >= threshold) {
            return x % bound;
        }
    }
}

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    return uniform_below([&rng] { return rng(); }, bound);
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

// Algorithm R. Keeps a uniform sample of min(k, seen) items from a stream of
// unknown length; draws from the rng only once the reservoir is full.
template <typename T>
class Reservoir {
public:
    Reservoir(std::size_t capacity, Rng& rng) : capacity_(capacity), rng_(&rng) { items_.reserve(capacity); }

    void offer(T item) {
        if (seen_ < capacity_) {
            items_.push_back(std::move(item));
        } else {
            const auto j = static_cast<std::size_t>(uniform_below(*rng_, seen_ + 1));
            if (j < capacity_) {
                items_[j] = std::move(item);
            }
        }
        ++seen_;
    }

    std::size_t seen() const noexcept { return seen_; }
    std::vector<T>& items() noexcept { return items_; }

private:
    std::size_t capacity_;
    Rng* rng_;
    std::size_t seen_ = 0;
    std::vector<T> items_;
};

}  // namespace emtree
