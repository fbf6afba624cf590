#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "emtree/bitvector.hpp"
#include "emtree/random.hpp"
#include "emtree/signature.hpp"

namespace emtree::test {

inline BitVector random_bits(std::size_t dim, Rng& rng) {
    BitVector v(dim);
    for (auto& w : v.words()) {
        w = rng();
    }
    if (dim % 64 != 0) {
        v.words().back() &= (std::uint64_t{1} << (dim % 64)) - 1;
    }
    return v;
}

// Flips exactly `count` distinct positions of `center`.
inline BitVector flip_distinct(const BitVector& center, std::size_t count, Rng& rng) {
    std::vector<std::size_t> positions(center.dim());
    for (std::size_t j = 0; j < positions.size(); ++j) {
        positions[j] = j;
    }
    BitVector out = center;
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, positions.size() - i));
        std::swap(positions[i], positions[j]);
        out.flip(positions[i]);
    }
    return out;
}

inline SignatureCollection random_collection(std::size_t n, std::size_t dim, std::uint64_t seed) {
    SignatureCollection c;
    c.spec.dim = dim;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        c.add({"d" + std::to_string(i), random_bits(dim, rng)});
    }
    return c;
}

struct Planted {
    SignatureCollection points;
    std::vector<BitVector> centers;
    std::vector<std::size_t> label;  // per point
};

// Points are drawn round-robin from `clusters` Hamming balls: each point is its
// center with a uniformly chosen number of bits in [0, radius] flipped.
inline Planted planted_balls(std::size_t n, std::size_t clusters, std::size_t dim, std::size_t radius,
                             std::uint64_t seed) {
    Planted p;
    p.points.spec.dim = dim;
    Rng rng(seed);
    for (std::size_t k = 0; k < clusters; ++k) {
        p.centers.push_back(random_bits(dim, rng));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i % clusters;
        const auto flips = static_cast<std::size_t>(uniform_below(rng, radius + 1));
        p.points.add({"p" + std::to_string(i), flip_distinct(p.centers[k], flips, rng)});
        p.label.push_back(k);
    }
    return p;
}

class TempDir {
public:
    TempDir() {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("emtree_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ignored;
        std::filesystem::remove_all(path_, ignored);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
}

}  // namespace emtree::test

namespace emtree::test {

struct CorpusShape {
    std::size_t vocab = 4000;
    std::size_t topic_terms = 200;
    std::size_t min_length = 50;  // tokens
    std::size_t max_length = 400;
};

// Bag-of-words documents mixing 1-3 topics. Each topic favours its own slice of
// the vocabulary with Zipf-like weights; 10% of tokens are background noise.
inline std::vector<std::vector<std::string>> topic_corpus(std::size_t docs, std::size_t topics, std::uint64_t seed,
                                                          const CorpusShape& shape = {}) {
    const std::size_t vocab = shape.vocab;
    const std::size_t topic_terms = shape.topic_terms;
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> topic_vocab(topics);
    for (auto& t : topic_vocab) {
        for (std::size_t i = 0; i < topic_terms; ++i) {
            t.push_back(static_cast<std::size_t>(uniform_below(rng, vocab)));
        }
    }
    // Cumulative Zipf weights over a topic's term list.
    std::vector<double> cumulative;
    double total = 0.0;
    for (std::size_t r = 1; r <= topic_terms; ++r) {
        total += 1.0 / static_cast<double>(r);
        cumulative.push_back(total);
    }
    const auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<std::vector<std::string>> corpus;
    for (std::size_t d = 0; d < docs; ++d) {
        const std::size_t mix = 1 + static_cast<std::size_t>(uniform_below(rng, 3));
        std::vector<std::size_t> chosen;
        for (std::size_t i = 0; i < mix; ++i) {
            chosen.push_back(static_cast<std::size_t>(uniform_below(rng, topics)));
        }
        const std::size_t length =
            shape.min_length + static_cast<std::size_t>(uniform_below(rng, shape.max_length - shape.min_length + 1));
        std::vector<std::string> tokens;
        for (std::size_t i = 0; i < length; ++i) {
            std::size_t term = 0;
            if (uniform_below(rng, 10) == 0) {
                term = static_cast<std::size_t>(uniform_below(rng, vocab));
            } else {
                const auto& t = topic_vocab[chosen[uniform_below(rng, chosen.size())]];
                const double u = unit() * total;
                const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
                term = t[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), topic_terms - 1)];
            }
            tokens.push_back("w" + std::to_string(term));
        }
        corpus.push_back(std::move(tokens));
    }
    return corpus;
}

}  // namespace emtree::test
