#include "emtree/tree.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace emtree {

void TreeConfig::validate() const {
    if (order < 2) {
        throw std::invalid_argument("tree order must be >= 2");
    }
    if (depth < 1) {
        throw std::invalid_argument("tree depth must be >= 1");
    }
    if (max_iterations < 1) {
        throw std::invalid_argument("max_iterations must be >= 1");
    }
    if (!(seed_sample_fraction > 0.0 && seed_sample_fraction <= 1.0)) {
        throw std::invalid_argument("seed sample fraction must be in (0, 1]");
    }
}

// ---------------------------------------------------------------------------
// Accumulator

void Accumulator::add(const BitVector& bits) {
    if (counts_.empty()) {
        counts_.assign(bits.dim(), 0);
    } else if (counts_.size() != bits.dim()) {
        throw DimensionMismatch(counts_.size(), bits.dim());
    }
    assert(n_added_ < static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()));
    const auto words = bits.words();
    std::int32_t* out = counts_.data();
    const std::size_t full = bits.dim() / 64;
    for (std::size_t w = 0; w < full; ++w) {
        const std::uint64_t word = words[w];
        std::int32_t* dst = out + w * 64;
        for (unsigned b = 0; b < 64; ++b) {
            dst[b] += static_cast<std::int32_t>(((word >> b) & 1u) << 1) - 1;
        }
    }
    for (std::size_t j = full * 64; j < bits.dim(); ++j) {
        out[j] += bits.get(j) ? 1 : -1;
    }
    ++n_added_;
}

void Accumulator::merge(const Accumulator& other) {
    if (other.n_added_ == 0) {
        return;
    }
    if (counts_.empty()) {
        counts_.assign(other.counts_.size(), 0);
    } else if (counts_.size() != other.counts_.size()) {
        throw DimensionMismatch(counts_.size(), other.counts_.size());
    }
    for (std::size_t j = 0; j < counts_.size(); ++j) {
        counts_[j] += other.counts_[j];
    }
    n_added_ += other.n_added_;
}

void Accumulator::reset() noexcept {
    std::fill(counts_.begin(), counts_.end(), 0);
    n_added_ = 0;
}

BitVector Accumulator::quantize(std::size_t dim) const {
    BitVector key(dim);
    if (counts_.empty()) {
        return key;
    }
    if (counts_.size() != dim) {
        throw DimensionMismatch(dim, counts_.size());
    }
    auto words = key.words();
    for (std::size_t j = 0; j < dim; ++j) {
        if (counts_[j] > 0) {
            words[j >> 6] |= std::uint64_t{1} << (j & 63);
        }
    }
    return key;
}

std::uint64_t Accumulator::distance_to_majority(std::size_t dim) const {
    if (n_added_ == 0) {
        return 0;
    }
    if (counts_.size() != dim) {
        throw DimensionMismatch(dim, counts_.size());
    }
    std::uint64_t total = 0;
    for (const auto c : counts_) {
        total += (n_added_ - static_cast<std::uint64_t>(std::abs(static_cast<std::int64_t>(c)))) / 2;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Structure

Record::Record(const Record& other)
    : key(other.key), child(other.child ? std::make_unique<Node>(*other.child) : nullptr), bucket(other.bucket) {}

Record& Record::operator=(const Record& other) {
    if (this != &other) {
        Record copy(other);
        *this = std::move(copy);
    }
    return *this;
}

std::size_t tree_depth(const Node& root) {
    std::size_t depth = 1;
    const Node* node = &root;
    while (!node->records.empty() && node->records.front().child) {
        node = node->records.front().child.get();
        ++depth;
    }
    return depth;
}

namespace {

template <typename Fn>
void visit_level(const Node& node, std::size_t level, std::size_t target, Fn&& fn) {
    if (level == target) {
        fn(node);
        return;
    }
    for (const auto& r : node.records) {
        if (r.child) {
            visit_level(*r.child, level + 1, target, fn);
        }
    }
}

template <typename NodeT, typename Fn>
void visit_leaves(NodeT& node, Fn&& fn) {
    for (auto& r : node.records) {
        if (r.child) {
            visit_leaves(*r.child, fn);
        } else {
            fn(r);
        }
    }
}

}  // namespace

std::size_t node_count_at_level(const Node& root, std::size_t level) {
    std::size_t count = 0;
    visit_level(root, 1, level, [&](const Node&) { ++count; });
    return count;
}

std::size_t record_count_at_level(const Node& root, std::size_t level) {
    std::size_t count = 0;
    visit_level(root, 1, level, [&](const Node& n) { count += n.records.size(); });
    return count;
}

void for_each_leaf(Node& root, const std::function<void(Record&)>& fn) { visit_leaves(root, fn); }

void for_each_leaf(const Node& root, const std::function<void(const Record&)>& fn) { visit_leaves(root, fn); }

// ---------------------------------------------------------------------------
// Search

std::size_t nearest_record(const Node& node, const BitVector& query) {
    if (node.records.empty()) {
        throw std::invalid_argument("nearest_record: node has no records");
    }
    std::size_t best = 0;
    std::size_t best_distance = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < node.records.size(); ++i) {
        const BitVector& key = node.records[i].key;
        if (key.dim() != query.dim()) {
            throw DimensionMismatch(key.dim(), query.dim());
        }
        const std::size_t d = hamming_words(key.words(), query.words());
        if (d < best_distance) {
            best_distance = d;
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> nearest_path(const Node& root, const BitVector& query) {
    std::vector<std::size_t> path;
    const Node* node = &root;
    for (;;) {
        const std::size_t i = nearest_record(*node, query);
        path.push_back(i);
        if (!node->records[i].child) {
            return path;
        }
        node = node->records[i].child.get();
    }
}

const Record& descend(const Node& root, const BitVector& query) {
    const Node* node = &root;
    for (;;) {
        const Record& r = node->records[nearest_record(*node, query)];
        if (!r.child) {
            return r;
        }
        node = r.child.get();
    }
}

Record& descend(Node& root, const BitVector& query) {
    return const_cast<Record&>(descend(static_cast<const Node&>(root), query));
}

// ---------------------------------------------------------------------------
// Seeding

std::size_t seed_sample_size(const TreeConfig& config, std::size_t n) {
    const auto wanted = static_cast<std::size_t>(std::ceil(config.seed_sample_fraction * static_cast<double>(n)));
    return std::min(n, std::max(config.order, wanted));
}

namespace {

Node build_seed_node(const TreeConfig& config, std::vector<const BitVector*> points, std::size_t level, Rng& rng) {
    // Partial Fisher-Yates picks min(m, |points|) distinct prototypes.
    const std::size_t k = std::min(config.order, points.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, points.size() - i));
        std::swap(points[i], points[j]);
    }
    Node node;
    node.records.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        node.records.emplace_back(*points[i]);
    }
    if (level == config.depth) {
        return node;
    }

    std::vector<std::vector<const BitVector*>> partitions(k);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t target = 0;
        if (config.seed_assignment == SeedAssignment::nearest) {
            target = nearest_record(node, *points[i]);
        } else {
            target = i < k ? i : static_cast<std::size_t>(uniform_below(rng, k));
        }
        partitions[target].push_back(points[i]);
    }
    for (std::size_t r = 0; r < k; ++r) {
        if (partitions[r].empty()) {
            // Duplicate prototypes can starve a partition; seed it from its own key.
            partitions[r].push_back(&node.records[r].key);
        }
        node.records[r].child = std::make_unique<Node>(build_seed_node(config, std::move(partitions[r]), level + 1, rng));
    }
    return node;
}

}  // namespace

Node seed_from_sample(const TreeConfig& config, std::span<const BitVector> sample, Rng& rng) {
    config.validate();
    if (sample.empty()) {
        throw InsufficientDataError("insufficient data for order " + std::to_string(config.order) + ": empty sample");
    }
    std::vector<const BitVector*> points;
    points.reserve(sample.size());
    for (const auto& s : sample) {
        points.push_back(&s);
    }
    return build_seed_node(config, std::move(points), 1, rng);
}

Node seed(const TreeConfig& config, const SignatureCollection& points) {
    config.validate();
    const std::size_t n = points.size();
    if (n < config.order) {
        throw InsufficientDataError("insufficient data for order " + std::to_string(config.order) + ": " +
                                    std::to_string(n) + " points");
    }
    Rng rng(config.rng_seed);
    Reservoir<std::size_t> reservoir(seed_sample_size(config, n), rng);
    for (std::size_t i = 0; i < n; ++i) {
        reservoir.offer(i);
    }
    std::vector<BitVector> sample;
    sample.reserve(reservoir.items().size());
    for (const auto i : reservoir.items()) {
        sample.push_back(points.signatures[i].bits);
    }
    return seed_from_sample(config, sample, rng);
}

// ---------------------------------------------------------------------------
// EM steps

void insert_all(Node& root, const SignatureCollection& points) {
    if (points.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw std::length_error("insert_all: more than 2^32 points");
    }
    for_each_leaf(root, [](Record& r) { r.bucket.clear(); });
    for (std::size_t i = 0; i < points.size(); ++i) {
        descend(root, points.signatures[i].bits).bucket.members.push_back(static_cast<std::uint32_t>(i));
    }
}

namespace {

// Returns the accumulated votes of everything below `node` and refreshes keys.
Accumulator update_node(Node& node) {
    Accumulator total;
    for (auto& r : node.records) {
        if (r.child) {
            Accumulator below = update_node(*r.child);
            if (!below.empty()) {
                r.key = below.quantize(r.key.dim());
            }
            total.merge(below);
        } else {
            if (!r.bucket.acc.empty()) {
                r.key = r.bucket.acc.quantize(r.key.dim());
            }
            total.merge(r.bucket.acc);
        }
    }
    return total;
}

// Drops empty records; returns the number of points left under `node`.
std::size_t prune_node(Node& node) {
    std::size_t total = 0;
    std::erase_if(node.records, [&](Record& r) {
        const std::size_t population = r.child ? prune_node(*r.child) : r.bucket.population();
        total += population;
        return population == 0;
    });
    return total;
}

}  // namespace

void update(Node& root, const SignatureCollection& points) {
    for_each_leaf(root, [&](Record& r) {
        r.bucket.acc.reset();
        for (const auto i : r.bucket.members) {
            r.bucket.acc.add(points.signatures[i].bits);
        }
    });
    update_keys(root);
}

void update_keys(Node& root) { update_node(root); }

void prune(Node& root) {
    prune_node(root);
    if (root.records.empty()) {
        throw EmptyTreeError();
    }
}

bool trees_equal(const Node& a, const Node& b) {
    if (a.records.size() != b.records.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const Record& ra = a.records[i];
        const Record& rb = b.records[i];
        if (ra.key != rb.key || static_cast<bool>(ra.child) != static_cast<bool>(rb.child)) {
            return false;
        }
        if (ra.child && !trees_equal(*ra.child, *rb.child)) {
            return false;
        }
    }
    return true;
}

double distortion(const Node& root, const SignatureCollection& points) {
    std::uint64_t total = 0;
    std::uint64_t count = 0;
    for_each_leaf(root, [&](const Record& r) {
        for (const auto i : r.bucket.members) {
            total += hamming(r.key, points.signatures[i].bits);
            ++count;
        }
    });
    return count == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(count);
}

EmTreeResult run_emtree(const TreeConfig& config, const SignatureCollection& points) {
    EmTreeResult result;
    Node root = seed(config, points);
    while (result.iterations < config.max_iterations) {
        Node next = root;
        insert_all(next, points);
        result.distortion_history.push_back(distortion(next, points));
        prune(next);
        update(next, points);
        ++result.iterations;
        const bool same = trees_equal(root, next);
        root = std::move(next);
        if (same) {
            result.converged = true;
            break;
        }
    }
    result.final_distortion = distortion(root, points);
    result.root = std::move(root);
    return result;
}

// ---------------------------------------------------------------------------
// Clusterings

std::string cluster_path(std::span<const std::size_t> path, std::size_t level) {
    std::string id;
    for (std::size_t i = 0; i < level && i < path.size(); ++i) {
        if (i > 0) {
            id.push_back('.');
        }
        id += std::to_string(path[i]);
    }
    return id;
}

namespace {

void collect_members(const Node& node, std::vector<std::size_t>& path, std::size_t level, const SignatureCollection& points,
                     Clustering& out) {
    for (std::size_t i = 0; i < node.records.size(); ++i) {
        path.push_back(i);
        const Record& r = node.records[i];
        if (r.child) {
            collect_members(*r.child, path, level, points, out);
        } else if (!r.bucket.members.empty()) {
            auto& cluster = out.clusters[cluster_path(path, level)];
            for (const auto m : r.bucket.members) {
                cluster.push_back(points.signatures[m].doc_id);
            }
        }
        path.pop_back();
    }
}

}  // namespace

Clustering extract_clustering(const Node& root, const SignatureCollection& points, std::size_t level) {
    const std::size_t depth = tree_depth(root);
    if (level < 1 || level > depth) {
        throw std::out_of_range("cluster level " + std::to_string(level) + " outside 1.." + std::to_string(depth));
    }
    Clustering out;
    std::vector<std::size_t> path;
    collect_members(root, path, level, points, out);
    out.normalize();
    return out;
}

}  // namespace emtree
