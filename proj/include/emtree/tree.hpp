#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "emtree/bitvector.hpp"
#include "emtree/clustering.hpp"
#include "emtree/random.hpp"
#include "emtree/signature.hpp"

namespace emtree {

// How seeding distributes the sample below each node's prototypes.
enum class SeedAssignment {
    nearest,  // each sample point follows its nearest prototype
    random,   // uniformly random partition (prototypes stay in their own partition)
};

struct TreeConfig {
    std::size_t order = 10;  // m, records per node
    std::size_t depth = 2;   // key-bearing levels; 1 is a flat clustering
    std::size_t max_iterations = 10;
    std::uint64_t rng_seed = 0;
    double seed_sample_fraction = 0.1;
    SeedAssignment seed_assignment = SeedAssignment::nearest;

    // Throws std::invalid_argument on order < 2, depth < 1, max_iterations < 1
    // or a sample fraction outside (0, 1].
    void validate() const;
};

// Per-dimension vote counts: +1 for a set bit, -1 for a clear bit. Storage is
// allocated on the first add, so empty accumulators cost nothing.
class Accumulator {
public:
    void add(const BitVector& bits);
    void merge(const Accumulator& other);
    void reset() noexcept;

    std::uint64_t n_added() const noexcept { return n_added_; }
    std::span<const std::int32_t> counts() const noexcept { return counts_; }
    bool empty() const noexcept { return n_added_ == 0; }

    // Majority vote per dimension; counts[j] == 0 (including never-touched
    // dimensions) quantizes to 0.
    BitVector quantize(std::size_t dim) const;

    // Sum of Hamming distances from the added points to quantize(dim):
    // sum_j (n - |counts[j]|) / 2.
    std::uint64_t distance_to_majority(std::size_t dim) const;

    std::size_t heap_bytes() const noexcept { return counts_.capacity() * sizeof(std::int32_t); }

private:
    std::vector<std::int32_t> counts_;
    std::uint64_t n_added_ = 0;
};

struct LeafBucket {
    std::vector<std::uint32_t> members;  // indices into the clustered collection
    Accumulator acc;
    std::size_t slot = 0;  // leaf ordinal, assigned at the start of a streaming pass

    // In-memory runs fill members; streaming runs only fill acc.
    std::size_t population() const noexcept {
        return std::max<std::size_t>(members.size(), static_cast<std::size_t>(acc.n_added()));
    }
    void clear() {
        members.clear();
        acc.reset();
    }
};

struct Node;

struct Record {
    BitVector key;
    std::unique_ptr<Node> child;  // null on the leaf level
    LeafBucket bucket;            // used on the leaf level only

    Record() = default;
    explicit Record(BitVector k) : key(std::move(k)) {}
    Record(const Record& other);
    Record& operator=(const Record& other);
    Record(Record&&) noexcept = default;
    Record& operator=(Record&&) noexcept = default;
};

struct Node {
    std::vector<Record> records;

    bool leaf_level() const noexcept { return records.empty() || records.front().child == nullptr; }
};

// Number of key-bearing levels from this node down (1 for a leaf-level node).
std::size_t tree_depth(const Node& root);

// Nodes at the given 1-based level (level 1 is the root alone).
std::size_t node_count_at_level(const Node& root, std::size_t level);

// Records at the given level, i.e. clusters at that level before pruning.
std::size_t record_count_at_level(const Node& root, std::size_t level);

void for_each_leaf(Node& root, const std::function<void(Record&)>& fn);
void for_each_leaf(const Node& root, const std::function<void(const Record&)>& fn);

// Index of the record whose key is nearest to `query`; ties go to the lowest index.
std::size_t nearest_record(const Node& node, const BitVector& query);

// Nearest-key path from root to leaf record, one record index per level.
std::vector<std::size_t> nearest_path(const Node& root, const BitVector& query);

// Follows the nearest-key path and returns the leaf-level record.
Record& descend(Node& root, const BitVector& query);
const Record& descend(const Node& root, const BitVector& query);

// Number of sample points drawn for seeding: max(order, ceil(fraction * n)), capped at n.
std::size_t seed_sample_size(const TreeConfig& config, std::size_t n);

// Builds a height-balanced tree from prototypes drawn out of `sample`. Leaves start empty.
Node seed_from_sample(const TreeConfig& config, std::span<const BitVector> sample, Rng& rng);

// Draws the seed sample from X with a reservoir over X's order, then seeds.
// Throws InsufficientDataError when X has fewer than `order` points.
Node seed(const TreeConfig& config, const SignatureCollection& points);

// Clears every leaf and appends each point's index to the leaf on its nearest path.
void insert_all(Node& root, const SignatureCollection& points);

// Rebuilds leaf accumulators from members, then update_keys().
void update(Node& root, const SignatureCollection& points);

// Leaf keys <- majority of the leaf accumulator; internal keys <- majority of the
// summed accumulators below them. Leaves with no points keep their key.
void update_keys(Node& root);

// Removes every record whose subtree holds no points, bottom up. Throws
// EmptyTreeError when nothing remains.
void prune(Node& root);

// Same shape and bitwise-identical keys, compared record by record in order.
bool trees_equal(const Node& a, const Node& b);

// Mean Hamming distance from each member to its leaf key. 0 when no members.
double distortion(const Node& root, const SignatureCollection& points);

struct EmTreeResult {
    Node root;
    std::size_t iterations = 0;
    bool converged = false;
    // Distortion of each iteration's assignment measured against the keys the
    // points were routed with (entry 0 is against the seed tree).
    std::vector<double> distortion_history;
    // Distortion of the last assignment against the final keys.
    double final_distortion = 0.0;
};

// seed, then repeat { copy; insert; prune; update; compare } until the copy
// equals the previous tree or max_iterations is reached.
EmTreeResult run_emtree(const TreeConfig& config, const SignatureCollection& points);

// Dot-joined record indices from the root down to `level`.
std::string cluster_path(std::span<const std::size_t> path, std::size_t level);

// Clusters are the subtrees rooted at `level` (1..depth) that hold members.
// Throws std::out_of_range for a bad level.
Clustering extract_clustering(const Node& root, const SignatureCollection& points, std::size_t level);

}  // namespace emtree
