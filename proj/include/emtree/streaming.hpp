#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "emtree/signature.hpp"
#include "emtree/tree.hpp"

namespace emtree {

inline constexpr std::size_t kDefaultBatchSize = 1024;

// Tree whose leaves hold accumulators only; points are never retained.
struct StreamingTree {
    TreeConfig config;
    Node root;
    std::size_t dim = 0;
    std::uint64_t bytes_per_pass = 0;  // signature payload bytes read by the last pass
};

struct PassStats {
    std::uint64_t points = 0;
    // Mean distance from each point to the leaf key it was routed to, measured
    // before the keys are updated.
    double distortion = 0.0;
    double seconds = 0.0;
};

struct RunStats {
    std::size_t iterations_run = 0;
    bool converged = false;
    std::size_t workers = 1;
    std::uint64_t points = 0;
    std::vector<double> distortion;  // one entry per pass
    double final_distortion = 0.0;   // last pass against the updated keys
    std::size_t clusters = 0;        // leaves after the last prune
    double seconds_seed = 0.0;
    double seconds_insert = 0.0;
    double seconds_update = 0.0;
    double seconds_prune = 0.0;
};

// Routes every signature from `source` to its nearest leaf and adds its bits to
// that leaf's accumulator. Accumulators are reset first; keys are not touched.
// One reader thread feeds batches to `workers` threads; each leaf accumulator
// is guarded by its own mutex.
PassStats insert_pass(StreamingTree& tree, SignatureSource& source, std::size_t workers,
                      std::size_t batch_size = kDefaultBatchSize);

// insert_pass, then update_keys and prune. Throws EmptyTreeError if the stream
// was empty.
PassStats streaming_iteration(StreamingTree& tree, SignatureSource& source, std::size_t workers,
                              std::size_t batch_size = kDefaultBatchSize);

// Reservoir-samples the seed on a preliminary pass, then iterates until the
// tree stops changing or config.max_iterations passes have run.
std::pair<StreamingTree, RunStats> streaming_emtree(const TreeConfig& config, SignatureSource& source,
                                                    std::size_t workers);

// Bytes held by keys and leaf accumulators: the state a streaming pass keeps
// resident. Does not grow with the number of points streamed.
std::size_t tree_state_bytes(const Node& root);

// Writes "doc_id<TAB>cluster_path" for every signature in the source, using
// the nearest-key path truncated to `level`. Returns the number of lines.
std::uint64_t assign_pass(const Node& root, SignatureSource& source, std::size_t level, std::ostream& sink);

struct ThroughputSample {
    std::size_t workers = 0;
    std::uint64_t points = 0;
    double seconds = 0.0;  // best of the repeats
    double docs_per_second = 0.0;
};

// Seeds one tree from `source`, then times insert_pass for each worker count.
std::vector<ThroughputSample> benchmark_insertion(const TreeConfig& config, SignatureSource& source,
                                                  const std::vector<std::size_t>& worker_counts,
                                                  std::size_t repeats = 1);

// key=value lines.
void write_run_report(const RunStats& stats, std::ostream& out);

}  // namespace emtree
