#include "emtree/streaming.hpp"

#include <charconv>
#include <chrono>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "batch_queue.hpp"

namespace emtree {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Keys and shape only; leaf buckets are left empty.
Node copy_keys(const Node& node) {
    Node out;
    out.records.reserve(node.records.size());
    for (const auto& r : node.records) {
        Record& c = out.records.emplace_back(r.key);
        if (r.child) {
            c.child = std::make_unique<Node>(copy_keys(*r.child));
        }
    }
    return out;
}

using Batch = std::vector<Signature>;

// Shortest text that reads back to the same double.
std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Reservoir-samples the seed set on one pass over the source, then seeds.
Node seed_from_source(const TreeConfig& config, SignatureSource& source) {
    const std::uint64_t n = source.size();
    if (n < config.order) {
        throw InsufficientDataError("insufficient data for order " + std::to_string(config.order) + ": " +
                                    std::to_string(n) + " points");
    }
    Rng rng(config.rng_seed);
    Reservoir<BitVector> reservoir(seed_sample_size(config, static_cast<std::size_t>(n)), rng);
    source.rewind();
    Batch batch;
    while (source.next_batch(batch, kDefaultBatchSize) > 0) {
        for (auto& s : batch) {
            reservoir.offer(std::move(s.bits));
        }
    }
    if (reservoir.seen() < config.order) {
        throw InsufficientDataError("insufficient data for order " + std::to_string(config.order) + ": stream held " +
                                    std::to_string(reservoir.seen()) + " points");
    }
    return seed_from_sample(config, reservoir.items(), rng);
}

}  // namespace

PassStats insert_pass(StreamingTree& tree, SignatureSource& source, std::size_t workers, std::size_t batch_size) {
    if (workers < 1) {
        throw std::invalid_argument("worker count must be >= 1");
    }
    if (source.dim() != tree.dim) {
        throw DimensionMismatch(tree.dim, source.dim());
    }
    const auto start = Clock::now();

    std::vector<Record*> leaves;
    for_each_leaf(tree.root, [&](Record& r) {
        r.bucket.clear();
        r.bucket.slot = leaves.size();
        leaves.push_back(&r);
    });
    std::vector<std::mutex> leaf_locks(leaves.size());

    detail::BatchQueue<Batch> queue(2 * workers);
    std::vector<std::uint64_t> distance_sums(workers, 0);
    std::vector<std::uint64_t> point_counts(workers, 0);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto record_failure = [&] {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
            failure = std::current_exception();
        }
        queue.close();
    };

    // The tree's keys and shape are read-only for the whole pass.
    const Node& keys = tree.root;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                while (auto batch = queue.pop()) {
                    for (const auto& s : *batch) {
                        const Record& leaf = descend(keys, s.bits);
                        distance_sums[w] += hamming_words(leaf.key.words(), s.bits.words());
                        Record& target = *leaves[leaf.bucket.slot];
                        std::lock_guard lock(leaf_locks[leaf.bucket.slot]);
                        target.bucket.acc.add(s.bits);
                    }
                    point_counts[w] += batch->size();
                }
            } catch (...) {
                record_failure();
            }
        });
    }

    std::uint64_t payload_bytes = 0;
    try {
        source.rewind();
        for (;;) {
            Batch batch;
            if (source.next_batch(batch, batch_size) == 0) {
                break;
            }
            for (const auto& s : batch) {
                payload_bytes += s.doc_id.size() + s.bits.word_count() * 8;
            }
            if (!queue.push(std::move(batch))) {
                break;
            }
        }
    } catch (...) {
        record_failure();
    }
    queue.close();
    for (auto& t : threads) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    PassStats stats;
    std::uint64_t distance_total = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        stats.points += point_counts[w];
        distance_total += distance_sums[w];
    }
    stats.distortion =
        stats.points == 0 ? 0.0 : static_cast<double>(distance_total) / static_cast<double>(stats.points);
    stats.seconds = seconds_since(start);
    tree.bytes_per_pass = payload_bytes;
    return stats;
}

PassStats streaming_iteration(StreamingTree& tree, SignatureSource& source, std::size_t workers,
                              std::size_t batch_size) {
    PassStats stats = insert_pass(tree, source, workers, batch_size);
    update_keys(tree.root);
    prune(tree.root);
    return stats;
}

std::pair<StreamingTree, RunStats> streaming_emtree(const TreeConfig& config, SignatureSource& source,
                                                    std::size_t workers) {
    config.validate();
    if (workers < 1) {
        throw std::invalid_argument("worker count must be >= 1");
    }
    RunStats stats;
    stats.workers = workers;

    StreamingTree tree;
    tree.config = config;
    tree.dim = source.dim();

    auto phase = Clock::now();
    tree.root = seed_from_source(config, source);
    stats.seconds_seed = seconds_since(phase);

    while (stats.iterations_run < config.max_iterations) {
        const Node previous = copy_keys(tree.root);

        const PassStats pass = insert_pass(tree, source, workers);
        stats.seconds_insert += pass.seconds;
        stats.distortion.push_back(pass.distortion);
        stats.points = pass.points;

        phase = Clock::now();
        update_keys(tree.root);
        stats.seconds_update += seconds_since(phase);

        phase = Clock::now();
        prune(tree.root);
        stats.seconds_prune += seconds_since(phase);

        ++stats.iterations_run;
        if (trees_equal(previous, tree.root)) {
            stats.converged = true;
            break;
        }
    }

    std::uint64_t distance = 0;
    for_each_leaf(tree.root, [&](const Record& r) {
        distance += r.bucket.acc.distance_to_majority(tree.dim);
        ++stats.clusters;
    });
    stats.final_distortion =
        stats.points == 0 ? 0.0 : static_cast<double>(distance) / static_cast<double>(stats.points);
    return {std::move(tree), std::move(stats)};
}

std::vector<ThroughputSample> benchmark_insertion(const TreeConfig& config, SignatureSource& source,
                                                  const std::vector<std::size_t>& worker_counts,
                                                  std::size_t repeats) {
    config.validate();
    StreamingTree tree;
    tree.config = config;
    tree.dim = source.dim();
    tree.root = seed_from_source(config, source);
    std::vector<ThroughputSample> rows;
    for (const auto workers : worker_counts) {
        ThroughputSample row;
        row.workers = workers;
        for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
            const PassStats pass = insert_pass(tree, source, workers);
            if (r == 0 || pass.seconds < row.seconds) {
                row.seconds = pass.seconds;
            }
            row.points = pass.points;
        }
        row.docs_per_second = row.seconds > 0.0 ? static_cast<double>(row.points) / row.seconds : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::size_t tree_state_bytes(const Node& root) {
    std::size_t bytes = 0;
    for (const auto& r : root.records) {
        bytes += r.key.word_count() * sizeof(std::uint64_t) + r.bucket.acc.heap_bytes();
        if (r.child) {
            bytes += tree_state_bytes(*r.child);
        }
    }
    return bytes;
}

std::uint64_t assign_pass(const Node& root, SignatureSource& source, std::size_t level, std::ostream& sink) {
    const std::size_t depth = tree_depth(root);
    if (level < 1 || level > depth) {
        throw std::out_of_range("cluster level " + std::to_string(level) + " outside 1.." + std::to_string(depth));
    }
    if (!root.records.empty() && root.records.front().key.dim() != source.dim()) {
        throw DimensionMismatch(root.records.front().key.dim(), source.dim());
    }
    std::uint64_t lines = 0;
    source.rewind();
    Batch batch;
    while (source.next_batch(batch, kDefaultBatchSize) > 0) {
        for (const auto& s : batch) {
            const auto path = nearest_path(root, s.bits);
            sink << s.doc_id << '\t' << cluster_path(path, level) << '\n';
            ++lines;
        }
        if (!sink) {
            throw IoError("assignment output: write failed after document " + std::to_string(lines));
        }
    }
    return lines;
}

void write_run_report(const RunStats& stats, std::ostream& out) {
    const auto flags = out.flags();
    out << "iterations_run=" << stats.iterations_run << '\n';
    out << "converged=" << (stats.converged ? "true" : "false") << '\n';
    out << "workers=" << stats.workers << '\n';
    out << "points=" << stats.points << '\n';
    out << "clusters=" << stats.clusters << '\n';
    out << "distortion=";
    for (std::size_t i = 0; i < stats.distortion.size(); ++i) {
        out << (i ? "," : "") << shortest(stats.distortion[i]);
    }
    out << '\n';
    out << "final_distortion=" << shortest(stats.final_distortion) << '\n';
    out << std::fixed << std::setprecision(6);
    out << "seconds_seed=" << stats.seconds_seed << '\n';
    out << "seconds_insert=" << stats.seconds_insert << '\n';
    out << "seconds_update=" << stats.seconds_update << '\n';
    out << "seconds_prune=" << stats.seconds_prune << '\n';
    out.flags(flags);
}

}  // namespace emtree
