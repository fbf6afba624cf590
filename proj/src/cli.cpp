#include "emtree/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <unordered_set>

#include "emtree/clustering.hpp"
#include "emtree/error.hpp"
#include "emtree/eval.hpp"
#include "emtree/signature.hpp"
#include "emtree/streaming.hpp"
#include "emtree/text.hpp"
#include "emtree/tree.hpp"
#include "emtree/tree_io.hpp"

namespace emtree {

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path + ": cannot open for writing");
    }
    return out;
}

void close_output(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) {
        throw IoError(path + ": write failed");
    }
}

struct IndexArgs {
    std::string corpus;
    std::string out;
    SignatureSpec spec;
    bool stem = false;
    std::string stopwords;
};

int cmd_index(const IndexArgs& a, std::ostream& out, std::ostream& err) {
    a.spec.validate();
    IndexOptions options;
    options.stem = a.stem;
    if (!a.stopwords.empty()) {
        options.stopwords = read_stopwords(a.stopwords);
    }
    std::ifstream in(a.corpus, std::ios::binary);
    if (!in) {
        throw IoError(a.corpus + ": cannot open corpus");
    }

    // Written beside the target and renamed on success, so a failed run never
    // leaves a plausible-looking partial file behind.
    const std::string staging = a.out + ".partial";
    std::unordered_set<std::string> seen;
    std::uint64_t skipped = 0;
    std::uint64_t written = 0;
    try {
        SignatureWriter writer(staging, a.spec.dim);
        std::string line;
        std::uint64_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty()) {
                continue;
            }
            const auto tab = line.find('\t');
            if (tab == std::string::npos || tab == 0) {
                err << a.corpus << ":" << line_no << ": skipped, expected doc_id<TAB>text\n";
                ++skipped;
                continue;
            }
            std::string doc_id = line.substr(0, tab);
            if (doc_id.size() > 0xFFFF) {
                err << a.corpus << ":" << line_no << ": skipped, doc_id longer than 65535 bytes\n";
                ++skipped;
                continue;
            }
            if (!seen.insert(doc_id).second) {
                throw DuplicateDocIdError(doc_id);
            }
            const std::string_view text(line.data() + tab + 1, line.size() - tab - 1);
            writer.write(sign_document(std::move(doc_id), text, a.spec, options));
            ++written;
        }
        if (in.bad()) {
            throw IoError(a.corpus + ": read failed at line " + std::to_string(line_no + 1));
        }
        writer.finish();
    } catch (...) {
        std::error_code ignored;
        std::filesystem::remove(staging, ignored);
        throw;
    }
    std::error_code ec;
    std::filesystem::rename(staging, a.out, ec);
    if (ec) {
        throw IoError(a.out + ": " + ec.message());
    }
    out << "indexed=" << written << "\nskipped=" << skipped << "\ndim=" << a.spec.dim << '\n';
    return kExitOk;
}

struct ClusterArgs {
    std::string sigs;
    std::string out;
    std::string report;
    TreeConfig config;
    std::size_t workers = 1;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
    FileSignatureSource source(a.sigs);
    auto [tree, stats] = streaming_emtree(a.config, source, a.workers);
    {
        auto file = open_output(a.out);
        write_tree(tree.root, a.config.order, file);
        close_output(file, a.out);
    }
    const std::string report_path = a.report.empty() ? a.out + ".report" : a.report;
    {
        auto file = open_output(report_path);
        write_run_report(stats, file);
        close_output(file, report_path);
    }
    write_run_report(stats, out);
    return kExitOk;
}

struct AssignArgs {
    std::string tree;
    std::string sigs;
    std::optional<std::size_t> level;
    std::string out;
};

int cmd_assign(const AssignArgs& a, std::ostream& out) {
    const TreeFile tree = read_tree(a.tree);
    FileSignatureSource source(a.sigs);
    if (source.dim() != tree.dim) {
        throw DataError("signature width " + std::to_string(source.dim()) + " does not match tree width " +
                        std::to_string(tree.dim));
    }
    const std::size_t level = a.level.value_or(tree_depth(tree.root));
    auto file = open_output(a.out);
    const auto lines = assign_pass(tree.root, source, level, file);
    close_output(file, a.out);
    out << "assigned=" << lines << "\nlevel=" << level << '\n';
    return kExitOk;
}

void write_curve_file(const Curve& curve, const std::string& path) {
    auto file = open_output(path);
    write_curve_csv(curve, file);
    close_output(file, path);
}

struct RecallArgs {
    std::string clusters;
    std::string qrels;
    std::optional<std::uint64_t> collection_size;
    std::string out;
};

int cmd_eval_recall(const RecallArgs& a, std::ostream& out, std::ostream& err) {
    const Clustering clustering = read_clustering(a.clusters);
    const Qrels qrels = parse_qrels(a.qrels);
    const auto size = a.collection_size.value_or(clustering.doc_count());
    const RecallEvaluation eval = oracle_recall_curve(clustering, qrels, size);
    if (!eval.excluded_queries.empty()) {
        err << "excluded " << eval.excluded_queries.size() << " queries without relevant documents\n";
    }
    if (eval.missing_judged_docs > 0) {
        err << eval.missing_judged_docs << " of " << eval.judged_docs << " judged documents are not clustered\n";
    }
    write_curve_file(eval.curve, a.out);
    write_summary(eval.curve, curve_summary(eval.curve), out);
    out << "queries=" << eval.queries_used << '\n';
    return kExitOk;
}

struct SpamArgs {
    std::string clusters;
    std::string spam;
    std::string out;
    std::string oracle_out;
};

int cmd_eval_spam(const SpamArgs& a, std::ostream& out, std::ostream& err) {
    const Clustering clustering = read_clustering(a.clusters);
    const SpamScores spam = parse_spam(a.spam);
    const SpamEvaluation eval = spam_purity_curve(clustering, spam);
    if (eval.dropped_docs > 0) {
        err << eval.dropped_docs << " clustered documents have no spam score\n";
    }
    write_curve_file(eval.curve, a.out);
    write_summary(eval.curve, curve_summary(eval.curve), out);
    if (!a.oracle_out.empty()) {
        const Curve oracle = spam_oracle_curve(spam);
        write_curve_file(oracle, a.oracle_out);
        write_summary(oracle, curve_summary(oracle), out);
    }
    return kExitOk;
}

struct BaselineArgs {
    std::string clusters;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_baseline(const BaselineArgs& a, std::ostream& out) {
    const Clustering clustering = read_clustering(a.clusters);
    const Clustering baseline = structure_matched_baseline(clustering, a.seed);
    auto file = open_output(a.out);
    write_clustering(baseline, file);
    close_output(file, a.out);
    out << "clusters=" << baseline.cluster_count() << "\ndocs=" << baseline.doc_count() << '\n';
    return kExitOk;
}

struct BenchArgs {
    std::string sigs;
    std::vector<std::size_t> workers{1};
    TreeConfig config;
    std::size_t repeats = 1;
    std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    for (const auto w : a.workers) {
        if (w < 1) {
            throw std::invalid_argument("worker counts must be >= 1");
        }
    }
    FileSignatureSource source(a.sigs);
    const auto rows = benchmark_insertion(a.config, source, a.workers, a.repeats);

    std::ofstream file;
    if (!a.out.empty()) {
        file = open_output(a.out);
    }
    std::ostream& sink = a.out.empty() ? out : file;
    sink << "workers,docs_per_second,seconds\n" << std::setprecision(10);
    for (const auto& row : rows) {
        sink << row.workers << ',' << row.docs_per_second << ',' << row.seconds << '\n';
    }
    if (!a.out.empty()) {
        close_output(file, a.out);
    }
    return kExitOk;
}

void add_tree_flags(CLI::App* cmd, TreeConfig& config) {
    cmd->add_option("--order", config.order, "records per node (m)")->capture_default_str();
    cmd->add_option("--depth", config.depth, "key-bearing tree levels")->capture_default_str();
    cmd->add_option("--seed", config.rng_seed, "seed for the seeding sample")->capture_default_str();
    cmd->add_option("--sample-fraction", config.seed_sample_fraction, "fraction of points sampled for seeding")
        ->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"EM-tree document clustering over binary signatures"};
    app.name(args.empty() ? "emtree" : args.front());
    app.require_subcommand(1);

    IndexArgs index;
    auto* index_cmd = app.add_subcommand("index", "build a signature file from a doc_id<TAB>text corpus");
    index_cmd->add_option("--corpus", index.corpus, "corpus file")->required();
    index_cmd->add_option("--out", index.out, "signature file to write")->required();
    index_cmd->add_option("--dim", index.spec.dim, "signature width in bits")->capture_default_str();
    index_cmd->add_option("--sparsity", index.spec.code_sparsity, "non-zeros per term code")->capture_default_str();
    index_cmd->add_option("--seed", index.spec.global_seed, "term code seed")->capture_default_str();
    index_cmd->add_flag("--stem", index.stem, "apply the Porter stemmer");
    index_cmd->add_option("--stopwords", index.stopwords, "stopword file, one word per line");

    ClusterArgs cluster;
    auto* cluster_cmd = app.add_subcommand("cluster", "cluster a signature file with the streaming EM-tree");
    cluster_cmd->add_option("--sigs", cluster.sigs, "signature file")->required();
    cluster_cmd->add_option("--out", cluster.out, "tree file to write")->required();
    add_tree_flags(cluster_cmd, cluster.config);
    cluster_cmd->add_option("--iters", cluster.config.max_iterations, "maximum passes")->capture_default_str();
    cluster_cmd->add_option("--workers", cluster.workers, "insertion threads")->capture_default_str();
    cluster_cmd->add_option("--report", cluster.report, "run report path (default <out>.report)");

    AssignArgs assign;
    auto* assign_cmd = app.add_subcommand("assign", "assign signatures to the clusters of a tree");
    assign_cmd->add_option("--tree", assign.tree, "tree file")->required();
    assign_cmd->add_option("--sigs", assign.sigs, "signature file")->required();
    assign_cmd->add_option("--level", assign.level, "cluster level (default: leaf level)");
    assign_cmd->add_option("--out", assign.out, "clustering file to write")->required();

    RecallArgs recall;
    auto* recall_cmd = app.add_subcommand("eval-recall", "oracle collection selection recall curve");
    recall_cmd->add_option("--clusters", recall.clusters, "clustering file")->required();
    recall_cmd->add_option("--qrels", recall.qrels, "TREC qrels file")->required();
    recall_cmd->add_option("--collection-size", recall.collection_size,
                           "documents in the collection (default: clustered documents)");
    recall_cmd->add_option("--out", recall.out, "curve CSV to write")->required();

    SpamArgs spam;
    auto* spam_cmd = app.add_subcommand("eval-spam", "cluster spam purity curve");
    spam_cmd->add_option("--clusters", spam.clusters, "clustering file")->required();
    spam_cmd->add_option("--spam", spam.spam, "spam rankings file")->required();
    spam_cmd->add_option("--out", spam.out, "curve CSV to write")->required();
    spam_cmd->add_option("--oracle-out", spam.oracle_out, "also write the per-document oracle curve");

    BaselineArgs baseline;
    auto* baseline_cmd = app.add_subcommand("baseline", "random clustering with the same cluster sizes");
    baseline_cmd->add_option("--clusters", baseline.clusters, "clustering file")->required();
    baseline_cmd->add_option("--seed", baseline.seed, "permutation seed")->capture_default_str();
    baseline_cmd->add_option("--out", baseline.out, "clustering file to write")->required();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "insertion throughput per worker count");
    bench_cmd->add_option("--sigs", bench.sigs, "signature file")->required();
    bench_cmd->add_option("--workers", bench.workers, "comma-separated worker counts")
        ->delimiter(',')
        ->capture_default_str();
    add_tree_flags(bench_cmd, bench.config);
    bench_cmd->add_option("--repeats", bench.repeats, "timed passes per worker count (best is kept)")
        ->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "CSV path (default: stdout)");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    if (args.empty()) {
        argv.push_back("emtree");
    }
    for (const auto& s : args) {
        argv.push_back(s.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << app.get_name() << ": " << e.what() << '\n';
        err << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (*index_cmd) return cmd_index(index, out, err);
        if (*cluster_cmd) return cmd_cluster(cluster, out);
        if (*assign_cmd) return cmd_assign(assign, out);
        if (*recall_cmd) return cmd_eval_recall(recall, out, err);
        if (*spam_cmd) return cmd_eval_spam(spam, out, err);
        if (*baseline_cmd) return cmd_baseline(baseline, out);
        if (*bench_cmd) return cmd_bench(bench, out);
        err << "no command given\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace emtree
