#include "emtree/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_set>

#include "emtree/error.hpp"
#include "emtree/random.hpp"

namespace emtree {

namespace {

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i > start) {
            fields.push_back(line.substr(start, i - start));
        }
    }
    return fields;
}

std::optional<long long> parse_int(std::string_view s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

template <typename LineFn>
void for_each_line(std::istream& in, LineFn&& fn) {
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        fn(line_no, std::string_view(line));
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    return in;
}

}  // namespace

std::size_t Qrels::judgment_count() const {
    std::size_t n = 0;
    for (const auto& [q, docs] : judgments) {
        n += docs.size();
    }
    return n;
}

Qrels parse_qrels(std::istream& in) {
    Qrels qrels;
    for_each_line(in, [&](std::uint64_t line_no, std::string_view line) {
        const auto fields = split_whitespace(line);
        if (fields.empty()) {
            return;
        }
        if (fields.size() != 4) {
            throw ParseError(line_no, "qrels: expected 4 fields, got " + std::to_string(fields.size()));
        }
        const auto grade = parse_int(fields[3]);
        if (!grade) {
            throw ParseError(line_no, "qrels: grade is not an integer: " + std::string(fields[3]));
        }
        if (*grade < 0) {
            throw ParseError(line_no, "qrels: negative grade " + std::string(fields[3]));
        }
        if (*grade > std::numeric_limits<int>::max()) {
            throw ParseError(line_no, "qrels: grade out of range");
        }
        auto& docs = qrels.judgments[std::string(fields[0])];
        if (!docs.emplace(std::string(fields[2]), static_cast<int>(*grade)).second) {
            throw ParseError(line_no, "qrels: duplicate judgment for query " + std::string(fields[0]) + " doc " +
                                          std::string(fields[2]));
        }
    });
    return qrels;
}

Qrels parse_qrels(const std::string& path) {
    auto in = open_input(path);
    return parse_qrels(in);
}

SpamScores parse_spam(std::istream& in) {
    SpamScores spam;
    for_each_line(in, [&](std::uint64_t line_no, std::string_view line) {
        const auto fields = split_whitespace(line);
        if (fields.empty()) {
            return;
        }
        if (fields.size() != 2) {
            throw ParseError(line_no, "spam: expected 2 fields, got " + std::to_string(fields.size()));
        }
        const auto score = parse_int(fields[0]);
        if (!score) {
            throw ParseError(line_no, "spam: score is not an integer: " + std::string(fields[0]));
        }
        if (*score < 0 || *score > 99) {
            throw ParseError(line_no, "spam: score " + std::string(fields[0]) + " outside 0..99");
        }
        if (!spam.scores.emplace(std::string(fields[1]), static_cast<int>(*score)).second) {
            throw ParseError(line_no, "spam: duplicate doc " + std::string(fields[1]));
        }
    });
    return spam;
}

SpamScores parse_spam(const std::string& path) {
    auto in = open_input(path);
    return parse_spam(in);
}

// ---------------------------------------------------------------------------
// Oracle collection selection

RecallEvaluation oracle_recall_curve(const Clustering& clustering, const Qrels& qrels, std::uint64_t collection_size) {
    if (collection_size < clustering.doc_count() || collection_size == 0) {
        throw std::invalid_argument("collection size " + std::to_string(collection_size) +
                                    " smaller than the clustering (" + std::to_string(clustering.doc_count()) +
                                    " docs)");
    }
    std::vector<const std::string*> ids;
    std::vector<std::size_t> sizes;
    std::unordered_map<std::string_view, std::size_t> cluster_of;
    for (const auto& [id, members] : clustering.clusters) {
        for (const auto& doc : members) {
            cluster_of.emplace(doc, ids.size());
        }
        ids.push_back(&id);
        sizes.push_back(members.size());
    }

    RecallEvaluation result;
    std::unordered_set<std::string_view> judged;
    for (const auto& [q, docs] : qrels.judgments) {
        for (const auto& [doc, grade] : docs) {
            judged.insert(doc);
        }
    }
    result.judged_docs = judged.size();
    for (const auto doc : judged) {
        if (!cluster_of.contains(doc)) {
            ++result.missing_judged_docs;
        }
    }
    if (result.judged_docs == 0 ||
        static_cast<double>(result.missing_judged_docs) >
            kMaxMissingJudgedFraction * static_cast<double>(result.judged_docs)) {
        throw CoverageError("qrels: " + std::to_string(result.missing_judged_docs) + " of " +
                            std::to_string(result.judged_docs) + " judged documents are not in the clustering");
    }

    // Per-query cumulative (x, recall) after each ranked cluster.
    std::vector<std::vector<CurvePoint>> per_query;
    for (const auto& [q, docs] : qrels.judgments) {
        std::map<std::size_t, std::size_t> relevant_in;
        std::size_t relevant_total = 0;
        for (const auto& [doc, grade] : docs) {
            if (grade <= 0) {
                continue;
            }
            ++relevant_total;
            if (const auto it = cluster_of.find(doc); it != cluster_of.end()) {
                ++relevant_in[it->second];
            }
        }
        if (relevant_total == 0) {
            result.excluded_queries.push_back(q);
            continue;
        }
        std::vector<std::pair<std::size_t, std::size_t>> ranking(relevant_in.begin(), relevant_in.end());
        std::sort(ranking.begin(), ranking.end(), [&](const auto& a, const auto& b) {
            if (a.second != b.second) {
                return a.second > b.second;
            }
            if (sizes[a.first] != sizes[b.first]) {
                return sizes[a.first] < sizes[b.first];
            }
            return *ids[a.first] < *ids[b.first];
        });
        std::vector<CurvePoint> points;
        points.reserve(ranking.size());
        std::uint64_t visited = 0;
        std::uint64_t found = 0;
        for (const auto& [cluster, rel] : ranking) {
            visited += sizes[cluster];
            found += rel;
            points.push_back({static_cast<double>(visited) / static_cast<double>(collection_size),
                              static_cast<double>(found) / static_cast<double>(relevant_total)});
        }
        per_query.push_back(std::move(points));
    }
    if (per_query.empty()) {
        throw DataError("qrels: no query has a relevant document");
    }
    result.queries_used = per_query.size();

    std::size_t longest = 0;
    for (const auto& p : per_query) {
        longest = std::max(longest, p.size());
    }
    result.curve.label = "oracle_recall";
    result.curve.points.push_back({0.0, 0.0});
    const double queries = static_cast<double>(per_query.size());
    for (std::size_t k = 0; k < longest; ++k) {
        double x = 0.0;
        double y = 0.0;
        for (const auto& p : per_query) {
            const CurvePoint& point = p.empty() ? CurvePoint{} : p[std::min(k, p.size() - 1)];
            x += point.x;
            y += point.y;
        }
        result.curve.points.push_back({x / queries, y / queries});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Baselines

Clustering structure_matched_baseline(const Clustering& clustering, std::vector<std::string> universe,
                                      std::uint64_t seed) {
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    if (universe.size() != clustering.doc_count()) {
        throw DataError("baseline: universe has " + std::to_string(universe.size()) + " docs, clustering has " +
                        std::to_string(clustering.doc_count()));
    }
    Rng rng(seed);
    shuffle(universe, rng);
    Clustering out;
    std::size_t next = 0;
    for (const auto& [id, members] : clustering.clusters) {
        auto& cluster = out.clusters[id];
        cluster.assign(std::make_move_iterator(universe.begin() + static_cast<std::ptrdiff_t>(next)),
                       std::make_move_iterator(universe.begin() + static_cast<std::ptrdiff_t>(next + members.size())));
        next += members.size();
    }
    out.normalize();
    return out;
}

Clustering structure_matched_baseline(const Clustering& clustering, std::uint64_t seed) {
    std::vector<std::string> universe;
    universe.reserve(clustering.doc_count());
    for (const auto& [id, members] : clustering.clusters) {
        universe.insert(universe.end(), members.begin(), members.end());
    }
    return structure_matched_baseline(clustering, std::move(universe), seed);
}

// ---------------------------------------------------------------------------
// Spam

SpamEvaluation spam_purity_curve(const Clustering& clustering, const SpamScores& spam) {
    struct ClusterScore {
        const std::string* id;
        std::uint64_t sum = 0;
        std::uint64_t count = 0;
    };
    SpamEvaluation result;
    std::vector<ClusterScore> scored;
    std::uint64_t total = 0;
    for (const auto& [id, members] : clustering.clusters) {
        ClusterScore cs{&id};
        for (const auto& doc : members) {
            if (const auto it = spam.scores.find(doc); it != spam.scores.end()) {
                cs.sum += static_cast<std::uint64_t>(it->second);
                ++cs.count;
            } else {
                ++result.dropped_docs;
            }
        }
        if (cs.count > 0) {
            total += cs.count;
            scored.push_back(cs);
        }
    }
    if (total == 0) {
        throw DataError("spam: no clustered document has a spam score");
    }
    // Compare means as exact fractions.
    std::sort(scored.begin(), scored.end(), [](const ClusterScore& a, const ClusterScore& b) {
        const std::uint64_t lhs = a.sum * b.count;
        const std::uint64_t rhs = b.sum * a.count;
        if (lhs != rhs) {
            return lhs > rhs;
        }
        if (a.count != b.count) {
            return a.count > b.count;
        }
        return *a.id < *b.id;
    });
    result.curve.label = "spam_purity";
    std::uint64_t visited = 0;
    for (const auto& cs : scored) {
        visited += cs.count;
        result.curve.points.push_back({static_cast<double>(visited) / static_cast<double>(total),
                                       static_cast<double>(cs.sum) / static_cast<double>(cs.count)});
    }
    return result;
}

Curve spam_oracle_curve(const SpamScores& spam) {
    if (spam.scores.empty()) {
        throw std::invalid_argument("spam oracle curve needs at least one score");
    }
    std::array<std::uint64_t, 100> histogram{};
    for (const auto& [doc, score] : spam.scores) {
        ++histogram[static_cast<std::size_t>(score)];
    }
    Curve curve;
    curve.label = "spam_oracle";
    const auto total = static_cast<double>(spam.scores.size());
    std::uint64_t visited = 0;
    for (int score = 99; score >= 0; --score) {
        if (const auto n = histogram[static_cast<std::size_t>(score)]; n > 0) {
            visited += n;
            curve.points.push_back({static_cast<double>(visited) / total, static_cast<double>(score)});
        }
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Summaries and CSV

CurveSummary curve_summary(const Curve& curve, double target) {
    CurveSummary summary;
    const auto& p = curve.points;
    if (p.empty()) {
        return summary;
    }
    summary.auc += std::max(0.0, p.front().x) * p.front().y;
    for (std::size_t i = 1; i < p.size(); ++i) {
        summary.auc += (p[i].x - p[i - 1].x) * (p[i].y + p[i - 1].y) / 2.0;
    }
    summary.auc += std::max(0.0, 1.0 - p.back().x) * p.back().y;
    for (const auto& point : p) {
        if (point.y >= target - 1e-12) {
            summary.x_at_target = point.x;
            break;
        }
    }
    return summary;
}

void write_curve_csv(const Curve& curve, std::ostream& out) {
    if (curve.label.find_first_of(",\r\n") != std::string::npos) {
        throw std::invalid_argument("curve label may not contain commas or newlines");
    }
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << "x," << curve.label << '\n' << std::setprecision(17);
    for (const auto& point : curve.points) {
        out << point.x << ',' << point.y << '\n';
    }
    out.flags(flags);
    out.precision(precision);
    if (!out) {
        throw IoError("curve CSV: write failed");
    }
}

void write_curve_csv(const Curve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    write_curve_csv(curve, out);
}

Curve read_curve_csv(std::istream& in) {
    Curve curve;
    bool header = false;
    for_each_line(in, [&](std::uint64_t line_no, std::string_view line) {
        if (!header) {
            if (line.substr(0, 2) != "x,") {
                throw ParseError(line_no, "curve CSV: header must start with \"x,\"");
            }
            curve.label = std::string(line.substr(2));
            header = true;
            return;
        }
        if (line.empty()) {
            return;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError(line_no, "curve CSV: expected two columns");
        }
        const auto x = parse_double(line.substr(0, comma));
        const auto y = parse_double(line.substr(comma + 1));
        if (!x || !y) {
            throw ParseError(line_no, "curve CSV: non-numeric value");
        }
        curve.points.push_back({*x, *y});
    });
    if (!header) {
        throw ParseError(1, "curve CSV: missing header");
    }
    return curve;
}

Curve read_curve_csv(const std::string& path) {
    auto in = open_input(path);
    return read_curve_csv(in);
}

void write_summary(const Curve& curve, const CurveSummary& summary, std::ostream& out) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(10);
    out << "label=" << curve.label << '\n';
    out << "points=" << curve.points.size() << '\n';
    out << "auc=" << summary.auc << '\n';
    out << "x_at_target=";
    if (summary.x_at_target) {
        out << *summary.x_at_target;
    } else {
        out << "none";
    }
    out << '\n';
    out.flags(flags);
    out.precision(precision);
}

}  // namespace emtree
