#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "emtree/clustering.hpp"
#include "emtree/error.hpp"

namespace emtree {

// query id -> (doc id -> grade). Grades are >= 0; grade > 0 means relevant.
struct Qrels {
    std::map<std::string, std::map<std::string, int>> judgments;

    std::size_t judgment_count() const;
};

// doc id -> spam percentile in [0, 99]; 99 is the least spammy.
struct SpamScores {
    std::unordered_map<std::string, int> scores;
};

struct CurvePoint {
    double x = 0.0;  // cumulative fraction of the collection visited
    double y = 0.0;  // recall, or mean spam score of the last cluster visited

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct Curve {
    std::string label;
    std::vector<CurvePoint> points;

    friend bool operator==(const Curve&, const Curve&) = default;
};

// TREC qrels: "query-id iteration doc-id grade", whitespace separated.
// Errors: ParseError with the line number (wrong field count, non-integer or
// negative grade, duplicate judgment).
Qrels parse_qrels(std::istream& in);
Qrels parse_qrels(const std::string& path);

// Waterloo spam rankings: "score doc-id". Errors: ParseError (malformed line,
// score outside 0..99, duplicate doc).
SpamScores parse_spam(std::istream& in);
SpamScores parse_spam(const std::string& path);

inline constexpr double kMaxMissingJudgedFraction = 0.01;

struct RecallEvaluation {
    Curve curve;
    std::size_t queries_used = 0;
    std::vector<std::string> excluded_queries;  // no relevant documents
    std::size_t judged_docs = 0;
    std::size_t missing_judged_docs = 0;  // judged but not in the clustering
};

// Oracle collection selection. Per query, clusters holding relevant documents
// are ranked by relevant count (desc), then size (asc), then id; walking the
// ranking yields (docs visited / collection_size, recall). Query curves are
// averaged rank by rank; a query whose ranking is exhausted contributes its
// final point. The curve starts at (0, 0). Relevant documents missing from the
// clustering stay in the recall denominator.
// Errors: CoverageError when more than 1% of judged docs are unclustered;
// DataError when no query has a relevant document.
RecallEvaluation oracle_recall_curve(const Clustering& clustering, const Qrels& qrels, std::uint64_t collection_size);

// Same cluster ids and sizes as `clustering`, filled with a seeded uniform
// permutation of `universe`. Throws DataError if the sizes disagree.
Clustering structure_matched_baseline(const Clustering& clustering, std::vector<std::string> universe,
                                      std::uint64_t seed);
Clustering structure_matched_baseline(const Clustering& clustering, std::uint64_t seed);

struct SpamEvaluation {
    Curve curve;
    std::size_t dropped_docs = 0;  // clustered docs without a score
};

// Clusters ranked by mean spam score (desc), then scored size (desc), then id.
// Each point is (cumulative scored-doc fraction, cluster mean).
// Throws DataError when no clustered document has a score.
SpamEvaluation spam_purity_curve(const Clustering& clustering, const SpamScores& spam);

// Documents ordered by score, 99 first: one point per score value present,
// at the cumulative fraction after its last document.
Curve spam_oracle_curve(const SpamScores& spam);

struct CurveSummary {
    double auc = 0.0;
    std::optional<double> x_at_target;
};

// Trapezoidal area over x in [0, 1]; outside the sampled range the curve is
// held flat at its first/last y. x_at_target is the smallest x with y >= target.
CurveSummary curve_summary(const Curve& curve, double target = 1.0);

// CSV with header "x,<label>" and one "x,y" row per point.
void write_curve_csv(const Curve& curve, std::ostream& out);
void write_curve_csv(const Curve& curve, const std::string& path);
Curve read_curve_csv(std::istream& in);
Curve read_curve_csv(const std::string& path);

void write_summary(const Curve& curve, const CurveSummary& summary, std::ostream& out);

}  // namespace emtree
