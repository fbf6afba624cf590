#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "emtree/eval.hpp"
#include "emtree/random.hpp"

using namespace emtree;

namespace {

Qrels qrels_from(const std::string& text) {
    std::istringstream in(text);
    return parse_qrels(in);
}

SpamScores spam_from(const std::string& text) {
    std::istringstream in(text);
    return parse_spam(in);
}

Clustering clustering_of(std::map<std::string, std::vector<std::string>> clusters) {
    Clustering c;
    c.clusters = std::move(clusters);
    c.normalize();
    return c;
}

void expect_curve_near(const Curve& got, const std::vector<CurvePoint>& expected) {
    ASSERT_EQ(got.points.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_NEAR(got.points[i].x, expected[i].x, 1e-12) << i;
        EXPECT_NEAR(got.points[i].y, expected[i].y, 1e-12) << i;
    }
}

}  // namespace

TEST(ParseQrels, Basic) {
    const Qrels q = qrels_from("51 0 clueweb09-en0000-00-00001 1\n\n51 0 d2 0\n52 0 d3 2\n");
    EXPECT_EQ(q.judgments.size(), 2u);
    EXPECT_EQ(q.judgments.at("51").at("clueweb09-en0000-00-00001"), 1);
    EXPECT_EQ(q.judgments.at("51").at("d2"), 0);
    EXPECT_EQ(q.judgment_count(), 3u);
}

TEST(ParseQrels, Errors) {
    const auto line_of = [](const std::string& text) -> std::uint64_t {
        try {
            qrels_from(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("51 0 d1 1\n51 0 doc -1\n"), 2u);
    EXPECT_EQ(line_of("51 0 d1\n"), 1u);
    EXPECT_EQ(line_of("51 0 d1 x\n"), 1u);
    EXPECT_EQ(line_of("51 0 d1 1.5\n"), 1u);
    EXPECT_EQ(line_of("51 0 d1 1\n51 0 d1 2\n"), 2u);
}

TEST(ParseSpam, BasicAndErrors) {
    const SpamScores s = spam_from("70 clueweb09-en0000-23-12345\n0 a\n99 b\n");
    EXPECT_EQ(s.scores.at("clueweb09-en0000-23-12345"), 70);
    EXPECT_EQ(s.scores.size(), 3u);
    EXPECT_THROW(spam_from("100 a\n"), ParseError);
    EXPECT_THROW(spam_from("-1 a\n"), ParseError);
    EXPECT_THROW(spam_from("50\n"), ParseError);
    EXPECT_THROW(spam_from("5 a\n6 a\n"), ParseError);
}

TEST(OracleRecall, SingleCluster) {
    const auto c = clustering_of({{"0", {"a", "b", "c"}}, {"1", {"d", "e"}}});
    const auto eval = oracle_recall_curve(c, qrels_from("q 0 a 1\nq 0 c 1\nq 0 d 0\n"), 100);
    expect_curve_near(eval.curve, {{0, 0}, {0.03, 1.0}});
    EXPECT_EQ(eval.queries_used, 1u);
    const auto summary = curve_summary(eval.curve);
    ASSERT_TRUE(summary.x_at_target);
    EXPECT_DOUBLE_EQ(*summary.x_at_target, 0.03);
}

TEST(OracleRecall, OneRelevantPerCluster) {
    const auto c = clustering_of({{"0", {"a"}}, {"1", {"b"}}, {"2", {"c"}}, {"3", {"d"}}});
    const auto eval = oracle_recall_curve(c, qrels_from("q 0 a 1\nq 0 b 1\nq 0 c 1\nq 0 d 1\n"), 4);
    expect_curve_near(eval.curve, {{0, 0}, {0.25, 0.25}, {0.5, 0.5}, {0.75, 0.75}, {1.0, 1.0}});
}

TEST(OracleRecall, RankingTieBreaks) {
    // Both clusters hold one relevant doc; the smaller one comes first.
    const auto c = clustering_of({{"big", {"a", "x", "y"}}, {"small", {"b"}}, {"z", {"c"}}});
    const auto eval = oracle_recall_curve(c, qrels_from("q 0 a 1\nq 0 b 1\n"), 5);
    expect_curve_near(eval.curve, {{0, 0}, {0.2, 0.5}, {0.8, 1.0}});
}

TEST(OracleRecall, AveragesRanksAndPadsExhaustedQueries) {
    const auto c = clustering_of({{"0", {"a", "b"}}, {"1", {"c"}}, {"2", {"d", "e", "f", "g"}}});
    // q1: cluster 0 holds both relevant docs. q2: one relevant each in 1 and 2.
    const auto eval = oracle_recall_curve(c, qrels_from("q1 0 a 1\nq1 0 b 1\nq2 0 c 1\nq2 0 d 1\n"), 10);
    expect_curve_near(eval.curve, {{0, 0}, {(0.2 + 0.1) / 2, (1.0 + 0.5) / 2}, {(0.2 + 0.5) / 2, 1.0}});
}

TEST(OracleRecall, ExcludesQueriesWithoutRelevantDocs) {
    const auto c = clustering_of({{"0", {"a"}}, {"1", {"b"}}});
    const auto eval = oracle_recall_curve(c, qrels_from("q1 0 a 1\nq2 0 b 0\n"), 2);
    EXPECT_EQ(eval.queries_used, 1u);
    EXPECT_EQ(eval.excluded_queries, std::vector<std::string>{"q2"});
    EXPECT_THROW(oracle_recall_curve(c, qrels_from("q2 0 b 0\n"), 2), DataError);
}

TEST(OracleRecall, Coverage) {
    std::map<std::string, std::vector<std::string>> clusters;
    std::string qrels;
    for (int i = 0; i < 100; ++i) {
        clusters[std::to_string(i % 10)].push_back("d" + std::to_string(i));
        qrels += "q 0 d" + std::to_string(i) + " 1\n";
    }
    const auto c = clustering_of(clusters);
    // One unclustered judged doc out of 101 is under 1%; it stays in the denominator.
    const auto ok = oracle_recall_curve(c, qrels_from(qrels + "q 0 missing 1\n"), 1000);
    EXPECT_EQ(ok.missing_judged_docs, 1u);
    EXPECT_NEAR(ok.curve.points.back().y, 100.0 / 101.0, 1e-12);
    EXPECT_THROW(oracle_recall_curve(c, qrels_from(qrels + "q 0 m1 1\nq 0 m2 1\n"), 1000), CoverageError);
    EXPECT_THROW(oracle_recall_curve(c, qrels_from("q 0 nowhere 1\n"), 1000), CoverageError);
    EXPECT_THROW(oracle_recall_curve(c, qrels_from(qrels), 50), std::invalid_argument);
}

// Exhaustive oracle: for each query try every ordering of the clusters holding
// relevant documents and keep the one with the highest recall at each prefix,
// then the fewest documents visited, then the smallest ids.
TEST(OracleRecall, MatchesExhaustiveRanking) {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::map<std::string, std::vector<std::string>> clusters;
        std::vector<std::string> cluster_of_doc;
        std::vector<std::size_t> sizes;
        int doc = 0;
        for (int k = 0; k < 20; ++k) {
            const std::string id = "c" + std::to_string(k);
            const auto size = 1 + uniform_below(rng, 4);
            for (std::uint64_t i = 0; i < size; ++i) {
                clusters[id].push_back("d" + std::to_string(doc++));
                cluster_of_doc.push_back(id);
            }
        }
        const auto c = clustering_of(clusters);
        const std::uint64_t N = static_cast<std::uint64_t>(doc) + 13;
        std::string qrels;
        std::vector<std::vector<CurvePoint>> per_query;
        for (int q = 0; q < 3; ++q) {
            // Relevant docs from at most 6 clusters.
            std::vector<int> pool;
            for (int d = 0; d < doc; ++d) {
                const int k = std::stoi(cluster_of_doc[d].substr(1));
                if ((k + q) % 20 < 6) {
                    pool.push_back(d);
                }
            }
            std::map<std::string, int> rel_in;
            int relevant = 0;
            for (const int d : pool) {
                if (uniform_below(rng, 2) == 0 || relevant == 0) {
                    qrels += "q" + std::to_string(q) + " 0 d" + std::to_string(d) + " 1\n";
                    ++rel_in[cluster_of_doc[d]];
                    ++relevant;
                }
            }
            std::vector<std::string> ids;
            for (const auto& [id, n] : rel_in) {
                ids.push_back(id);
            }
            std::sort(ids.begin(), ids.end());
            std::vector<std::string> best;
            std::vector<std::tuple<int, std::size_t, std::string>> best_key;
            do {
                std::vector<std::tuple<int, std::size_t, std::string>> key;
                int found = 0;
                std::size_t visited = 0;
                for (const auto& id : ids) {
                    found += rel_in[id];
                    visited += clusters[id].size();
                    key.emplace_back(-found, visited, id);
                }
                if (best.empty() || key < best_key) {
                    best = ids;
                    best_key = key;
                }
            } while (std::next_permutation(ids.begin(), ids.end()));
            std::vector<CurvePoint> points;
            for (const auto& [neg_found, visited, id] : best_key) {
                points.push_back({static_cast<double>(visited) / static_cast<double>(N),
                                  static_cast<double>(-neg_found) / relevant});
            }
            per_query.push_back(points);
        }
        std::size_t longest = 0;
        for (const auto& p : per_query) {
            longest = std::max(longest, p.size());
        }
        std::vector<CurvePoint> expected{{0, 0}};
        for (std::size_t k = 0; k < longest; ++k) {
            CurvePoint avg;
            for (const auto& p : per_query) {
                avg.x += p[std::min(k, p.size() - 1)].x / 3.0;
                avg.y += p[std::min(k, p.size() - 1)].y / 3.0;
            }
            expected.push_back(avg);
        }
        expect_curve_near(oracle_recall_curve(c, qrels_from(qrels), N).curve, expected);
    }
}

TEST(OracleRecall, DominatesOtherOrderings) {
    Rng rng(4);
    std::map<std::string, std::vector<std::string>> clusters;
    std::map<std::string, int> rel_in;
    std::string qrels;
    int doc = 0;
    int relevant = 0;
    for (int k = 0; k < 12; ++k) {
        const std::string id = "c" + std::to_string(k);
        for (std::uint64_t i = 0; i < 1 + uniform_below(rng, 6); ++i) {
            const std::string d = "d" + std::to_string(doc++);
            clusters[id].push_back(d);
            if (uniform_below(rng, 3) == 0) {
                qrels += "q 0 " + d + " 1\n";
                ++rel_in[id];
                ++relevant;
            }
        }
    }
    const auto eval = oracle_recall_curve(clustering_of(clusters), qrels_from(qrels), doc);
    std::vector<std::string> ids;
    for (const auto& [id, n] : rel_in) {
        ids.push_back(id);
    }
    for (int trial = 0; trial < 200; ++trial) {
        shuffle(ids, rng);
        int found = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            found += rel_in[ids[k]];
            EXPECT_GE(eval.curve.points[k + 1].y + 1e-12, static_cast<double>(found) / relevant);
        }
    }
}

TEST(Baseline, StructureAndDeterminism) {
    const auto c = clustering_of({{"x", {"a", "b", "c"}}, {"y", {"d", "e"}}, {"z", {"f"}}});
    const auto b1 = structure_matched_baseline(c, 7);
    const auto b2 = structure_matched_baseline(c, 7);
    EXPECT_EQ(b1, b2);
    EXPECT_EQ(b1.clusters.at("x").size(), 3u);
    EXPECT_EQ(b1.clusters.at("y").size(), 2u);
    EXPECT_EQ(b1.clusters.at("z").size(), 1u);
    EXPECT_EQ(b1.doc_count(), 6u);
    EXPECT_THROW(structure_matched_baseline(c, {"a", "b"}, 1), DataError);
    const auto other = structure_matched_baseline(c, {"u1", "u2", "u3", "u4", "u5", "u6"}, 1);
    EXPECT_EQ(other.doc_count(), 6u);
    EXPECT_EQ(other.clusters.at("x").size(), 3u);
}

TEST(Baseline, MembershipIsBinomial) {
    const auto c = clustering_of({{"x", {"a", "b", "c"}}, {"y", {"d", "e"}}, {"z", {"f"}}});
    const int seeds = 1000;
    std::map<std::string, int> in_x;
    for (int s = 0; s < seeds; ++s) {
        const auto baseline = structure_matched_baseline(c, static_cast<std::uint64_t>(s));
        for (const auto& doc : baseline.clusters.at("x")) {
            ++in_x[doc];
        }
    }
    const double sigma = std::sqrt(seeds * 0.5 * 0.5);
    for (const std::string doc : {"a", "b", "c", "d", "e", "f"}) {
        EXPECT_NEAR(in_x[doc], seeds * 0.5, 3 * sigma) << doc;
    }
}

TEST(SpamPurity, PureClustersStep) {
    const auto c = clustering_of({{"bad", {"s1", "s2"}}, {"good", {"h1", "h2"}}});
    const auto eval = spam_purity_curve(c, spam_from("0 s1\n0 s2\n99 h1\n99 h2\n"));
    expect_curve_near(eval.curve, {{0.5, 99}, {1.0, 0}});
}

TEST(SpamPurity, UniformScoresAreFlat) {
    std::map<std::string, std::vector<std::string>> clusters;
    std::string spam;
    for (int i = 0; i < 60; ++i) {
        clusters[std::to_string(i % 7)].push_back("d" + std::to_string(i));
        spam += "50 d" + std::to_string(i) + "\n";
    }
    const auto eval = spam_purity_curve(clustering_of(clusters), spam_from(spam));
    EXPECT_EQ(eval.curve.points.size(), 7u);
    for (const auto& p : eval.curve.points) {
        EXPECT_EQ(p.y, 50.0);
    }
}

TEST(SpamPurity, HandEnumeratedToyCase) {
    const auto c = clustering_of({{"A", {"a1", "a2"}},
                                  {"B", {"b1"}},
                                  {"C", {"c1", "c2", "c3"}},
                                  {"D", {"d1"}},
                                  {"E", {"e1", "e2"}}});
    const auto eval =
        spam_purity_curve(c, spam_from("90 a1\n80 a2\n10 b1\n60 c1\n40 c2\n50 c3\n85 d1\n50 e1\n"));
    // A and D tie at 85 (larger first); C and E tie at 50 (larger first). e2 has no score.
    expect_curve_near(eval.curve, {{2.0 / 8, 85}, {3.0 / 8, 85}, {6.0 / 8, 50}, {7.0 / 8, 50}, {1.0, 10}});
    EXPECT_EQ(eval.dropped_docs, 1u);
}

TEST(SpamPurity, NonIncreasingAndNeedsScores) {
    Rng rng(5);
    std::map<std::string, std::vector<std::string>> clusters;
    std::string spam;
    for (int i = 0; i < 500; ++i) {
        clusters[std::to_string(uniform_below(rng, 40))].push_back("d" + std::to_string(i));
        spam += std::to_string(uniform_below(rng, 100)) + " d" + std::to_string(i) + "\n";
    }
    const auto c = clustering_of(clusters);
    const auto eval = spam_purity_curve(c, spam_from(spam));
    for (std::size_t i = 1; i < eval.curve.points.size(); ++i) {
        EXPECT_LE(eval.curve.points[i].y, eval.curve.points[i - 1].y);
        EXPECT_GT(eval.curve.points[i].x, eval.curve.points[i - 1].x);
    }
    EXPECT_DOUBLE_EQ(eval.curve.points.back().x, 1.0);
    EXPECT_THROW(spam_purity_curve(c, spam_from("5 nobody\n")), DataError);
}

TEST(SpamOracle, Staircase) {
    std::string spam;
    for (int s = 0; s < 100; ++s) {
        spam += std::to_string(s) + " d" + std::to_string(s) + "\n";
    }
    const Curve curve = spam_oracle_curve(spam_from(spam));
    ASSERT_EQ(curve.points.size(), 100u);
    for (int i = 0; i < 100; ++i) {
        EXPECT_DOUBLE_EQ(curve.points[i].y, 99.0 - i);
        EXPECT_NEAR(curve.points[i].x, (i + 1) / 100.0, 1e-12);
    }
}

TEST(SpamOracle, SingleScoreIsFlat) {
    const Curve curve = spam_oracle_curve(spam_from("42 a\n42 b\n42 c\n"));
    expect_curve_near(curve, {{1.0, 42}});
    EXPECT_THROW(spam_oracle_curve(SpamScores{}), std::invalid_argument);
}

TEST(CurveSummary, SimpleAreas) {
    const auto diag = curve_summary(Curve{"", {{0, 0}, {1, 1}}});
    EXPECT_DOUBLE_EQ(diag.auc, 0.5);
    ASSERT_TRUE(diag.x_at_target);
    EXPECT_DOUBLE_EQ(*diag.x_at_target, 1.0);

    const auto step = curve_summary(Curve{"", {{0, 0}, {0.1, 1.0}}});
    EXPECT_DOUBLE_EQ(*step.x_at_target, 0.1);
    EXPECT_DOUBLE_EQ(step.auc, 0.05 + 0.9);

    EXPECT_FALSE(curve_summary(Curve{"", {{0, 0}, {1, 0.5}}}).x_at_target);
    EXPECT_DOUBLE_EQ(curve_summary(Curve{"", {}}).auc, 0.0);
    // Held flat before the first point.
    EXPECT_DOUBLE_EQ(curve_summary(Curve{"", {{0.5, 2.0}, {1.0, 2.0}}}).auc, 2.0);
}

TEST(CurveSummary, MatchesFineIntegration) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> xs{0.0, 1.0};
        for (int i = 0; i < 8; ++i) {
            xs.push_back(static_cast<double>(uniform_below(rng, 1000000)) / 1e6);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        Curve curve;
        for (const double x : xs) {
            curve.points.push_back({x, static_cast<double>(uniform_below(rng, 1000)) / 10.0});
        }
        // Midpoint rule over the piecewise-linear interpolant.
        const int steps = 400000;
        double area = 0.0;
        std::size_t seg = 0;
        for (int i = 0; i < steps; ++i) {
            const double x = (i + 0.5) / steps;
            while (curve.points[seg + 1].x < x) {
                ++seg;
            }
            const auto& a = curve.points[seg];
            const auto& b = curve.points[seg + 1];
            area += (a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x)) / steps;
        }
        EXPECT_NEAR(curve_summary(curve).auc, area, 1e-3);
    }
}
