#include <bscript/classifier.hpp>
#include <bscript/features.hpp>

#include "helpers.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace bscript;
using namespace bscript::testing;

namespace {

LabeledExample point(double x0, double x1, bool keyword)
{
    WordFeatureVector v;
    v.dimension = 2;
    if (x0 != 0.0)
        v.entries.push_back({0, x0});
    if (x1 != 0.0)
        v.entries.push_back({1, x1});
    return {v, keyword, "v", 0};
}

/// Separable 2-D set: positives around (1.5, 1), negatives around (-1.5, -1).
std::vector<LabeledExample> separable20()
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> noise(-0.5, 0.5);
    std::vector<LabeledExample> out;
    for (int i = 0; i < 10; ++i) {
        out.push_back(point(1.5 + noise(rng), 1.0 + noise(rng), true));
        out.push_back(point(-1.5 + noise(rng), -1.0 + noise(rng), false));
    }
    return out;
}

std::vector<bool> labels_of(double w0, double w1, double b, const std::vector<LabeledExample>& xs)
{
    std::vector<bool> out;
    for (const auto& e : xs)
        out.push_back(w0 * e.features.value_at(0) + w1 * e.features.value_at(1) + b >= 0.0);
    return out;
}

/// Hand-built model scoring one vocabulary word at 1 + tfidf and everything else at -0.5.
LinearModel spotlight_model(const FeatureSpace& space, std::string_view word)
{
    LinearModel m;
    m.weights.assign(space.dimension(), 0.0);
    m.weights[*space.column_of(word)] = 1.0;
    m.bias = -0.5;
    m.feature_space_id = space.id();
    return m;
}

}  // namespace

TEST_SUITE("classifier")
{
    TEST_CASE("two symmetric points")
    {
        const std::vector<LabeledExample> xs{point(1, 0, true), point(-1, 0, false)};
        TrainConfig cfg;
        cfg.C = 1.0;
        cfg.epochs = 1000;
        const auto m = train(xs, cfg);
        const double pos = decision_value(m, xs[0].features);
        const double neg = decision_value(m, xs[1].features);
        CHECK(pos > 0.0);
        CHECK(neg < 0.0);
        CHECK(std::abs(pos + neg) <= 1e-3 * std::abs(pos));
    }

    TEST_CASE("hinge at margin zero")
    {
        LinearModel zero;
        zero.weights.assign(2, 0.0);
        const std::vector<LabeledExample> xs{point(1, 0, true), point(-1, 2, false), point(3, 3, true)};
        CHECK(svm_objective(zero, xs, 1.0, 1.0) == doctest::Approx(3.0));
    }

    TEST_CASE("separable set agrees with a brute-force grid")
    {
        const auto xs = separable20();
        TrainConfig cfg;
        cfg.C = 1.0;
        cfg.epochs = 200;
        const auto m = train(xs, cfg);

        double best = std::numeric_limits<double>::infinity();
        double bw0 = 0, bw1 = 0, bb = 0;
        for (int i = -30; i <= 30; ++i)
            for (int j = -30; j <= 30; ++j)
                for (int k = -30; k <= 30; ++k) {
                    const double w0 = 0.1 * i, w1 = 0.1 * j, b = 0.1 * k;
                    double obj = 0.5 * (w0 * w0 + w1 * w1);
                    for (const auto& e : xs) {
                        const double y = e.keyword ? 1.0 : -1.0;
                        obj += std::max(0.0, 1.0 - y * (w0 * e.features.value_at(0) + w1 * e.features.value_at(1) + b));
                    }
                    if (obj < best) {
                        best = obj;
                        bw0 = w0, bw1 = w1, bb = b;
                    }
                }
        CHECK(labels_of(m.weights[0], m.weights[1], m.bias, xs) == labels_of(bw0, bw1, bb, xs));
        for (const auto& e : xs)
            CHECK((decision_value(m, e.features) >= 0.0) == e.keyword);
        CHECK(svm_objective(m, xs, 1.0, 1.0) <= best + 0.05);
    }

    TEST_CASE("training errors")
    {
        CHECK(error_of([] { train(std::vector{point(1, 0, true)}, {}); }) == ErrorCode::single_class);
        auto odd = point(1, 0, false);
        odd.features.dimension = 3;
        CHECK(error_of([&] { train(std::vector{point(1, 0, true), odd}, {}); }) == ErrorCode::dimension_mismatch);
        TrainConfig bad;
        bad.C = 0.0;
        CHECK(error_of([&] { train(std::vector{point(1, 0, true), point(-1, 0, false)}, bad); }) ==
              ErrorCode::invalid_argument);
    }

    TEST_CASE("decision value")
    {
        LinearModel m;
        m.weights = {2.0, -3.0, 0.5};
        m.bias = 0.25;
        WordFeatureVector zero;
        zero.dimension = 3;
        CHECK(decision_value(m, zero) == 0.25);

        m.bias = 0.0;
        WordFeatureVector x{{{0, 1.5}, {2, -4.0}}, 3, 0};
        WordFeatureVector x2{{{0, 3.0}, {2, -8.0}}, 3, 0};
        CHECK(decision_value(m, x2) == doctest::Approx(2.0 * decision_value(m, x)));
        double manual = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            manual += m.weights[j] * x.value_at(j);
        CHECK(decision_value(m, x) == doctest::Approx(manual));

        WordFeatureVector wrong{{}, 4, 0};
        CHECK(error_of([&] { decision_value(m, wrong); }) == ErrorCode::dimension_mismatch);
    }

    TEST_CASE("predict keywords")
    {
        auto doc = make_doc("v", 8.0,
                            {{"the", 0.0, 0.3}, {"quiet", 0.4, 0.9}, {"town", 1.0, 1.5}, {"had", 2.0, 2.4},
                             {"one", 3.0, 3.4}, {"volcano", 4.2, 4.9}, {"nearby", 5.0, 5.5}});
        doc = tag_pos(doc);
        const std::vector<TimedTranscript> corpus{doc};
        const auto space = build_feature_space(corpus, StopwordList::english(), universal_tagset());
        const auto m = spotlight_model(space, "volcano");
        const auto& lex = SentimentLexicon::shipped();

        const auto hits = predict_keywords(m, doc, space, lex);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].word_index == 5);

        CHECK(predict_keywords(m, doc, space, lex, std::numeric_limits<double>::infinity()).empty());
        const auto all = predict_keywords(m, doc, space, lex, -std::numeric_limits<double>::infinity());
        std::size_t candidates = 0;
        for (const auto& w : doc.words)
            candidates += !StopwordList::english().contains(w.norm);
        CHECK(all.size() == candidates);
        for (const auto& s : all)
            CHECK_FALSE(StopwordList::english().contains(doc.words[s.word_index].norm));
    }

    TEST_CASE("evaluate")
    {
        CHECK(round2(f1_score(0.61, 0.14)) == 0.23);
        CHECK(round2(f1_score(0.30, 0.23)) == 0.26);
        CHECK(f1_score(0.0, 0.0) == 0.0);

        const std::set<int> t{1, 4, 9};
        const auto same = evaluate(t, t);
        CHECK(same.precision == 1.0);
        CHECK(same.recall == 1.0);
        CHECK(same.f1 == 1.0);

        const auto none = evaluate(std::set<int>{}, t);
        CHECK(none.precision == 1.0);
        CHECK(none.recall == 0.0);
        CHECK(none.f1 == 0.0);

        const auto half = evaluate(std::set<int>{1, 2}, t);
        CHECK(half.true_positives == 1);
        CHECK(half.false_positives == 1);
        CHECK(half.false_negatives == 2);
        CHECK(half.precision == 0.5);
        CHECK(half.recall == doctest::Approx(1.0 / 3.0));

        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            const double p = u(rng), r = u(rng);
            const double f = f1_score(p, r);
            CHECK(f >= std::min(p, r) - 1e-12);
            CHECK(f <= std::max(p, r) + 1e-12);
        }
    }

    TEST_CASE("pr curve")
    {
        const std::vector<ScoredLabel> perfect{{0.9, true}, {0.8, true}, {0.2, false}, {-0.4, false}};
        const auto curve = pr_curve(perfect);
        bool found = false;
        for (const auto& p : curve)
            found |= p.precision == 1.0 && p.recall == 1.0;
        CHECK(found);

        const auto above = precision_recall_at(perfect, 5.0);
        CHECK(above.recall == 0.0);
        CHECK(above.precision == 1.0);

        const std::vector<ScoredLabel> six{{0.7, true}, {0.1, false}, {0.4, true}, {0.4, false}, {-0.2, true}, {0.9, false}};
        const auto got = pr_curve(six);
        const auto want = pr_sweep_oracle(six);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].threshold == want[i].threshold);
            CHECK(got[i].precision == doctest::Approx(want[i].precision));
            CHECK(got[i].recall == doctest::Approx(want[i].recall));
            if (i > 0)
                CHECK(got[i].recall <= got[i - 1].recall);
        }
    }

    TEST_CASE("select threshold")
    {
        const std::vector<PrPoint> curve{{0.1, 0.4, 0.9}, {0.5, 0.62, 0.6}, {0.9, 0.8, 0.2}};
        CHECK(select_threshold(curve, 0.6) == 0.5);
        CHECK(select_threshold(curve, 0.0) == 0.1);
        CHECK(error_of([&] { select_threshold(curve, 0.95); }) == ErrorCode::infeasible);
        CHECK(error_of([] { select_threshold(std::vector<PrPoint>{}, 0.6); }) == ErrorCode::invalid_argument);
    }

    TEST_CASE("keyword labels need two experts")
    {
        const auto doc = make_doc("v", 5.0, {{"a", 0.0, 0.4}, {"b", 1.0, 1.4}, {"c", 2.0, 2.4}});
        const std::vector<EditSet> edits{{"v", "e1", {{1.0, 1.0, "b"}, {2.0, 1.0, "c"}}},
                                         {"v", "e2", {{1.1, 0.5, "b"}}}};
        CHECK(keyword_labels(doc, edits) == std::vector<bool>{false, true, false});
        CHECK(keyword_labels(doc, edits, 1) == std::vector<bool>{false, true, true});
    }

    TEST_CASE("cross validation folds and leakage")
    {
        const auto corpus = make_planted_corpus({5, 120, 40, 11});
        const auto data = label_planted(corpus);
        const auto report = cross_validate(data.videos, {});
        REQUIRE(report.folds.size() == 5);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(report.folds[i].video_id == data.videos[i].video_id);
        CHECK(report.leakage.empty());

        auto dup = data.videos;
        dup.push_back(dup[2]);
        dup.back().video_id = "copy-of-2";
        const auto leaky = detect_leakage(dup);
        REQUIRE(leaky.size() == 1);
        CHECK(leaky[0].first == data.videos[2].video_id);
        CHECK(leaky[0].second == "copy-of-2");

        CHECK(error_of([&] { cross_validate(std::span(data.videos).first(1), {}); }) == ErrorCode::invalid_argument);
    }

    TEST_CASE("held-out video does not influence its fold")
    {
        const auto corpus = make_planted_corpus({3, 120, 40, 12});
        const auto data = label_planted(corpus);
        auto perturbed = data.videos;
        for (auto& e : perturbed[0].examples)
            e.keyword = !e.keyword;
        const auto a = cross_validate(data.videos, {});
        const auto b = cross_validate(perturbed, {});
        for (std::size_t k = 0; k < a.folds[0].scores.size(); ++k)
            CHECK(a.folds[0].scores[k].score == b.folds[0].scores[k].score);
    }

    TEST_CASE("model round trip and determinism")
    {
        const auto corpus = make_planted_corpus({2, 200, 40, 13});
        const auto data = label_planted(corpus);
        std::vector<LabeledExample> all;
        for (const auto& v : data.videos)
            all.insert(all.end(), v.examples.begin(), v.examples.end());
        const auto m = train(all, {}, data.space.id());
        const auto text = serialize_model(m);
        CHECK(serialize_model(train(all, {}, data.space.id())) == text);
        const auto back = parse_model(text);
        CHECK(back.weights == m.weights);
        CHECK(back.bias == m.bias);
        CHECK(back.feature_space_id == data.space.id());
        CHECK(serialize_model(back) == text);
        CHECK(error_of([] { parse_model(R"({"format":"nope"})"); }) == ErrorCode::invalid_document);
    }
}
