#include <bscript/recommend.hpp>

#include "helpers.hpp"

using namespace bscript;
using namespace bscript::testing;

namespace {

Recommendation rec(double start, double dur, std::string query, std::optional<double> score = std::nullopt)
{
    Recommendation r;
    r.start_s = start;
    r.duration_s = dur;
    r.query = std::move(query);
    r.score = score;
    return r;
}

void check_clamp(const std::vector<Recommendation>& recs, double video_s)
{
    for (const auto& r : recs) {
        CHECK(r.duration_s >= kMinBRollDuration - 1e-9);
        CHECK(r.duration_s <= kMaxBRollDuration + 1e-9);
        CHECK(r.start_s >= 0.0);
        CHECK(r.end_s() <= video_s + 1e-9);
        CHECK_FALSE(r.query.empty());
    }
}

}  // namespace

TEST_SUITE("recommend")
{
    TEST_CASE("clamp span")
    {
        auto s = clamp_span(2.0, 12.0, 30.0);
        CHECK(s->duration_s == 8.0);
        s = clamp_span(2.0, 0.1, 30.0);
        CHECK(s->duration_s == 0.5);
        s = clamp_span(29.0, 2.0, 30.0);
        CHECK(s->start_s == 29.0);
        CHECK(s->duration_s == doctest::Approx(1.0));
        s = clamp_span(29.8, 2.0, 30.0);
        CHECK(s->start_s == doctest::Approx(29.5));
        CHECK(s->duration_s == doctest::Approx(0.5));
        CHECK_FALSE(clamp_span(0.0, 1.0, 0.3).has_value());
    }

    TEST_CASE("interval slots")
    {
        const auto talk = load_transcript(fixture("talk30.transcript.json"));
        const auto recs = recommend_interval(talk);
        REQUIRE(recs.size() == 3);
        CHECK(recs[0].start_s == 9.0);
        CHECK(recs[1].start_s == 18.0);
        CHECK(recs[2].start_s == 27.0);
        CHECK(recs[0].query == "passion");
        for (const auto& r : recs) {
            CHECK(r.duration_s == 2.0);
            CHECK(r.source == RecommendationSource::interval);
            CHECK(r.query == talk.words[r.anchor_word_index].norm);
        }
        CHECK(recommend_interval(make_doc("short", 8.0, {{"a", 0.0, 7.9}})).empty());
        CHECK(error_of([&] { recommend_interval(talk, 0.0); }) == ErrorCode::invalid_argument);
    }

    TEST_CASE("interval slots snap forward and skip after the last word")
    {
        const auto doc = make_doc("v", 30.0, {{"early", 8.0, 8.5}, {"late", 26.0, 26.5}});
        const auto recs = recommend_interval(doc);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].start_s == 9.0);
        CHECK(recs[0].query == "late");
        CHECK(recs[1].start_s == 18.0);
    }

    TEST_CASE("interval duration trimmed at the end")
    {
        const auto doc = make_doc("v", 19.0, {{"a", 8.0, 8.5}, {"b", 17.5, 18.9}});
        const auto recs = recommend_interval(doc);
        REQUIRE(recs.size() == 2);
        CHECK(recs[1].start_s == 18.0);
        CHECK(recs[1].duration_s == doctest::Approx(1.0));
    }

    TEST_CASE("expert aggregation")
    {
        ProbabilityTrack flat;
        flat.bin_s = 0.1;
        flat.duration_s = 30.0;
        flat.n_edits = 1;
        flat.values.assign(300, 0.25);
        const auto doc = make_doc("v", 30.0, {{"work", 10.0, 10.4}, {"stress", 11.0, 11.5}});
        CHECK(recommend_expert(flat, {}, doc).empty());

        auto bump = flat;
        bump.values.assign(300, 0.0);
        for (std::size_t k = 100; k < 130; ++k)
            bump.values[k] = 0.5;
        const std::vector<EditSet> edits{{"v", "a", {{10.0, 3.0, "stress"}}},
                                         {"v", "b", {{10.2, 2.0, "stress"}}},
                                         {"v", "c", {{10.5, 1.0, "work"}}},
                                         {"v", "d", {{11.0, 2.0, "stress"}}}};
        const auto recs = recommend_expert(bump, edits, doc);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].start_s == doctest::Approx(10.0));
        CHECK(recs[0].duration_s == doctest::Approx(3.0));
        CHECK(recs[0].query == "stress");
        CHECK(recs[0].source == RecommendationSource::expert);

        ProbabilityTrack empty;
        CHECK(error_of([&] { recommend_expert(empty, edits, doc); }) == ErrorCode::invalid_argument);
    }

    TEST_CASE("expert runs are clamped and disjoint")
    {
        ProbabilityTrack t;
        t.bin_s = 0.1;
        t.duration_s = 30.0;
        t.n_edits = 2;
        t.values.assign(300, 0.0);
        for (std::size_t k = 0; k < 120; ++k)
            t.values[k] = 1.0;
        t.values[200] = 1.0;
        const auto doc = make_doc("v", 30.0, {{"start", 0.0, 0.5}, {"blip", 20.0, 20.3}});
        const std::vector<EditSet> edits{{"v", "a", {{0.0, 8.0, "start"}, {20.0, 0.5, "blip"}}},
                                         {"v", "b", {{0.0, 8.0, "start"}, {20.0, 0.5, "blip"}}}};
        const auto recs = recommend_expert(t, edits, doc);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].duration_s == 8.0);
        CHECK(recs[1].duration_s == 0.5);
        CHECK(recs[0].end_s() <= recs[1].start_s);
        check_clamp(recs, 30.0);
    }

    TEST_CASE("algorithmic duration is clamped near the end")
    {
        const auto doc = tag_pos(make_doc("v", 10.0, {{"quiet", 1.0, 1.5}, {"volcano", 9.0, 9.6}}));
        const std::vector<TimedTranscript> corpus{doc};
        const auto space = build_feature_space(corpus, StopwordList::english(), universal_tagset());
        LinearModel m;
        m.weights.assign(space.dimension(), 0.0);
        m.weights[*space.column_of("volcano")] = 1.0;
        m.bias = -0.5;
        m.feature_space_id = space.id();
        const auto recs = recommend_algorithmic(m, doc, space, SentimentLexicon::shipped(), 10);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].start_s == 9.0);
        CHECK(recs[0].duration_s == doctest::Approx(1.0));
        CHECK(recs[0].query == "volcano");
        CHECK(recs[0].score.has_value());

        m.bias = -100.0;
        CHECK(recommend_algorithmic(m, doc, space, SentimentLexicon::shipped(), 10).empty());
    }

    TEST_CASE("algorithmic keeps the best max_n in time order")
    {
        const auto doc = tag_pos(make_doc("v", 20.0, {{"alpha", 1.0, 1.5}, {"beta", 4.2, 4.7}, {"gamma", 8.0, 8.5}}));
        const std::vector<TimedTranscript> corpus{doc};
        const auto space = build_feature_space(corpus, StopwordList::english(), universal_tagset());
        LinearModel m;
        m.weights.assign(space.dimension(), 0.0);
        m.weights[*space.column_of("alpha")] = 1.0;
        m.weights[*space.column_of("beta")] = 3.0;
        m.weights[*space.column_of("gamma")] = 2.0;
        m.feature_space_id = space.id();
        const auto recs = recommend_algorithmic(m, doc, space, SentimentLexicon::shipped(), 2);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].query == "beta");
        CHECK(recs[0].start_s == 4.2);
        CHECK(recs[0].duration_s == 2.0);
        CHECK(recs[1].query == "gamma");
        for (const auto& r : recs)
            CHECK(r.query == doc.words[r.anchor_word_index].norm);
    }

    TEST_CASE("normalize")
    {
        const std::vector<Recommendation> disjoint{rec(1.0, 2.0, "a"), rec(5.0, 2.0, "b")};
        CHECK(normalize(disjoint, 30.0) == disjoint);

        const auto kept = normalize({rec(1.0, 2.0, "low", 0.2), rec(2.0, 2.0, "high", 0.9)}, 30.0);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].query == "high");

        const auto tie = normalize({rec(2.0, 2.0, "later"), rec(1.0, 2.0, "earlier")}, 30.0);
        REQUIRE(tie.size() == 1);
        CHECK(tie[0].query == "earlier");

        const auto sorted = normalize({rec(9.0, 1.0, "c"), rec(1.0, 1.0, "a"), rec(5.0, 1.0, "b")}, 30.0);
        REQUIRE(sorted.size() == 3);
        CHECK(sorted[0].query == "a");
        CHECK(sorted[2].query == "c");

        const auto clamped = normalize({rec(0.0, 12.0, "long"), rec(29.9, 3.0, "tail")}, 30.0);
        check_clamp(clamped, 30.0);
    }

    TEST_CASE("query normalization and json")
    {
        CHECK(normalize_query("  Happy,  Dogs! ") == "happy dogs");
        CHECK(parse_source("expert") == std::optional(RecommendationSource::expert));
        CHECK_FALSE(parse_source("random").has_value());
        const std::vector<Recommendation> recs{rec(1.0, 2.0, "a", 0.5), rec(4.0, 2.0, "b")};
        CHECK(recommendations_from_json(recommendations_to_json(recs)) == recs);
        CHECK(error_of([] { recommendations_from_json("[{]"); }) == ErrorCode::invalid_document);
    }
}
