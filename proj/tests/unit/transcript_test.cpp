#include <bscript/transcript.hpp>

#include "helpers.hpp"

using namespace bscript;
using namespace bscript::testing;

TEST_SUITE("transcript")
{
    TEST_CASE("parse normalizes words")
    {
        const auto t = parse_transcript(R"({"video_id":"v","duration_s":1.0,"language":"en","words":[
            {"text":"Hello","start_s":0.0,"end_s":0.4,"pos":null},
            {"text":"world.","start_s":0.4,"end_s":0.9,"pos":null}]})");
        REQUIRE(t.words.size() == 2);
        CHECK(t.words[0].norm == "hello");
        CHECK(t.words[1].norm == "world");
        CHECK(t.words[1].index == 1);
    }

    TEST_CASE("end before start is rejected")
    {
        try {
            parse_transcript(R"({"video_id":"v","duration_s":1.0,"words":[
                {"text":"a","start_s":0.5,"end_s":0.3}]})");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::invalid_document);
            CHECK(std::string(e.what()).find("end before start") != std::string::npos);
        }
    }

    TEST_CASE("span outside the video and overlaps are rejected")
    {
        CHECK(error_of([] {
                  parse_transcript(R"({"video_id":"v","duration_s":1.0,"words":[{"text":"a","start_s":0.5,"end_s":1.3}]})");
              }) == ErrorCode::invalid_document);
        CHECK(error_of([] {
                  parse_transcript(R"({"video_id":"v","duration_s":2.0,"words":[
                      {"text":"a","start_s":0.0,"end_s":0.6},{"text":"b","start_s":0.5,"end_s":0.9}]})");
              }) == ErrorCode::invalid_document);
        CHECK(error_of([] { parse_transcript("{not json"); }) == ErrorCode::invalid_document);
    }

    TEST_CASE("mini fixture")
    {
        const auto t = load_transcript(fixture("mini.transcript.json"));
        REQUIRE(t.words.size() == 3);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(t.words[i].index == i);
        CHECK(t.duration_s == 2.0);
        CHECK(t.words[1].norm == "b-roll");
        CHECK(t.words[1].pos_tag == std::optional<std::string>("NOUN"));
        CHECK_FALSE(t.words[0].pos_tag.has_value());
    }

    TEST_CASE("punctuation-only tokens are dropped")
    {
        const auto t = parse_transcript(R"({"video_id":"v","duration_s":2.0,"words":[
            {"text":"so","start_s":0.0,"end_s":0.3},{"text":"--","start_s":0.3,"end_s":0.4},
            {"text":"yes","start_s":0.5,"end_s":0.9}]})");
        REQUIRE(t.words.size() == 2);
        CHECK(t.words[1].norm == "yes");
        CHECK(t.words[1].index == 1);
    }

    TEST_CASE("normalization keeps internal apostrophes")
    {
        CHECK(normalize_token("I'm") == "i'm");
        CHECK(normalize_token("\xE2\x80\x9C" "Don\xE2\x80\x99" "t!\xE2\x80\x9D") == "don't");
        CHECK(normalize_token("...") == "");
        CHECK(normalize_token("B-roll,") == "b-roll");
    }

    TEST_CASE("round trip")
    {
        const auto t = load_transcript(fixture("talk30.transcript.json"));
        CHECK(parse_transcript(serialize_transcript(t)) == t);
    }

    TEST_CASE("stopwords")
    {
        const auto& stops = StopwordList::english();
        const auto word = [](const char* text) {
            TimedWord w;
            w.text = text;
            w.norm = normalize_token(text);
            return w;
        };
        CHECK(is_stopword(word("the"), stops));
        CHECK(is_stopword(word("and"), stops));
        CHECK_FALSE(is_stopword(word("happiness"), stops));
        CHECK(is_stopword(word("The"), stops));
        CHECK(stops.size() > 100);
        const StopwordList custom({"Foo", "bar"}, "custom");
        CHECK(custom.contains("foo"));
        CHECK(error_of([] { StopwordList({}, "empty"); }) == ErrorCode::invalid_argument);
    }

    TEST_CASE("word at time")
    {
        const auto adjacent = make_doc("v", 2.0, {{"a", 0.0, 0.5}, {"b", 0.5, 1.0}});
        CHECK(word_at_time(adjacent, 0.7) == std::optional<std::size_t>(1));
        CHECK(word_at_time(adjacent, 0.5) == std::optional<std::size_t>(1));
        CHECK(word_at_time(adjacent, 0.0) == std::optional<std::size_t>(0));
        CHECK_FALSE(word_at_time(adjacent, 1.5).has_value());
        CHECK(error_of([&] { word_at_time(adjacent, 2.5); }) == ErrorCode::out_of_range);
        CHECK(error_of([&] { word_at_time(adjacent, -0.1); }) == ErrorCode::out_of_range);

        const auto gap = make_doc("v", 2.0, {{"a", 0.0, 0.5}, {"b", 1.0, 1.5}});
        CHECK(word_at_time(gap, 0.7) == std::optional<std::size_t>(1));
    }

    TEST_CASE("word at time is monotone and hits midpoints")
    {
        const auto t = load_transcript(fixture("talk30.transcript.json"));
        for (const auto& w : t.words)
            CHECK(word_at_time(t, 0.5 * (w.start_s + w.end_s)) == std::optional<std::size_t>(w.index));
        std::size_t last = 0;
        for (double s = 0.0; s <= t.duration_s; s += 0.05) {
            const auto i = word_at_time(t, s);
            if (!i)
                continue;
            CHECK(*i >= last);
            last = *i;
        }
    }

    TEST_CASE("words in window")
    {
        const auto t = make_doc("v", 4.0, {{"a", 0.0, 0.5}, {"b", 0.9, 1.1}, {"c", 2.5, 3.0}});
        CHECK(words_in_window(t, 1.0, 1.0) == WordRange{0, 2});
        CHECK(words_in_window(t, 2.0, 10.0) == WordRange{0, 3});
        const auto late = make_doc("v", 4.0, {{"a", 2.0, 2.5}});
        CHECK(words_in_window(late, 0.5, 0.1).empty());
        CHECK(error_of([&] { words_in_window(t, 1.0, 0.0); }) == ErrorCode::invalid_argument);

        const auto talk = load_transcript(fixture("talk30.transcript.json"));
        for (double r1 : {0.2, 0.7, 1.5}) {
            const auto small = words_in_window(talk, 12.0, r1);
            const auto big = words_in_window(talk, 12.0, r1 + 0.5);
            CHECK(big.first <= small.first);
            CHECK(big.last >= small.last);
        }
    }
}
