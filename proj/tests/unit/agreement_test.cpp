#include <bscript/agreement.hpp>

#include "helpers.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

#include <cmath>

using namespace bscript;
using namespace bscript::testing;

namespace {

EditSet edits(std::string editor, std::vector<EditInsertion> ins, std::string video = "v")
{
    return {std::move(video), std::move(editor), std::move(ins)};
}

}  // namespace

TEST_SUITE("agreement")
{
    TEST_CASE("jaccard basics")
    {
        const auto a = edits("a", {{0.0, 2.0, "x"}, {5.0, 2.0, "y"}});
        const auto b = edits("b", {{1.0, 2.0, "z"}});
        CHECK(jaccard(a, b, 1.0) == doctest::Approx(0.2));
        CHECK(jaccard(a, a) == 1.0);
        CHECK(jaccard(a, edits("c", {{10.0, 2.0, "q"}})) == 0.0);
        CHECK(jaccard(edits("e", {}), edits("f", {})) == 1.0);
        CHECK(covered_bins(a, 1.0) == std::vector<std::size_t>{0, 1, 5, 6});
        CHECK(error_of([&] { jaccard(a, edits("d", {}, "other")); }) == ErrorCode::invalid_argument);
        CHECK(error_of([&] { jaccard(a, b, 0.0); }) == ErrorCode::invalid_argument);
    }

    TEST_CASE("jaccard matches enumeration on the talk fixture")
    {
        const auto corpus = load_edit_corpus(fixture("talk30.edits.json"));
        for (const auto& x : corpus)
            for (const auto& y : corpus) {
                CHECK(jaccard(x, y) == jaccard_oracle(x, y, kDefaultBinSeconds, 30.0));
                CHECK(jaccard(x, y) == jaccard(y, x));
            }
    }

    TEST_CASE("mean pairwise")
    {
        const auto a = edits("a", {{0.0, 2.0, "x"}, {5.0, 2.0, "y"}});
        const auto b = edits("b", {{1.0, 2.0, "z"}});
        const std::vector<EditSet> same{a, a, a};
        const auto s = mean_pairwise_jaccard(same);
        CHECK(s.mean == 1.0);
        CHECK(s.sd == 0.0);
        const auto pair = mean_pairwise_jaccard(std::vector{a, b}, 1.0);
        CHECK(pair.mean == doctest::Approx(0.2));
        CHECK(pair.sd == 0.0);
        CHECK(error_of([&] { mean_pairwise_jaccard(std::vector{a}); }) == ErrorCode::invalid_argument);

        const std::vector<EditSet> four{a, b, edits("c", {{0.5, 4.0, "q"}}), edits("d", {{6.0, 3.0, "r"}})};
        std::vector<double> js;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j)
                js.push_back(jaccard_oracle(four[i], four[j], kDefaultBinSeconds, 10.0));
        double mean = 0.0;
        for (double j : js)
            mean += j / 6.0;
        double var = 0.0;
        for (double j : js)
            var += (j - mean) * (j - mean) / 6.0;
        const auto got = mean_pairwise_jaccard(four);
        CHECK(got.mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(got.sd == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }

    TEST_CASE("random baseline")
    {
        const auto full = edits("a", {{0.0, 5.0, "x"}, {5.0, 5.0, "y"}});
        CHECK(random_baseline_jaccard(std::vector{full}, 10.0, 50, 1) == doctest::Approx(1.0));

        const auto tiny = edits("a", {{0.0, 1.0, "x"}});
        CHECK(random_baseline_jaccard(std::vector{tiny}, 10'000.0, 500, 2) < 0.01);

        CHECK(error_of([&] { random_baseline_jaccard(std::vector{edits("a", {{0.0, 8.0, "x"}, {8.0, 8.0, "y"}})}, 10.0, 5, 1); }) ==
              ErrorCode::infeasible);
        CHECK(error_of([&] { random_baseline_jaccard(std::vector{tiny}, 10.0, 0, 1); }) == ErrorCode::invalid_argument);
        CHECK(random_baseline_jaccard(std::vector{tiny}, 60.0, 100, 9) == random_baseline_jaccard(std::vector{tiny}, 60.0, 100, 9));
    }

    TEST_CASE("random baseline agrees with an independent simulation")
    {
        std::vector<EditInsertion> ins;
        for (int i = 0; i < 8; ++i)
            ins.push_back({20.0 * i, 3.0, "q"});
        const auto tmpl = edits("a", ins);
        const std::vector<double> durs(8, 3.0);
        const double lib = random_baseline_jaccard(std::vector{tmpl}, 180.0, 10'000, 21);
        const double oracle = random_baseline_oracle(durs, durs, 180.0, 10'000, 22, kDefaultBinSeconds);
        CHECK(std::abs(lib - oracle) <= 0.01);
    }

    TEST_CASE("random placement respects the template")
    {
        const auto tmpl = edits("a", {{0.0, 8.0, "x"}, {10.0, 0.5, "y"}, {20.0, 3.0, "z"}});
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto r = random_placement(tmpl, 30.0, seed);
            REQUIRE(r.insertions.size() == 3);
            validate(r, 30.0);
            std::vector<double> d;
            for (const auto& i : r.insertions)
                d.push_back(i.duration_s);
            std::sort(d.begin(), d.end());
            CHECK(d == std::vector<double>{0.5, 3.0, 8.0});
            for (std::size_t k = 1; k < r.insertions.size(); ++k)
                CHECK(r.insertions[k].start_s >= r.insertions[k - 1].end_s());
        }
    }

    TEST_CASE("probability track")
    {
        const std::vector<EditSet> three{edits("a", {{1.0, 1.0, "x"}}), edits("b", {{1.0, 1.0, "y"}}),
                                         edits("c", {{4.0, 1.0, "z"}})};
        const auto t = probability_track(three, 6.0, 1.0);
        REQUIRE(t.values.size() == 6);
        CHECK(t.values[1] == doctest::Approx(2.0 / 3.0));
        CHECK(t.values[4] == doctest::Approx(1.0 / 3.0));
        CHECK(t.values[0] == 0.0);
        CHECK(t.n_edits == 3);

        const auto corpus = load_edit_corpus(fixture("talk30.edits.json"));
        const auto track = probability_track(corpus, 30.0);
        CHECK(track.values.size() == 300);
        double covered = 0.0;
        std::size_t boundaries = 0;
        for (std::size_t k = 0; k < track.values.size(); ++k) {
            const double centre = (k + 0.5) * 0.1;
            int count = 0;
            for (const auto& e : corpus)
                for (const auto& i : e.insertions)
                    count += centre >= i.start_s && centre < i.end_s();
            CHECK(track.values[k] == doctest::Approx(count / 3.0));
            CHECK(track.values[k] >= 0.0);
            CHECK(track.values[k] <= 1.0);
        }
        for (const auto& e : corpus)
            for (const auto& i : e.insertions) {
                covered += i.duration_s;
                boundaries += 2;
            }
        double sum = 0.0;
        for (double v : track.values)
            sum += v;
        CHECK(std::abs(sum * 0.1 * 3.0 - covered) <= 0.1 * boundaries);
        CHECK(error_of([] { probability_track(std::vector<EditSet>{}, 5.0); }) == ErrorCode::invalid_argument);
    }

    TEST_CASE("broll stats")
    {
        const std::map<std::string, double> durations{{"v", 20.0}};
        const auto single = broll_stats(std::vector{edits("a", {{3.0, 2.0, "x"}})}, durations);
        CHECK(single.gaps_s.empty());
        CHECK_FALSE(single.median_gap_s.has_value());
        CHECK(single.replaced_fraction == doctest::Approx(0.1));

        const auto two = broll_stats(std::vector{edits("a", {{0.0, 2.0, "x"}, {11.0, 2.0, "y"}})}, durations);
        REQUIRE(two.gaps_s.size() == 1);
        CHECK(two.gaps_s[0] == doctest::Approx(9.0));
        CHECK(*two.median_gap_s == doctest::Approx(9.0));
        CHECK(two.median_count == 2.0);

        const auto corpus = load_edit_corpus(fixture("talk30.edits.json"));
        const auto s = broll_stats(corpus, {{"talk30", 30.0}});
        std::vector<double> gaps;
        double fraction = 0.0;
        std::size_t count = 0;
        for (const auto& e : corpus) {
            double covered = 0.0;
            for (std::size_t k = 0; k < e.insertions.size(); ++k) {
                covered += e.insertions[k].duration_s;
                if (k > 0)
                    gaps.push_back(e.insertions[k].start_s - e.insertions[k - 1].end_s());
            }
            fraction += covered / 30.0 / corpus.size();
            count += e.insertions.size();
        }
        std::sort(gaps.begin(), gaps.end());
        CHECK(s.insertion_count == count);
        CHECK(s.replaced_fraction == doctest::Approx(fraction));
        REQUIRE(s.gaps_s.size() == gaps.size());
        CHECK(*s.median_gap_s == doctest::Approx(gaps.size() % 2 ? gaps[gaps.size() / 2]
                                                                  : 0.5 * (gaps[gaps.size() / 2 - 1] + gaps[gaps.size() / 2])));
        std::size_t binned = 0;
        for (std::size_t c : s.histogram_counts)
            binned += c;
        CHECK(binned == count);
        CHECK(error_of([&] { broll_stats(corpus, {}); }) == ErrorCode::not_found);
    }

    TEST_CASE("query locality")
    {
        const auto doc = make_doc("v", 20.0,
                                  {{"my", 0.0, 0.3}, {"dog", 0.4, 0.8}, {"loves", 5.0, 5.4}, {"pizza", 5.5, 6.0},
                                   {"and", 10.0, 10.3}, {"coffee", 10.4, 10.9}});
        const std::map<std::string, TimedTranscript> docs{{"v", doc}};
        CHECK(query_locality(std::vector{edits("a", {{0.4, 1.0, "dog"}, {5.5, 1.0, "Pizza!"}})}, docs) == 1.0);
        CHECK(query_locality(std::vector{edits("a", {{0.4, 1.0, "cat"}})}, docs) == 0.0);
        const auto mixed = edits("a", {{0.0, 1.0, "dog"}, {4.6, 1.0, "pizza"}, {9.5, 1.0, "coffee"}, {15.0, 1.0, "tea"}});
        CHECK(query_locality(std::vector{mixed}, docs) == doctest::Approx(0.75));
        CHECK(error_of([&] { query_locality(std::vector{edits("a", {}, "w")}, docs); }) == ErrorCode::not_found);
    }

    TEST_CASE("clustered editors agree more than random")
    {
        const auto sets = make_clustered_edits({10, 6, 8, 300.0, 0.6, 4});
        const double expert = mean_pairwise_jaccard(sets).mean;
        const double random = random_baseline_jaccard(sets, 300.0, 500, 3);
        CHECK(expert > random);
    }

    TEST_CASE("report serializations")
    {
        const auto corpus = load_edit_corpus(fixture("talk30.edits.json"));
        const std::map<std::string, TimedTranscript> docs{{"talk30", load_transcript(fixture("talk30.transcript.json"))}};
        AgreementOptions opt;
        opt.trials = 200;
        const auto report = analyze_agreement(corpus, docs, opt);
        REQUIRE(report.videos.size() == 1);
        CHECK(report.videos[0].n_edits == 3);
        CHECK(report.expert.mean == doctest::Approx(mean_pairwise_jaccard(corpus).mean));
        CHECK(to_json(report).find("\"query_locality\"") != std::string::npos);
        CHECK(to_csv(report).rfind("video_id", 0) == 0);
        const auto svg = track_svg(report.videos[0].track, "talk30");
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
    }
}
