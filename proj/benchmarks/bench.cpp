#include <benchmark/benchmark.h>

#include <bscript/agreement.hpp>
#include <bscript/classifier.hpp>
#include <bscript/features.hpp>
#include <bscript/session.hpp>

#include <random>
#include <string>
#include <vector>

using namespace bscript;

namespace {

TimedTranscript make_doc(const std::string& id, std::size_t words, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 299);
    static const char* tags[] = {"NOUN", "VERB", "ADJ", "ADV"};
    TimedTranscript doc;
    doc.video_id = id;
    doc.duration_s = static_cast<double>(words) * 0.4;
    for (std::size_t i = 0; i < words; ++i) {
        TimedWord w;
        w.text = "t" + std::to_string(pick(rng));
        w.norm = w.text;
        w.start_s = static_cast<double>(i) * 0.4;
        w.end_s = w.start_s + 0.3;
        w.pos_tag = tags[i % 4];
        w.index = i;
        doc.words.push_back(std::move(w));
    }
    return doc;
}

EditSet make_edits(const std::string& editor, std::size_t n, double duration, std::uint64_t seed)
{
    EditSet set{"v", editor, {}};
    const double pitch = duration / static_cast<double>(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> off(0.0, pitch / 2);
    for (std::size_t i = 0; i < n; ++i)
        set.insertions.push_back({static_cast<double>(i) * pitch + off(rng), pitch / 3, "q"});
    return set;
}

}  // namespace

static void BM_Featurize(benchmark::State& state)
{
    const std::vector<TimedTranscript> corpus{make_doc("a", static_cast<std::size_t>(state.range(0)), 1),
                                              make_doc("b", 500, 2)};
    const FeatureSpace space = build_feature_space(corpus, StopwordList::english(), universal_tagset());
    const SentimentLexicon lexicon = SentimentLexicon::shipped();
    for (auto _ : state) {
        const DocumentFeaturizer featurizer(space, lexicon, corpus[0]);
        for (std::size_t i = 0; i < corpus[0].words.size(); ++i)
            if (featurizer.is_candidate(i))
                benchmark::DoNotOptimize(featurizer.featurize(i));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Featurize)->Arg(500)->Arg(4000);

static void BM_Train(benchmark::State& state)
{
    const std::vector<TimedTranscript> corpus{make_doc("a", static_cast<std::size_t>(state.range(0)), 3)};
    const FeatureSpace space = build_feature_space(corpus, StopwordList::english(), universal_tagset());
    const SentimentLexicon lexicon = SentimentLexicon::shipped();
    const DocumentFeaturizer featurizer(space, lexicon, corpus[0]);
    std::vector<LabeledExample> examples;
    for (std::size_t i = 0; i < corpus[0].words.size(); ++i)
        if (featurizer.is_candidate(i))
            examples.push_back({featurizer.featurize(i), corpus[0].words[i].pos_tag == "NOUN", "a", i});
    TrainConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(train(examples, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0) * cfg.epochs);
}
BENCHMARK(BM_Train)->Arg(1000)->Arg(8000)->Unit(benchmark::kMillisecond);

static void BM_Jaccard(benchmark::State& state)
{
    const double duration = 600.0;
    const auto n = static_cast<std::size_t>(state.range(0));
    const EditSet a = make_edits("a", n, duration, 4);
    const EditSet b = make_edits("b", n, duration, 5);
    for (auto _ : state)
        benchmark::DoNotOptimize(jaccard(a, b));
}
BENCHMARK(BM_Jaccard)->Arg(10)->Arg(100);

static void BM_PlaybackPlan(benchmark::State& state)
{
    const double duration = 3600.0;
    EditSession session("s", "v", duration);
    const BRollAsset asset{"asset", "fixture", "", 2.0, AssetStyle::social_media, ""};
    const auto n = state.range(0);
    for (long i = 0; i < n; ++i)
        session.insert(asset, static_cast<double>(i) * duration / static_cast<double>(n));
    for (auto _ : state)
        benchmark::DoNotOptimize(session.playback_plan());
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PlaybackPlan)->Arg(10)->Arg(500);

BENCHMARK_MAIN();
