#include "bscript/recommend.hpp"

#include "bscript/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {

constexpr double kEps = 1e-9;
constexpr double kTrackTolerance = 1e-12;

std::size_t anchor_at(const TimedTranscript& doc, double time_s)
{
    const double t = std::clamp(time_s, 0.0, doc.duration_s);
    if (const auto idx = word_at_time(doc, t))
        return *idx;
    return doc.words.empty() ? 0 : doc.words.size() - 1;
}

}  // namespace

std::string_view to_string(RecommendationSource source) noexcept
{
    switch (source) {
    case RecommendationSource::algorithmic: return "algorithmic";
    case RecommendationSource::expert: return "expert";
    case RecommendationSource::interval: return "interval";
    }
    return "interval";
}

std::optional<RecommendationSource> parse_source(std::string_view name) noexcept
{
    if (name == "algorithmic")
        return RecommendationSource::algorithmic;
    if (name == "expert")
        return RecommendationSource::expert;
    if (name == "interval")
        return RecommendationSource::interval;
    return std::nullopt;
}

std::optional<ClampedSpan> clamp_span(double start_s, double duration_s, double video_duration_s)
{
    if (video_duration_s < kMinBRollDuration - kEps)
        return std::nullopt;
    double start = std::max(start_s, 0.0);
    double duration = std::clamp(duration_s, kMinBRollDuration, kMaxBRollDuration);
    if (start + duration > video_duration_s)
        duration = video_duration_s - start;
    if (duration < kMinBRollDuration) {
        start = video_duration_s - kMinBRollDuration;
        duration = kMinBRollDuration;
    }
    return ClampedSpan{start, duration};
}

std::string normalize_query(std::string_view query)
{
    std::istringstream in{std::string(query)};
    std::string out;
    for (std::string tok; in >> tok;) {
        std::string norm = normalize_token(tok);
        if (norm.empty())
            continue;
        if (!out.empty())
            out += ' ';
        out += norm;
    }
    return out;
}

std::vector<Recommendation> recommend_algorithmic(const LinearModel& model, const TimedTranscript& doc,
                                                  const FeatureSpace& space, const SentimentLexicon& lexicon,
                                                  std::size_t max_n)
{
    std::vector<ScoredWord> hits = predict_keywords(model, doc, space, lexicon);
    std::stable_sort(hits.begin(), hits.end(), [](const ScoredWord& a, const ScoredWord& b) { return a.score > b.score; });
    if (hits.size() > max_n)
        hits.resize(max_n);

    std::vector<Recommendation> out;
    for (const ScoredWord& hit : hits) {
        const TimedWord& word = doc.words[hit.word_index];
        const auto span = clamp_span(word.start_s, kAlgorithmicDuration, doc.duration_s);
        if (!span)
            continue;
        out.push_back({span->start_s, span->duration_s, word.norm, RecommendationSource::algorithmic, hit.score,
                       hit.word_index});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Recommendation& a, const Recommendation& b) { return a.start_s < b.start_s; });
    return out;
}

std::vector<Recommendation> recommend_expert(const ProbabilityTrack& track, std::span<const EditSet> edits,
                                             const TimedTranscript& doc)
{
    if (track.values.empty())
        throw Error(ErrorCode::invalid_argument, "empty probability track");
    const double mean = track.mean();
    const auto above = [&](std::size_t i) { return track.values[i] > mean + kTrackTolerance; };

    std::vector<Recommendation> out;
    for (std::size_t i = 0; i < track.values.size();) {
        if (!above(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < track.values.size() && above(j))
            ++j;
        const double run_start = track.time_of(i);
        const double run_end = std::min(track.time_of(j), track.duration_s);

        // Modal query among insertions overlapping the run; ties go to the
        // query whose first overlapping insertion starts earliest.
        std::map<std::string, std::pair<int, double>> tally;
        for (const EditSet& set : edits) {
            for (const EditInsertion& ins : set.insertions) {
                if (ins.start_s < run_end && ins.end_s() > run_start) {
                    std::string q = normalize_query(ins.query);
                    if (q.empty())
                        continue;
                    auto [it, fresh] = tally.try_emplace(std::move(q), 0, ins.start_s);
                    ++it->second.first;
                    it->second.second = std::min(it->second.second, ins.start_s);
                }
            }
        }
        std::string query;
        int best_count = 0;
        double best_start = std::numeric_limits<double>::infinity();
        for (const auto& [q, stat] : tally) {
            if (stat.first > best_count || (stat.first == best_count && stat.second < best_start)) {
                query = q;
                best_count = stat.first;
                best_start = stat.second;
            }
        }

        const auto span = clamp_span(run_start, run_end - run_start, track.duration_s);
        if (span && !query.empty())
            out.push_back({span->start_s, span->duration_s, query, RecommendationSource::expert,
                           std::nullopt, anchor_at(doc, span->start_s)});
        i = j;
    }
    return out;
}

std::vector<Recommendation> recommend_interval(const TimedTranscript& doc, double period_s, double duration_s)
{
    if (!(period_s > 0.0))
        throw Error(ErrorCode::invalid_argument, "interval period must be positive");
    std::vector<Recommendation> out;
    for (int k = 1;; ++k) {
        const double t = period_s * k;
        if (t + kMinBRollDuration > doc.duration_s + kEps)
            break;
        const auto idx = word_at_time(doc, t);
        if (!idx)
            continue;
        const auto span = clamp_span(t, std::min(duration_s, doc.duration_s - t), doc.duration_s);
        if (!span)
            continue;
        out.push_back({span->start_s, span->duration_s, doc.words[*idx].norm, RecommendationSource::interval,
                       std::nullopt, *idx});
    }
    return out;
}

std::vector<Recommendation> normalize(std::vector<Recommendation> recs, double video_duration_s)
{
    std::vector<Recommendation> clamped;
    for (Recommendation& r : recs) {
        const auto span = clamp_span(r.start_s, r.duration_s, video_duration_s);
        if (!span || r.query.empty())
            continue;
        r.start_s = span->start_s;
        r.duration_s = span->duration_s;
        clamped.push_back(std::move(r));
    }
    std::stable_sort(clamped.begin(), clamped.end(),
                     [](const Recommendation& a, const Recommendation& b) { return a.start_s < b.start_s; });

    // Priority: higher score first, absent scores last, then earlier start.
    std::vector<std::size_t> order(clamped.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    const double none = -std::numeric_limits<double>::infinity();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return clamped[a].score.value_or(none) > clamped[b].score.value_or(none);
    });

    std::vector<bool> keep(clamped.size(), false);
    std::vector<std::size_t> kept;
    for (const std::size_t i : order) {
        const bool clash = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
            return clamped[i].start_s < clamped[k].end_s() - kEps && clamped[k].start_s < clamped[i].end_s() - kEps;
        });
        if (!clash) {
            keep[i] = true;
            kept.push_back(i);
        }
    }
    std::vector<Recommendation> out;
    for (std::size_t i = 0; i < clamped.size(); ++i) {
        if (keep[i])
            out.push_back(std::move(clamped[i]));
    }
    return out;
}

std::string recommendations_to_json(std::span<const Recommendation> recs)
{
    json doc = json::array();
    for (const Recommendation& r : recs) {
        doc.push_back({{"start_s", r.start_s},
                       {"duration_s", r.duration_s},
                       {"query", r.query},
                       {"source", std::string(to_string(r.source))},
                       {"score", r.score ? json(*r.score) : json(nullptr)},
                       {"anchor_word_index", r.anchor_word_index}});
    }
    return doc.dump();
}

std::vector<Recommendation> recommendations_from_json(std::string_view document)
{
    try {
        std::vector<Recommendation> out;
        for (const json& j : json::parse(document)) {
            Recommendation r;
            r.start_s = j.at("start_s").get<double>();
            r.duration_s = j.at("duration_s").get<double>();
            r.query = j.at("query").get<std::string>();
            const auto source = parse_source(j.at("source").get<std::string>());
            if (!source)
                throw Error(ErrorCode::invalid_document, "unknown recommendation source");
            r.source = *source;
            if (!j.at("score").is_null())
                r.score = j.at("score").get<double>();
            r.anchor_word_index = j.value("anchor_word_index", std::size_t{0});
            out.push_back(std::move(r));
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("malformed recommendation list: ") + e.what());
    }
}

}  // namespace bscript
