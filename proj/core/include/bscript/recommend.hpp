#pragma once

#include "bscript/agreement.hpp"
#include "bscript/classifier.hpp"
#include "bscript/edits.hpp"
#include "bscript/features.hpp"
#include "bscript/transcript.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bscript {

enum class RecommendationSource { algorithmic, expert, interval };

std::string_view to_string(RecommendationSource source) noexcept;
std::optional<RecommendationSource> parse_source(std::string_view name) noexcept;

struct Recommendation {
    double start_s = 0.0;
    double duration_s = 0.0;
    std::string query;
    RecommendationSource source = RecommendationSource::interval;
    std::optional<double> score;
    std::size_t anchor_word_index = 0;

    double end_s() const noexcept { return start_s + duration_s; }
    bool operator==(const Recommendation&) const = default;
};

struct ClampedSpan {
    double start_s = 0.0;
    double duration_s = 0.0;
};

/// Clamps duration to [0.5, 8] s and trims it at the video end. When fewer
/// than 0.5 s remain the span is shifted back to end at the video end.
/// Empty only when the video itself is shorter than 0.5 s.
std::optional<ClampedSpan> clamp_span(double start_s, double duration_s, double video_duration_s);

inline constexpr double kAlgorithmicDuration = 2.0;
inline constexpr double kIntervalPeriod = 9.0;
inline constexpr double kIntervalDuration = 2.0;

/// Predicted keywords become 2 s recommendations at their start word; the
/// max_n best-scoring are kept, returned in time order.
std::vector<Recommendation> recommend_algorithmic(const LinearModel& model, const TimedTranscript& doc,
                                                  const FeatureSpace& space, const SentimentLexicon& lexicon,
                                                  std::size_t max_n);

/// Maximal runs of bins strictly above the track mean become recommendations;
/// the query is the modal query among overlapping insertions (ties go to the
/// earliest-starting insertion). Throws Error(invalid_argument) on an empty track.
std::vector<Recommendation> recommend_expert(const ProbabilityTrack& track, std::span<const EditSet> edits,
                                             const TimedTranscript& doc);

/// Slots at period, 2*period, ... while slot + 0.5 s fits; query is the word
/// at the slot (slots without a word are skipped).
std::vector<Recommendation> recommend_interval(const TimedTranscript& doc, double period_s = kIntervalPeriod,
                                               double duration_s = kIntervalDuration);

/// Sorts by start, re-applies clamps and resolves overlaps by keeping the
/// higher score (the earlier one for equal or absent scores).
std::vector<Recommendation> normalize(std::vector<Recommendation> recs, double video_duration_s);

/// Lowercased, punctuation-stripped tokens joined by single spaces.
std::string normalize_query(std::string_view query);

std::string recommendations_to_json(std::span<const Recommendation> recs);
std::vector<Recommendation> recommendations_from_json(std::string_view document);

}  // namespace bscript
