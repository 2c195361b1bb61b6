#pragma once

#include "bscript/edits.hpp"
#include "bscript/transcript.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bscript {

inline constexpr double kDefaultBinSeconds = 0.1;

/// Bin i spans [i*bin_s, (i+1)*bin_s) and is covered by an insertion when the
/// bin centre lies in [start, start + duration). Returns sorted unique indices.
std::vector<std::size_t> covered_bins(const EditSet& edits, double bin_s = kDefaultBinSeconds);

/// |A ∩ B| / |A ∪ B| over covered bins; 1 when both are empty.
/// Throws Error(invalid_argument) for different videos or a non-positive bin.
double jaccard(const EditSet& a, const EditSet& b, double bin_s = kDefaultBinSeconds);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // population standard deviation
};

/// Mean and standard deviation of jaccard over all unordered pairs.
MeanSd mean_pairwise_jaccard(std::span<const EditSet> edits, double bin_s = kDefaultBinSeconds);

/// Places the template's insertion durations uniformly at random without
/// overlap. Throws Error(infeasible) when the durations exceed the video.
EditSet random_placement(const EditSet& tmpl, double video_duration_s, std::uint64_t seed);

/// Monte-Carlo Jaccard between randomly re-placed edit sets. Each trial draws
/// a pair of distinct templates (or reuses a single template twice) and
/// re-places both. Trial i is seeded from (seed, i).
double random_baseline_jaccard(std::span<const EditSet> templates, double video_duration_s, int trials,
                               std::uint64_t seed, double bin_s = kDefaultBinSeconds);

struct ProbabilityTrack {
    double bin_s = kDefaultBinSeconds;
    double duration_s = 0.0;
    std::size_t n_edits = 0;
    std::vector<double> values;

    double mean() const;
    double time_of(std::size_t bin) const { return static_cast<double>(bin) * bin_s; }
};

/// Per-bin fraction of edit sets covering that bin; ceil(duration / bin) bins.
ProbabilityTrack probability_track(std::span<const EditSet> edits, double duration_s,
                                   double bin_s = kDefaultBinSeconds);

struct BRollStats {
    std::vector<double> histogram_edges;
    std::vector<std::size_t> histogram_counts;
    std::vector<double> gaps_s;
    std::optional<double> median_gap_s;
    /// Mean over edit sets of covered time / video duration.
    double replaced_fraction = 0.0;
    double median_count = 0.0;
    std::size_t insertion_count = 0;
};

/// Gap = next start - previous end within one edit set.
/// Throws Error(not_found) when a video duration is missing.
BRollStats broll_stats(std::span<const EditSet> edits, const std::map<std::string, double>& video_durations,
                       std::vector<double> histogram_edges = {0.5, 1, 2, 3, 4, 5, 6, 7, 8});

/// Fraction of insertions whose query (any token of it, normalized) occurs as
/// a word within ±radius_s of the insertion start.
/// Throws Error(not_found) when a transcript is missing.
double query_locality(std::span<const EditSet> edits, const std::map<std::string, TimedTranscript>& transcripts,
                      double radius_s = 1.0);

struct VideoAgreement {
    std::string video_id;
    std::size_t n_edits = 0;
    MeanSd expert;
    double random = 0.0;
    ProbabilityTrack track;
};

struct AgreementOptions {
    double bin_s = kDefaultBinSeconds;
    int trials = 10'000;
    std::uint64_t seed = 7;
    double locality_radius_s = 1.0;
};

struct AgreementReport {
    std::vector<VideoAgreement> videos;
    /// Mean of per-video means, and sd over every pairwise coefficient.
    MeanSd expert;
    double random = 0.0;
    BRollStats stats;
    double query_locality = 0.0;
};

/// Every video with at least two edit sets and a transcript contributes.
AgreementReport analyze_agreement(const std::vector<EditSet>& corpus,
                                  const std::map<std::string, TimedTranscript>& transcripts,
                                  const AgreementOptions& options = {});

std::string to_json(const AgreementReport& report);
std::string to_csv(const AgreementReport& report);
std::string track_svg(const ProbabilityTrack& track, const std::string& title);

}  // namespace bscript
