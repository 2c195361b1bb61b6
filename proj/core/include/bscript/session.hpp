#pragma once

#include "bscript/edits.hpp"
#include "bscript/transcript.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bscript {

enum class AssetStyle { social_media, professional };

std::string_view to_string(AssetStyle style) noexcept;
std::optional<AssetStyle> parse_style(std::string_view name) noexcept;

struct BRollAsset {
    std::string asset_id;
    std::string provider;
    std::string url;
    double natural_duration_s = 0.0;
    AssetStyle style = AssetStyle::social_media;
    std::string thumbnail;

    bool operator==(const BRollAsset&) const = default;
};

/// Manual insertion, or one accepted from a recommendation.
struct InsertionOrigin {
    std::optional<std::string> recommendation_id;

    /// "manual" or "recommendation:<id>".
    std::string to_string() const;
    static InsertionOrigin parse(std::string_view text);
    bool operator==(const InsertionOrigin&) const = default;
};

struct BRollInsertion {
    std::string insertion_id;
    BRollAsset asset;
    double start_s = 0.0;
    double duration_s = 0.0;
    InsertionOrigin origin;

    double end_s() const noexcept { return start_s + duration_s; }
    bool operator==(const BRollInsertion&) const = default;
};

struct VisualSegment {
    /// Empty for A-roll.
    std::optional<std::string> asset_id;
    double source_in_s = 0.0;
    double source_out_s = 0.0;
    double timeline_in_s = 0.0;
    double timeline_out_s = 0.0;

    bool is_a_roll() const noexcept { return !asset_id.has_value(); }
    double length() const noexcept { return timeline_out_s - timeline_in_s; }
    bool operator==(const VisualSegment&) const = default;
};

/// Visual segments tile [0, duration]; the audio is the untouched A-roll.
struct PlaybackPlan {
    std::vector<VisualSegment> visual;
    double audio_in_s = 0.0;
    double audio_out_s = 0.0;
};

/// Transcript-anchored B-roll insertions on one A-roll video. Insertions are
/// kept sorted, never overlap, last 0.5 to 8 s and lie inside the video.
/// Mutations either succeed and bump the revision or throw and leave the
/// session unchanged.
class EditSession {
public:
    EditSession(std::string session_id, std::string video_id, double video_duration_s);

    const std::string& session_id() const noexcept { return session_id_; }
    const std::string& video_id() const noexcept { return video_id_; }
    double video_duration_s() const noexcept { return video_duration_s_; }
    std::uint64_t revision() const noexcept { return revision_; }
    const std::vector<BRollInsertion>& insertions() const noexcept { return insertions_; }
    const BRollInsertion* find(std::string_view insertion_id) const;
    /// Number used for the next generated "ins-<n>" id.
    std::uint64_t next_insertion_number() const noexcept { return next_id_; }

    /// Duration defaults to the asset length clamped to [0.5, 8] s and to the
    /// video end. Throws Error(out_of_range) unless 0 <= at_s < duration, and
    /// Error(overlap) when the span hits an existing insertion.
    std::string insert(const BRollAsset& asset, double at_s, InsertionOrigin origin = {});
    /// Same as insert, starting at the given word.
    std::string insert_at_word(const BRollAsset& asset, const TimedTranscript& transcript, std::size_t word_index,
                               InsertionOrigin origin = {});

    /// Keeps the duration, trimmed at the video end; the start is clamped so at
    /// least 0.5 s fit. Throws Error(unknown_id) or Error(overlap).
    void move(std::string_view insertion_id, double new_start_s);
    /// Clamps to [0.5, 8] s, the video end and the next insertion's start.
    void resize(std::string_view insertion_id, double new_duration_s);
    void remove(std::string_view insertion_id);

    PlaybackPlan playback_plan() const;

    /// Throws Error(invalid_document) naming the first violated invariant.
    void check_invariants() const;

    bool operator==(const EditSession&) const = default;

private:
    friend EditSession import_edl(std::string_view document);

    std::vector<BRollInsertion>::iterator locate(std::string_view insertion_id);
    bool overlaps_any(double start_s, double end_s, std::string_view ignore_id) const;
    void sort_insertions();

    std::string session_id_;
    std::string video_id_;
    double video_duration_s_ = 0.0;
    std::uint64_t revision_ = 0;
    std::uint64_t next_id_ = 1;
    std::vector<BRollInsertion> insertions_;
};

/// EDL JSON: {format, version, session_id, video_id, duration_s, revision,
/// next_insertion, insertions: [{insertion_id, asset, start_s, duration_s, origin}]}.
std::string export_edl(const EditSession& session);
/// Throws Error(invalid_document) on schema or invariant violations.
EditSession import_edl(std::string_view document);
/// Flat CSV: start_s,duration_s,asset_id,provider,query_origin.
std::string export_csv(const EditSession& session);

std::string asset_to_json(const BRollAsset& asset);
BRollAsset asset_from_json(std::string_view document);

}  // namespace bscript
