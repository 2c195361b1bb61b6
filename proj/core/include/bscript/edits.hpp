#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bscript {

/// Shortest and longest B-roll insertion, in seconds.
inline constexpr double kMinBRollDuration = 0.5;
inline constexpr double kMaxBRollDuration = 8.0;

struct EditInsertion {
    double start_s = 0.0;
    double duration_s = 0.0;
    std::string query;

    double end_s() const noexcept { return start_s + duration_s; }
    bool operator==(const EditInsertion&) const = default;
};

/// One editor's B-roll insertions on one video, sorted by start.
struct EditSet {
    std::string video_id;
    std::string editor_id;
    std::vector<EditInsertion> insertions;

    bool operator==(const EditSet&) const = default;
};

/// Checks duration bounds and ordering; when video_duration_s > 0 also
/// checks that insertions lie inside the video. Throws Error(invalid_document).
void validate(const EditSet& edits, double video_duration_s = 0.0);

/// Corpus file: JSON list of {video_id, editor_id?, insertions: [{start_s, duration_s, query}]}.
/// Insertions are sorted on load; a missing editor_id becomes "editor-<n>".
std::vector<EditSet> parse_edit_corpus(std::string_view document);
std::vector<EditSet> load_edit_corpus(const std::filesystem::path& path);
std::string serialize_edit_corpus(const std::vector<EditSet>& corpus);

/// Edit sets belonging to one video, in corpus order.
std::vector<EditSet> edits_for_video(const std::vector<EditSet>& corpus, std::string_view video_id);

}  // namespace bscript
