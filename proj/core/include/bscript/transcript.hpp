#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace bscript {

/// Tolerance used when checking that consecutive word spans do not overlap.
inline constexpr double kSpanTolerance = 1e-6;

struct TimedWord {
    std::string text;  // raw surface form
    std::string norm;  // lowercased, edge punctuation stripped
    double start_s = 0.0;
    double end_s = 0.0;
    std::optional<std::string> pos_tag;
    std::size_t index = 0;

    bool operator==(const TimedWord&) const = default;
};

/// Time-aligned transcript. Words are sorted, non-overlapping and indexed
/// 0..n-1; every span lies inside [0, duration_s].
struct TimedTranscript {
    std::string video_id;
    double duration_s = 0.0;
    std::string language = "en";
    std::vector<TimedWord> words;

    bool operator==(const TimedTranscript&) const = default;
};

class StopwordList {
public:
    /// Entries are normalized on construction. Throws if the list ends up empty.
    StopwordList(const std::vector<std::string>& entries, std::string source_name);

    /// One entry per line; blank lines and lines starting with '#' are ignored.
    static StopwordList load(const std::filesystem::path& path);
    /// The English list shipped in the data directory.
    static const StopwordList& english();

    bool contains(std::string_view norm) const;
    std::size_t size() const noexcept { return entries_.size(); }
    std::vector<std::string> sorted_entries() const;
    const std::string& source_name() const noexcept { return source_name_; }

private:
    std::unordered_set<std::string> entries_;
    std::string source_name_;
};

/// Half-open index range [first, last).
struct WordRange {
    std::size_t first = 0;
    std::size_t last = 0;

    bool empty() const noexcept { return first >= last; }
    std::size_t size() const noexcept { return empty() ? 0 : last - first; }
    bool contains(std::size_t i) const noexcept { return i >= first && i < last; }
    bool operator==(const WordRange&) const = default;
};

/// Lowercases and strips leading/trailing punctuation (ASCII and common
/// Unicode punctuation blocks). Internal apostrophes are kept and folded to
/// ASCII "'". Returns an empty string for punctuation-only tokens.
std::string normalize_token(std::string_view raw);

/// Parses the JSON transcript document:
///   { "video_id", "duration_s", "language", "words": [ {"text","start_s","end_s","pos"} ] }
/// Punctuation-only tokens are dropped. Throws Error(invalid_document) on
/// malformed input or timing violations.
TimedTranscript parse_transcript(std::string_view document);
TimedTranscript load_transcript(const std::filesystem::path& path);
std::string serialize_transcript(const TimedTranscript& transcript);

/// Checks every transcript invariant; throws Error(invalid_document) naming the first violation.
void validate(const TimedTranscript& transcript);

bool is_stopword(const TimedWord& word, const StopwordList& stops);

/// Index of the word whose [start, end) contains time_s, or of the next word
/// when time_s falls in a gap. Empty after the last word ends.
/// Throws Error(out_of_range) unless 0 <= time_s <= duration_s.
std::optional<std::size_t> word_at_time(const TimedTranscript& transcript, double time_s);

/// Words whose span intersects [center_s - radius_s, center_s + radius_s].
WordRange words_in_window(const TimedTranscript& transcript, double center_s, double radius_s);

}  // namespace bscript
