#include "bscript/transcript.hpp"

#include "bscript/error.hpp"
#include "bscript/resources.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {

struct CodePoint {
    char32_t value;
    std::size_t length;
};

// Malformed sequences decode as a single byte so that nothing is lost.
CodePoint decode_utf8(std::string_view s, std::size_t pos)
{
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    const unsigned char lead = byte(pos);
    std::size_t len = 1;
    char32_t cp = lead;
    if (lead >= 0xF0 && lead < 0xF8) {
        len = 4;
        cp = lead & 0x07;
    } else if (lead >= 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if (lead >= 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    }
    if (len == 1 || pos + len > s.size())
        return {lead, 1};
    for (std::size_t i = 1; i < len; ++i) {
        const unsigned char c = byte(pos + i);
        if ((c & 0xC0) != 0x80)
            return {lead, 1};
        cp = (cp << 6) | (c & 0x3F);
    }
    return {cp, len};
}

void append_utf8(std::string& out, char32_t cp)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_apostrophe(char32_t cp)
{
    return cp == U'\'' || cp == 0x2019 || cp == 0x2018 || cp == 0x02BC;
}

bool is_space(char32_t cp)
{
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == 0x00A0 ||
           (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000;
}

bool is_punctuation(char32_t cp)
{
    if (cp < 0x80)
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
               (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
    switch (cp) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7:
    case 0x00BB: case 0x00BF: case 0x02BC:
        return true;
    default:
        break;
    }
    return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
           (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
           (cp >= 0x3014 && cp <= 0x301F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
           (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
           (cp >= 0xFF5B && cp <= 0xFF65);
}

// Simple case folding for Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t to_lower(char32_t cp)
{
    if (cp >= U'A' && cp <= U'Z')
        return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7)
        return cp + 0x20;
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177))
        return (cp % 2 == 0) ? cp + 1 : cp;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E))
        return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2)
        return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F)
        return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F)
        return cp + 0x50;
    return cp;
}

[[noreturn]] void invalid(const std::string& what)
{
    throw Error(ErrorCode::invalid_document, what);
}

}  // namespace

std::string normalize_token(std::string_view raw)
{
    std::vector<char32_t> cps;
    cps.reserve(raw.size());
    for (std::size_t pos = 0; pos < raw.size();) {
        const CodePoint cp = decode_utf8(raw, pos);
        cps.push_back(cp.value);
        pos += cp.length;
    }

    const auto strippable = [](char32_t cp) { return is_punctuation(cp) || is_space(cp); };
    std::size_t begin = 0;
    std::size_t end = cps.size();
    while (begin < end && strippable(cps[begin]))
        ++begin;
    while (end > begin && strippable(cps[end - 1]))
        --end;

    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i)
        append_utf8(out, is_apostrophe(cps[i]) ? U'\'' : to_lower(cps[i]));
    return out;
}

void validate(const TimedTranscript& t)
{
    if (!(t.duration_s > 0.0) || !std::isfinite(t.duration_s))
        invalid("duration_s must be positive and finite");
    for (std::size_t i = 0; i < t.words.size(); ++i) {
        const TimedWord& w = t.words[i];
        const std::string where = "word " + std::to_string(i) + " (\"" + w.text + "\")";
        if (w.index != i)
            invalid(where + ": indices must be contiguous");
        if (w.norm.empty())
            invalid(where + ": empty normalized form");
        if (!std::isfinite(w.start_s) || !std::isfinite(w.end_s))
            invalid(where + ": non-finite time");
        if (w.start_s < 0.0)
            invalid(where + ": start before 0");
        if (!(w.end_s > w.start_s))
            invalid(where + ": end before start");
        if (w.end_s > t.duration_s + kSpanTolerance)
            invalid(where + ": span outside [0, duration]");
        if (i > 0) {
            const TimedWord& prev = t.words[i - 1];
            if (w.start_s < prev.start_s)
                invalid(where + ": words not sorted by start time");
            if (prev.end_s > w.start_s + kSpanTolerance)
                invalid(where + ": overlaps previous word");
        }
    }
}

TimedTranscript parse_transcript(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        invalid(std::string("transcript is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        invalid("transcript must be a JSON object");

    TimedTranscript t;
    try {
        t.video_id = doc.at("video_id").get<std::string>();
        t.duration_s = doc.at("duration_s").get<double>();
        t.language = doc.value("language", std::string("en"));
        const json& words = doc.at("words");
        if (!words.is_array())
            invalid("\"words\" must be an array");
        for (const json& w : words) {
            TimedWord word;
            word.text = w.at("text").get<std::string>();
            word.start_s = w.at("start_s").get<double>();
            word.end_s = w.at("end_s").get<double>();
            if (auto it = w.find("pos"); it != w.end() && !it->is_null())
                word.pos_tag = it->get<std::string>();
            word.norm = normalize_token(word.text);
            if (word.norm.empty())
                continue;
            word.index = t.words.size();
            t.words.push_back(std::move(word));
        }
    } catch (const json::exception& e) {
        invalid(std::string("malformed transcript: ") + e.what());
    }
    if (t.video_id.empty())
        invalid("video_id must be non-empty");
    validate(t);
    return t;
}

TimedTranscript load_transcript(const std::filesystem::path& path)
{
    return parse_transcript(read_file(path));
}

std::string serialize_transcript(const TimedTranscript& t)
{
    json words = json::array();
    for (const TimedWord& w : t.words) {
        words.push_back({{"text", w.text},
                         {"start_s", w.start_s},
                         {"end_s", w.end_s},
                         {"pos", w.pos_tag ? json(*w.pos_tag) : json(nullptr)}});
    }
    const json doc = {{"video_id", t.video_id},
                      {"duration_s", t.duration_s},
                      {"language", t.language},
                      {"words", std::move(words)}};
    return doc.dump();
}

StopwordList::StopwordList(const std::vector<std::string>& entries, std::string source_name)
    : source_name_(std::move(source_name))
{
    for (const std::string& e : entries) {
        std::string norm = normalize_token(e);
        if (!norm.empty())
            entries_.insert(std::move(norm));
    }
    if (entries_.empty())
        throw Error(ErrorCode::invalid_argument, "stopword list '" + source_name_ + "' is empty");
}

StopwordList StopwordList::load(const std::filesystem::path& path)
{
    std::istringstream in(read_file(path));
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        entries.push_back(line);
    }
    return StopwordList(entries, path.filename().string());
}

const StopwordList& StopwordList::english()
{
    static const StopwordList list = load(data_dir() / "stopwords_en.txt");
    return list;
}

bool StopwordList::contains(std::string_view norm) const
{
    return entries_.find(std::string(norm)) != entries_.end();
}

std::vector<std::string> StopwordList::sorted_entries() const
{
    std::vector<std::string> out(entries_.begin(), entries_.end());
    std::sort(out.begin(), out.end());
    return out;
}

bool is_stopword(const TimedWord& word, const StopwordList& stops)
{
    return stops.contains(word.norm);
}

std::optional<std::size_t> word_at_time(const TimedTranscript& t, double time_s)
{
    if (!(time_s >= 0.0 && time_s <= t.duration_s))
        throw Error(ErrorCode::out_of_range, "time " + std::to_string(time_s) + " outside [0, duration]");
    // First word whose end lies strictly after time_s: either it contains
    // time_s or it is the next word after a gap.
    const auto it = std::upper_bound(t.words.begin(), t.words.end(), time_s,
                                     [](double tm, const TimedWord& w) { return tm < w.end_s; });
    if (it == t.words.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - t.words.begin());
}

WordRange words_in_window(const TimedTranscript& t, double center_s, double radius_s)
{
    if (!(radius_s > 0.0))
        throw Error(ErrorCode::invalid_argument, "window radius must be positive");
    const double lo = center_s - radius_s;
    const double hi = center_s + radius_s;
    const auto first = std::upper_bound(t.words.begin(), t.words.end(), lo,
                                        [](double v, const TimedWord& w) { return v < w.end_s; });
    const auto last = std::upper_bound(first, t.words.end(), hi,
                                       [](double v, const TimedWord& w) { return v < w.start_s; });
    return {static_cast<std::size_t>(first - t.words.begin()),
            static_cast<std::size_t>(last - t.words.begin())};
}

}  // namespace bscript
