#include "bscript/session.hpp"

#include "bscript/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {

constexpr int kEdlVersion = 1;
constexpr double kEps = 1e-9;

json asset_json(const BRollAsset& a)
{
    return {{"asset_id", a.asset_id},
            {"provider", a.provider},
            {"url", a.url},
            {"natural_duration_s", a.natural_duration_s},
            {"style", std::string(to_string(a.style))},
            {"thumbnail", a.thumbnail}};
}

BRollAsset asset_from(const json& j)
{
    BRollAsset a;
    a.asset_id = j.at("asset_id").get<std::string>();
    a.provider = j.value("provider", std::string());
    a.url = j.value("url", std::string());
    a.natural_duration_s = j.at("natural_duration_s").get<double>();
    const auto style = parse_style(j.value("style", std::string("social_media")));
    if (!style)
        throw Error(ErrorCode::invalid_document, "unknown asset style");
    a.style = *style;
    a.thumbnail = j.value("thumbnail", std::string());
    if (a.asset_id.empty())
        throw Error(ErrorCode::invalid_document, "asset_id must be non-empty");
    if (!(a.natural_duration_s > 0.0))
        throw Error(ErrorCode::invalid_document, "asset " + a.asset_id + " needs a positive natural duration");
    return a;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string_view to_string(AssetStyle style) noexcept
{
    return style == AssetStyle::professional ? "professional" : "social_media";
}

std::optional<AssetStyle> parse_style(std::string_view name) noexcept
{
    if (name == "social_media")
        return AssetStyle::social_media;
    if (name == "professional")
        return AssetStyle::professional;
    return std::nullopt;
}

std::string InsertionOrigin::to_string() const
{
    return recommendation_id ? "recommendation:" + *recommendation_id : "manual";
}

InsertionOrigin InsertionOrigin::parse(std::string_view text)
{
    constexpr std::string_view prefix = "recommendation:";
    if (text == "manual")
        return {};
    if (text.substr(0, prefix.size()) == prefix)
        return {std::string(text.substr(prefix.size()))};
    throw Error(ErrorCode::invalid_document, "unknown insertion origin '" + std::string(text) + "'");
}

EditSession::EditSession(std::string session_id, std::string video_id, double video_duration_s)
    : session_id_(std::move(session_id)), video_id_(std::move(video_id)), video_duration_s_(video_duration_s)
{
    if (!(video_duration_s_ >= kMinBRollDuration) || !std::isfinite(video_duration_s_))
        throw Error(ErrorCode::invalid_argument, "video must be at least 0.5 s long");
}

const BRollInsertion* EditSession::find(std::string_view insertion_id) const
{
    const auto it = std::find_if(insertions_.begin(), insertions_.end(),
                                 [&](const BRollInsertion& i) { return i.insertion_id == insertion_id; });
    return it == insertions_.end() ? nullptr : &*it;
}

std::vector<BRollInsertion>::iterator EditSession::locate(std::string_view insertion_id)
{
    const auto it = std::find_if(insertions_.begin(), insertions_.end(),
                                 [&](const BRollInsertion& i) { return i.insertion_id == insertion_id; });
    if (it == insertions_.end())
        throw Error(ErrorCode::unknown_id, "no insertion '" + std::string(insertion_id) + "'");
    return it;
}

bool EditSession::overlaps_any(double start_s, double end_s, std::string_view ignore_id) const
{
    return std::any_of(insertions_.begin(), insertions_.end(), [&](const BRollInsertion& i) {
        return i.insertion_id != ignore_id && start_s < i.end_s() - kEps && i.start_s < end_s - kEps;
    });
}

void EditSession::sort_insertions()
{
    std::sort(insertions_.begin(), insertions_.end(),
              [](const BRollInsertion& a, const BRollInsertion& b) { return a.start_s < b.start_s; });
}

std::string EditSession::insert(const BRollAsset& asset, double at_s, InsertionOrigin origin)
{
    if (!(asset.natural_duration_s > 0.0))
        throw Error(ErrorCode::invalid_argument, "asset " + asset.asset_id + " has no positive duration");
    if (!(at_s >= 0.0 && at_s < video_duration_s_))
        throw Error(ErrorCode::out_of_range, "insert position " + std::to_string(at_s) + " outside the video");

    double start = at_s;
    double duration = std::clamp(asset.natural_duration_s, kMinBRollDuration, kMaxBRollDuration);
    duration = std::min(duration, video_duration_s_ - start);
    if (duration < kMinBRollDuration) {
        start = video_duration_s_ - kMinBRollDuration;
        duration = kMinBRollDuration;
    }
    if (overlaps_any(start, start + duration, {}))
        throw Error(ErrorCode::overlap, "insertion at " + std::to_string(start) + " overlaps an existing insertion");

    BRollInsertion ins;
    ins.insertion_id = "ins-" + std::to_string(next_id_);
    ins.asset = asset;
    ins.start_s = start;
    ins.duration_s = duration;
    ins.origin = std::move(origin);
    insertions_.push_back(ins);
    sort_insertions();
    ++next_id_;
    ++revision_;
    return ins.insertion_id;
}

std::string EditSession::insert_at_word(const BRollAsset& asset, const TimedTranscript& transcript,
                                        std::size_t word_index, InsertionOrigin origin)
{
    if (word_index >= transcript.words.size())
        throw Error(ErrorCode::out_of_range, "word index " + std::to_string(word_index) + " beyond transcript");
    return insert(asset, transcript.words[word_index].start_s, std::move(origin));
}

void EditSession::move(std::string_view insertion_id, double new_start_s)
{
    const auto it = locate(insertion_id);
    if (!std::isfinite(new_start_s))
        throw Error(ErrorCode::out_of_range, "non-finite start");
    const double start = std::clamp(new_start_s, 0.0, video_duration_s_ - kMinBRollDuration);
    const double duration = std::min(it->duration_s, video_duration_s_ - start);
    if (overlaps_any(start, start + duration, insertion_id))
        throw Error(ErrorCode::overlap, "moved insertion would overlap another insertion");
    it->start_s = start;
    it->duration_s = duration;
    sort_insertions();
    ++revision_;
}

void EditSession::resize(std::string_view insertion_id, double new_duration_s)
{
    const auto it = locate(insertion_id);
    if (std::isnan(new_duration_s))
        throw Error(ErrorCode::out_of_range, "duration is not a number");
    double duration = std::clamp(new_duration_s, kMinBRollDuration, kMaxBRollDuration);
    duration = std::min(duration, video_duration_s_ - it->start_s);
    if (const auto next = std::next(it); next != insertions_.end())
        duration = std::min(duration, next->start_s - it->start_s);
    it->duration_s = duration;
    ++revision_;
}

void EditSession::remove(std::string_view insertion_id)
{
    insertions_.erase(locate(insertion_id));
    ++revision_;
}

PlaybackPlan EditSession::playback_plan() const
{
    PlaybackPlan plan;
    plan.audio_in_s = 0.0;
    plan.audio_out_s = video_duration_s_;

    double cursor = 0.0;
    const auto a_roll = [&](double until) {
        if (until > cursor)
            plan.visual.push_back({std::nullopt, cursor, until, cursor, until});
    };
    for (const BRollInsertion& ins : insertions_) {
        a_roll(ins.start_s);
        const double natural = ins.asset.natural_duration_s;
        const auto loops = static_cast<std::size_t>(std::ceil(ins.duration_s / natural - kEps));
        double in = ins.start_s;
        for (std::size_t k = 0; k < loops; ++k) {
            const double out = (k + 1 == loops) ? ins.end_s() : in + natural;
            plan.visual.push_back({ins.asset.asset_id, 0.0, out - in, in, out});
            in = out;
        }
        cursor = ins.end_s();
    }
    a_roll(video_duration_s_);
    return plan;
}

void EditSession::check_invariants() const
{
    const auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_document, what); };
    for (std::size_t i = 0; i < insertions_.size(); ++i) {
        const BRollInsertion& ins = insertions_[i];
        if (ins.duration_s < kMinBRollDuration - kEps || ins.duration_s > kMaxBRollDuration + kEps)
            fail("insertion " + ins.insertion_id + " duration outside [0.5, 8] s");
        if (ins.start_s < -kEps || ins.end_s() > video_duration_s_ + kEps)
            fail("insertion " + ins.insertion_id + " outside the video");
        if (!(ins.asset.natural_duration_s > 0.0))
            fail("insertion " + ins.insertion_id + " asset has no positive duration");
        if (i > 0 && insertions_[i - 1].end_s() > ins.start_s + kEps)
            fail("insertions " + insertions_[i - 1].insertion_id + " and " + ins.insertion_id + " overlap");
        for (std::size_t j = 0; j < i; ++j) {
            if (insertions_[j].insertion_id == ins.insertion_id)
                fail("duplicate insertion id " + ins.insertion_id);
        }
    }
}

std::string export_edl(const EditSession& s)
{
    json insertions = json::array();
    for (const BRollInsertion& ins : s.insertions()) {
        insertions.push_back({{"insertion_id", ins.insertion_id},
                              {"asset", asset_json(ins.asset)},
                              {"start_s", ins.start_s},
                              {"duration_s", ins.duration_s},
                              {"origin", ins.origin.to_string()}});
    }
    const json doc = {{"format", "bscript.edl"},
                      {"version", kEdlVersion},
                      {"session_id", s.session_id()},
                      {"video_id", s.video_id()},
                      {"duration_s", s.video_duration_s()},
                      {"revision", s.revision()},
                      {"next_insertion", s.next_insertion_number()},
                      {"insertions", std::move(insertions)}};
    return doc.dump();
}

EditSession import_edl(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("EDL is not valid JSON: ") + e.what());
    }
    try {
        if (doc.contains("format") && doc.at("format").get<std::string>() != "bscript.edl")
            throw Error(ErrorCode::invalid_document, "not an EDL document");
        if (doc.contains("version") && doc.at("version").get<int>() != kEdlVersion)
            throw Error(ErrorCode::invalid_document, "unsupported EDL version");
        EditSession s(doc.value("session_id", std::string("imported")), doc.at("video_id").get<std::string>(),
                      doc.at("duration_s").get<double>());
        s.revision_ = doc.value("revision", std::uint64_t{0});
        std::uint64_t generated = 0;
        for (const json& j : doc.at("insertions")) {
            BRollInsertion ins;
            ins.asset = asset_from(j.at("asset"));
            ins.start_s = j.at("start_s").get<double>();
            ins.duration_s = j.at("duration_s").get<double>();
            ins.origin = InsertionOrigin::parse(j.value("origin", std::string("manual")));
            ins.insertion_id = j.value("insertion_id", std::string());
            if (ins.insertion_id.empty())
                ins.insertion_id = "ins-" + std::to_string(++generated);
            s.insertions_.push_back(std::move(ins));
        }
        s.sort_insertions();
        // Fresh ids continue after the largest numeric "ins-<n>" in the document.
        std::uint64_t max_id = generated;
        for (const BRollInsertion& ins : s.insertions_) {
            if (ins.insertion_id.rfind("ins-", 0) == 0) {
                try {
                    max_id = std::max<std::uint64_t>(max_id, std::stoull(ins.insertion_id.substr(4)));
                } catch (const std::exception&) {
                }
            }
        }
        s.next_id_ = std::max(max_id + 1, doc.value("next_insertion", std::uint64_t{1}));
        s.check_invariants();
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("malformed EDL: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_document, e.what());
    }
}

namespace {

/// Shortest decimal form that parses back to the same double.
std::string shortest(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

std::string export_csv(const EditSession& s)
{
    std::string out = "start_s,duration_s,asset_id,provider,query_origin\n";
    for (const BRollInsertion& ins : s.insertions()) {
        out += shortest(ins.start_s) + ',' + shortest(ins.duration_s) + ',' + csv_field(ins.asset.asset_id) + ',' +
               csv_field(ins.asset.provider) + ',' + csv_field(ins.origin.to_string()) + '\n';
    }
    return out;
}

std::string asset_to_json(const BRollAsset& asset)
{
    return asset_json(asset).dump();
}

BRollAsset asset_from_json(std::string_view document)
{
    try {
        return asset_from(json::parse(document));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("malformed asset: ") + e.what());
    }
}

}  // namespace bscript
