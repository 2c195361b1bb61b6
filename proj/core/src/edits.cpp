#include "bscript/edits.hpp"

#include "bscript/error.hpp"
#include "bscript/resources.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {
constexpr double kEps = 1e-9;
}

void validate(const EditSet& edits, double video_duration_s)
{
    const auto fail = [&](std::size_t i, const std::string& what) {
        throw Error(ErrorCode::invalid_document, "edit set " + edits.video_id + "/" + edits.editor_id +
                                                     ", insertion " + std::to_string(i) + ": " + what);
    };
    for (std::size_t i = 0; i < edits.insertions.size(); ++i) {
        const EditInsertion& ins = edits.insertions[i];
        if (!std::isfinite(ins.start_s) || !std::isfinite(ins.duration_s))
            fail(i, "non-finite time");
        if (ins.start_s < 0.0)
            fail(i, "starts before 0");
        if (ins.duration_s < kMinBRollDuration - kEps || ins.duration_s > kMaxBRollDuration + kEps)
            fail(i, "duration outside [0.5, 8.0] s");
        if (i > 0 && ins.start_s < edits.insertions[i - 1].start_s)
            fail(i, "insertions not sorted by start");
        if (video_duration_s > 0.0 && ins.end_s() > video_duration_s + kEps)
            fail(i, "ends after the video");
    }
}

std::vector<EditSet> parse_edit_corpus(std::string_view document)
{
    std::vector<EditSet> corpus;
    try {
        const json doc = json::parse(document);
        if (!doc.is_array())
            throw Error(ErrorCode::invalid_document, "edit corpus must be a JSON list");
        for (const json& entry : doc) {
            EditSet set;
            set.video_id = entry.at("video_id").get<std::string>();
            set.editor_id = entry.contains("editor_id") && !entry.at("editor_id").is_null()
                                ? entry.at("editor_id").get<std::string>()
                                : "editor-" + std::to_string(corpus.size());
            for (const json& ins : entry.at("insertions")) {
                set.insertions.push_back({ins.at("start_s").get<double>(), ins.at("duration_s").get<double>(),
                                          ins.value("query", std::string())});
            }
            std::stable_sort(set.insertions.begin(), set.insertions.end(),
                             [](const EditInsertion& a, const EditInsertion& b) { return a.start_s < b.start_s; });
            validate(set);
            corpus.push_back(std::move(set));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("malformed edit corpus: ") + e.what());
    }
    return corpus;
}

std::vector<EditSet> load_edit_corpus(const std::filesystem::path& path)
{
    return parse_edit_corpus(read_file(path));
}

std::string serialize_edit_corpus(const std::vector<EditSet>& corpus)
{
    json doc = json::array();
    for (const EditSet& set : corpus) {
        json insertions = json::array();
        for (const EditInsertion& ins : set.insertions)
            insertions.push_back({{"start_s", ins.start_s}, {"duration_s", ins.duration_s}, {"query", ins.query}});
        doc.push_back({{"video_id", set.video_id}, {"editor_id", set.editor_id}, {"insertions", std::move(insertions)}});
    }
    return doc.dump();
}

std::vector<EditSet> edits_for_video(const std::vector<EditSet>& corpus, std::string_view video_id)
{
    std::vector<EditSet> out;
    std::copy_if(corpus.begin(), corpus.end(), std::back_inserter(out),
                 [&](const EditSet& e) { return e.video_id == video_id; });
    return out;
}

}  // namespace bscript
