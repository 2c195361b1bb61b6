#pragma once

#include <bscript/error.hpp>
#include <bscript/transcript.hpp>

#include "doctest.h"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bscript::testing {

/// Transcript from (text, start, end) triples; norms filled, tags optional.
inline TimedTranscript make_doc(std::string video_id, double duration_s,
                                const std::vector<std::tuple<std::string, double, double>>& words,
                                const std::vector<std::string>& tags = {})
{
    TimedTranscript t;
    t.video_id = std::move(video_id);
    t.duration_s = duration_s;
    for (std::size_t i = 0; i < words.size(); ++i) {
        TimedWord w;
        w.text = std::get<0>(words[i]);
        w.norm = normalize_token(w.text);
        w.start_s = std::get<1>(words[i]);
        w.end_s = std::get<2>(words[i]);
        w.index = i;
        if (i < tags.size())
            w.pos_tag = tags[i];
        t.words.push_back(std::move(w));
    }
    return t;
}

/// Error code raised by f, or nullopt when it returns normally.
template <typename F>
std::optional<ErrorCode> error_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline std::string fixture(const std::string& name)
{
    return std::string(BSCRIPT_FIXTURE_DIR) + "/" + name;
}

}  // namespace bscript::testing
