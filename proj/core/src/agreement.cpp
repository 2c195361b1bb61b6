#include "bscript/agreement.hpp"

#include "bscript/error.hpp"
#include "bscript/svg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {

constexpr double kEps = 1e-9;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void require_bin(double bin_s)
{
    if (!(bin_s > 0.0))
        throw Error(ErrorCode::invalid_argument, "bin width must be positive");
}

// Length of the union of insertion spans.
double covered_time(const EditSet& edits)
{
    std::vector<std::pair<double, double>> spans;
    for (const EditInsertion& ins : edits.insertions)
        spans.emplace_back(ins.start_s, ins.end_s());
    std::sort(spans.begin(), spans.end());
    double total = 0.0;
    double cur_start = 0.0, cur_end = -1.0;
    for (const auto& [s, e] : spans) {
        if (s > cur_end) {
            if (cur_end > cur_start)
                total += cur_end - cur_start;
            cur_start = s;
            cur_end = e;
        } else {
            cur_end = std::max(cur_end, e);
        }
    }
    if (cur_end > cur_start)
        total += cur_end - cur_start;
    return total;
}

json mean_sd_json(const MeanSd& m) { return {{"mean", m.mean}, {"sd", m.sd}}; }

}  // namespace

std::vector<std::size_t> covered_bins(const EditSet& edits, double bin_s)
{
    require_bin(bin_s);
    const auto centre = [bin_s](double i) { return (i + 0.5) * bin_s; };
    // Smallest bin index whose centre is at or after t.
    const auto first_at_or_after = [&](double t) {
        double i = std::max(0.0, std::ceil(t / bin_s - 0.5));
        while (i > 0.0 && centre(i - 1.0) >= t)
            i -= 1.0;
        while (centre(i) < t)
            i += 1.0;
        return i;
    };
    std::vector<std::size_t> bins;
    for (const EditInsertion& ins : edits.insertions) {
        const double hi = first_at_or_after(ins.end_s());
        for (double i = first_at_or_after(ins.start_s); i < hi; i += 1.0)
            bins.push_back(static_cast<std::size_t>(i));
    }
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
    return bins;
}

double jaccard(const EditSet& a, const EditSet& b, double bin_s)
{
    if (a.video_id != b.video_id)
        throw Error(ErrorCode::invalid_argument, "jaccard across different videos: " + a.video_id + " vs " + b.video_id);
    const std::vector<std::size_t> ba = covered_bins(a, bin_s);
    const std::vector<std::size_t> bb = covered_bins(b, bin_s);
    std::vector<std::size_t> common;
    std::set_intersection(ba.begin(), ba.end(), bb.begin(), bb.end(), std::back_inserter(common));
    const std::size_t uni = ba.size() + bb.size() - common.size();
    if (uni == 0)
        return 1.0;
    return static_cast<double>(common.size()) / static_cast<double>(uni);
}

MeanSd mean_pairwise_jaccard(std::span<const EditSet> edits, double bin_s)
{
    if (edits.size() < 2)
        throw Error(ErrorCode::invalid_argument, "pairwise agreement needs at least two edit sets");
    std::vector<double> values;
    for (std::size_t i = 0; i < edits.size(); ++i)
        for (std::size_t j = i + 1; j < edits.size(); ++j)
            values.push_back(jaccard(edits[i], edits[j], bin_s));
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (const double v : values)
        var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / n)};
}

EditSet random_placement(const EditSet& tmpl, double video_duration_s, std::uint64_t seed)
{
    std::vector<double> durations;
    for (const EditInsertion& ins : tmpl.insertions)
        durations.push_back(ins.duration_s);
    const double total = std::accumulate(durations.begin(), durations.end(), 0.0);
    const double slack = video_duration_s - total;
    if (slack < -kEps)
        throw Error(ErrorCode::infeasible, "insertions of " + tmpl.editor_id + " do not fit into the video");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, std::max(slack, 0.0));
    std::vector<double> offsets(durations.size());
    for (double& o : offsets)
        o = uniform(rng);
    std::sort(offsets.begin(), offsets.end());
    std::shuffle(durations.begin(), durations.end(), rng);

    EditSet out;
    out.video_id = tmpl.video_id;
    out.editor_id = tmpl.editor_id + "-random";
    double consumed = 0.0;
    for (std::size_t i = 0; i < durations.size(); ++i) {
        out.insertions.push_back({offsets[i] + consumed, durations[i], {}});
        consumed += durations[i];
    }
    return out;
}

double random_baseline_jaccard(std::span<const EditSet> templates, double video_duration_s, int trials,
                               std::uint64_t seed, double bin_s)
{
    if (trials < 1)
        throw Error(ErrorCode::invalid_argument, "need at least one trial");
    if (templates.empty())
        throw Error(ErrorCode::invalid_argument, "random baseline needs a template");
    require_bin(bin_s);

    double sum = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial)));
        std::size_t ia = 0, ib = 0;
        if (templates.size() >= 2) {
            std::mt19937_64 pick_rng(trial_seed);
            std::uniform_int_distribution<std::size_t> pick(0, templates.size() - 1);
            ia = pick(pick_rng);
            do {
                ib = pick(pick_rng);
            } while (ib == ia);
        }
        EditSet a = random_placement(templates[ia], video_duration_s, splitmix64(trial_seed + 1));
        EditSet b = random_placement(templates[ib], video_duration_s, splitmix64(trial_seed + 2));
        b.video_id = a.video_id;
        sum += jaccard(a, b, bin_s);
    }
    return sum / static_cast<double>(trials);
}

double ProbabilityTrack::mean() const
{
    if (values.empty())
        return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

ProbabilityTrack probability_track(std::span<const EditSet> edits, double duration_s, double bin_s)
{
    require_bin(bin_s);
    if (edits.empty())
        throw Error(ErrorCode::invalid_argument, "probability track needs at least one edit set");
    ProbabilityTrack track;
    track.bin_s = bin_s;
    track.duration_s = duration_s;
    track.n_edits = edits.size();
    const auto length = static_cast<std::size_t>(std::ceil(duration_s / bin_s - kEps));
    std::vector<std::size_t> counts(length, 0);
    for (const EditSet& e : edits) {
        for (const std::size_t bin : covered_bins(e, bin_s)) {
            if (bin < length)
                ++counts[bin];
        }
    }
    track.values.reserve(length);
    for (const std::size_t c : counts)
        track.values.push_back(static_cast<double>(c) / static_cast<double>(edits.size()));
    return track;
}

BRollStats broll_stats(std::span<const EditSet> edits, const std::map<std::string, double>& video_durations,
                       std::vector<double> histogram_edges)
{
    BRollStats stats;
    stats.histogram_edges = std::move(histogram_edges);
    stats.histogram_counts.assign(stats.histogram_edges.size() > 1 ? stats.histogram_edges.size() - 1 : 0, 0);

    std::vector<double> counts;
    double fraction_sum = 0.0;
    for (const EditSet& e : edits) {
        const auto it = video_durations.find(e.video_id);
        if (it == video_durations.end())
            throw Error(ErrorCode::not_found, "no duration for video " + e.video_id);
        counts.push_back(static_cast<double>(e.insertions.size()));
        fraction_sum += covered_time(e) / it->second;
        for (std::size_t i = 0; i < e.insertions.size(); ++i) {
            const double d = e.insertions[i].duration_s;
            ++stats.insertion_count;
            for (std::size_t b = 0; b + 1 < stats.histogram_edges.size(); ++b) {
                const bool last = b + 2 == stats.histogram_edges.size();
                if (d >= stats.histogram_edges[b] &&
                    (d < stats.histogram_edges[b + 1] || (last && d <= stats.histogram_edges[b + 1]))) {
                    ++stats.histogram_counts[b];
                    break;
                }
            }
            if (i > 0)
                stats.gaps_s.push_back(e.insertions[i].start_s - e.insertions[i - 1].end_s());
        }
    }
    if (!stats.gaps_s.empty())
        stats.median_gap_s = median(stats.gaps_s);
    if (!edits.empty()) {
        stats.replaced_fraction = fraction_sum / static_cast<double>(edits.size());
        stats.median_count = median(counts);
    }
    return stats;
}

double query_locality(std::span<const EditSet> edits, const std::map<std::string, TimedTranscript>& transcripts,
                      double radius_s)
{
    std::size_t total = 0;
    std::size_t local = 0;
    for (const EditSet& e : edits) {
        const auto it = transcripts.find(e.video_id);
        if (it == transcripts.end())
            throw Error(ErrorCode::not_found, "no transcript for video " + e.video_id);
        const TimedTranscript& t = it->second;
        for (const EditInsertion& ins : e.insertions) {
            ++total;
            std::set<std::string> tokens;
            std::istringstream words(ins.query);
            for (std::string tok; words >> tok;) {
                if (std::string norm = normalize_token(tok); !norm.empty())
                    tokens.insert(std::move(norm));
            }
            const WordRange range = words_in_window(t, ins.start_s, radius_s);
            for (std::size_t i = range.first; i < range.last; ++i) {
                if (tokens.count(t.words[i].norm) != 0) {
                    ++local;
                    break;
                }
            }
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(local) / static_cast<double>(total);
}

AgreementReport analyze_agreement(const std::vector<EditSet>& corpus,
                                  const std::map<std::string, TimedTranscript>& transcripts,
                                  const AgreementOptions& options)
{
    AgreementReport report;
    std::map<std::string, double> durations;
    for (const auto& [id, t] : transcripts)
        durations[id] = t.duration_s;

    std::vector<std::string> video_ids;
    for (const EditSet& e : corpus) {
        if (std::find(video_ids.begin(), video_ids.end(), e.video_id) == video_ids.end())
            video_ids.push_back(e.video_id);
    }

    std::vector<double> all_pairs;
    std::vector<EditSet> used;
    double expert_sum = 0.0, random_sum = 0.0;
    for (const std::string& id : video_ids) {
        const auto tr = transcripts.find(id);
        if (tr == transcripts.end())
            throw Error(ErrorCode::not_found, "no transcript for video " + id);
        const std::vector<EditSet> sets = edits_for_video(corpus, id);
        for (const EditSet& s : sets)
            validate(s, tr->second.duration_s);
        used.insert(used.end(), sets.begin(), sets.end());
        if (sets.size() < 2)
            continue;

        VideoAgreement va;
        va.video_id = id;
        va.n_edits = sets.size();
        va.expert = mean_pairwise_jaccard(sets, options.bin_s);
        va.random = random_baseline_jaccard(sets, tr->second.duration_s, options.trials, options.seed, options.bin_s);
        va.track = probability_track(sets, tr->second.duration_s, options.bin_s);
        for (std::size_t i = 0; i < sets.size(); ++i)
            for (std::size_t j = i + 1; j < sets.size(); ++j)
                all_pairs.push_back(jaccard(sets[i], sets[j], options.bin_s));
        expert_sum += va.expert.mean;
        random_sum += va.random;
        report.videos.push_back(std::move(va));
    }

    if (!report.videos.empty()) {
        const double k = static_cast<double>(report.videos.size());
        report.expert.mean = expert_sum / k;
        report.random = random_sum / k;
        const double m = std::accumulate(all_pairs.begin(), all_pairs.end(), 0.0) / static_cast<double>(all_pairs.size());
        double var = 0.0;
        for (const double v : all_pairs)
            var += (v - m) * (v - m);
        report.expert.sd = std::sqrt(var / static_cast<double>(all_pairs.size()));
    }
    report.stats = broll_stats(used, durations);
    report.query_locality = query_locality(used, transcripts, options.locality_radius_s);
    return report;
}

std::string to_json(const AgreementReport& report)
{
    json videos = json::array();
    for (const VideoAgreement& v : report.videos) {
        videos.push_back({{"video_id", v.video_id},
                          {"n_edits", v.n_edits},
                          {"expert_jaccard", mean_sd_json(v.expert)},
                          {"random_jaccard", v.random},
                          {"track", {{"bin_s", v.track.bin_s}, {"values", v.track.values}}}});
    }
    const BRollStats& s = report.stats;
    const json doc = {
        {"expert_jaccard", mean_sd_json(report.expert)},
        {"random_jaccard", report.random},
        {"videos", std::move(videos)},
        {"broll_stats",
         {{"insertion_count", s.insertion_count},
          {"histogram_edges", s.histogram_edges},
          {"histogram_counts", s.histogram_counts},
          {"median_gap_s", s.median_gap_s ? json(*s.median_gap_s) : json(nullptr)},
          {"replaced_fraction", s.replaced_fraction},
          {"median_count", s.median_count}}},
        {"query_locality", report.query_locality},
    };
    return doc.dump(2);
}

std::string to_csv(const AgreementReport& report)
{
    std::ostringstream out;
    out.precision(10);
    out << "video_id,n_edits,expert_jaccard_mean,expert_jaccard_sd,random_jaccard\n";
    for (const VideoAgreement& v : report.videos)
        out << v.video_id << ',' << v.n_edits << ',' << v.expert.mean << ',' << v.expert.sd << ',' << v.random << '\n';
    out << "ALL,," << report.expert.mean << ',' << report.expert.sd << ',' << report.random << '\n';
    return out.str();
}

std::string track_svg(const ProbabilityTrack& track, const std::string& title)
{
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < track.values.size(); ++i) {
        points.emplace_back(track.time_of(i), track.values[i]);
        points.emplace_back(track.time_of(i + 1), track.values[i]);
    }
    PlotSpec spec;
    spec.title = title;
    spec.x_label = "time (s)";
    spec.y_label = "B-roll probability";
    spec.x_max = track.duration_s;
    spec.reference_y = track.mean();
    return line_plot_svg(points, spec);
}

}  // namespace bscript
