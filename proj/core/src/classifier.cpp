#include "bscript/classifier.hpp"

#include "bscript/error.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;

double label_sign(const LabeledExample& e) { return e.keyword ? 1.0 : -1.0; }

double sparse_dot(std::span<const double> w, const WordFeatureVector& x, std::span<const double> scale)
{
    double s = 0.0;
    for (const SparseEntry& e : x.entries)
        s += w[e.index] * e.value * scale[e.index];
    return s;
}

struct ClassCounts {
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

ClassCounts count_classes(std::span<const LabeledExample> examples)
{
    ClassCounts c;
    for (const LabeledExample& e : examples)
        (e.keyword ? c.positives : c.negatives)++;
    return c;
}

json config_to_json(const TrainConfig& cfg)
{
    return {{"C", cfg.C},
            {"epochs", cfg.epochs},
            {"step_offset", cfg.step_offset ? json(*cfg.step_offset) : json(nullptr)},
            {"positive_weight", cfg.positive_weight ? json(*cfg.positive_weight) : json(nullptr)},
            {"seed", cfg.seed},
            {"scale_features", cfg.scale_features},
            {"decision_threshold", cfg.decision_threshold}};
}

TrainConfig config_from_json(const json& j)
{
    TrainConfig cfg;
    cfg.C = j.at("C").get<double>();
    cfg.epochs = j.at("epochs").get<int>();
    if (!j.at("step_offset").is_null())
        cfg.step_offset = j.at("step_offset").get<double>();
    if (!j.at("positive_weight").is_null())
        cfg.positive_weight = j.at("positive_weight").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.scale_features = j.at("scale_features").get<bool>();
    cfg.decision_threshold = j.at("decision_threshold").get<double>();
    return cfg;
}

}  // namespace

double LinearModel::norm() const
{
    return std::sqrt(std::inner_product(weights.begin(), weights.end(), weights.begin(), 0.0));
}

std::vector<ScoredLabel> CrossValidationReport::pooled_scores() const
{
    std::vector<ScoredLabel> out;
    for (const FoldResult& f : folds)
        out.insert(out.end(), f.scores.begin(), f.scores.end());
    return out;
}

double svm_objective(const LinearModel& model, std::span<const LabeledExample> examples, double C,
                     double positive_weight)
{
    double hinge = 0.0;
    for (const LabeledExample& e : examples) {
        const double margin = label_sign(e) * decision_value(model, e.features);
        hinge += (e.keyword ? positive_weight : 1.0) * std::max(0.0, 1.0 - margin);
    }
    const double n = model.norm();
    return 0.5 * n * n + C * hinge;
}

LinearModel train(std::span<const LabeledExample> examples, const TrainConfig& cfg, std::string feature_space_id)
{
    if (!(cfg.C > 0.0))
        throw Error(ErrorCode::invalid_argument, "C must be positive");
    if (cfg.epochs < 1)
        throw Error(ErrorCode::invalid_argument, "epochs must be at least 1");
    const ClassCounts counts = count_classes(examples);
    if (counts.positives == 0 || counts.negatives == 0)
        throw Error(ErrorCode::single_class, "training data needs both keyword and non-keyword examples");

    const std::size_t dim = examples.front().features.dimension;
    for (const LabeledExample& e : examples) {
        if (e.features.dimension != dim)
            throw Error(ErrorCode::dimension_mismatch, "examples have differing feature dimensions");
        for (const SparseEntry& s : e.features.entries) {
            if (s.index >= dim)
                throw Error(ErrorCode::dimension_mismatch, "feature index beyond dimension");
        }
    }

    const std::size_t n = examples.size();
    const double positive_weight =
        cfg.positive_weight.value_or(static_cast<double>(counts.negatives) / static_cast<double>(counts.positives));
    const double lambda = 1.0 / (cfg.C * static_cast<double>(n));
    const double offset = cfg.step_offset.value_or(static_cast<double>(n));

    std::vector<double> scale(dim, 1.0);
    if (cfg.scale_features) {
        std::vector<double> max_abs(dim, 0.0);
        for (const LabeledExample& e : examples)
            for (const SparseEntry& s : e.features.entries)
                max_abs[s.index] = std::max(max_abs[s.index], std::abs(s.value));
        for (std::size_t j = 0; j < dim; ++j)
            scale[j] = max_abs[j] > 0.0 ? 1.0 / max_abs[j] : 1.0;
    }

    std::vector<double> w(dim, 0.0);
    std::vector<double> w_sum(dim, 0.0);
    double b = 0.0;
    double b_sum = 0.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);

    LinearModel averaged;
    averaged.config = cfg;
    averaged.feature_space_id = std::move(feature_space_id);
    averaged.decision_threshold = cfg.decision_threshold;

    // Objective is tracked in training coordinates (after optional scaling).
    std::vector<LabeledExample> scaled;
    std::span<const LabeledExample> objective_set = examples;
    if (cfg.scale_features) {
        scaled.assign(examples.begin(), examples.end());
        for (LabeledExample& e : scaled)
            for (SparseEntry& s : e.features.entries)
                s.value *= scale[s.index];
        objective_set = scaled;
    }

    std::uint64_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t k = n - 1; k > 0; --k) {
            std::uniform_int_distribution<std::size_t> pick(0, k);
            std::swap(order[k], order[pick(rng)]);
        }
        for (const std::size_t i : order) {
            ++t;
            const LabeledExample& ex = examples[i];
            const double y = label_sign(ex);
            const double eta = 1.0 / (lambda * (static_cast<double>(t) + offset));
            const double margin = y * (sparse_dot(w, ex.features, scale) + b);
            const double decay = 1.0 - eta * lambda;
            for (double& wj : w)
                wj *= decay;
            if (margin < 1.0) {
                const double step = eta * (ex.keyword ? positive_weight : 1.0) * y;
                for (const SparseEntry& s : ex.features.entries)
                    w[s.index] += step * s.value * scale[s.index];
                b += step;
            }
            for (std::size_t j = 0; j < dim; ++j)
                w_sum[j] += w[j];
            b_sum += b;
        }

        averaged.weights.resize(dim);
        for (std::size_t j = 0; j < dim; ++j)
            averaged.weights[j] = w_sum[j] / static_cast<double>(t);
        averaged.bias = b_sum / static_cast<double>(t);
        averaged.objective_history.push_back(svm_objective(averaged, objective_set, cfg.C, positive_weight));
    }

    for (std::size_t j = 0; j < dim; ++j)
        averaged.weights[j] *= scale[j];
    return averaged;
}

double decision_value(const LinearModel& model, const WordFeatureVector& x)
{
    if (x.dimension != model.dimension())
        throw Error(ErrorCode::dimension_mismatch, "feature dimension " + std::to_string(x.dimension) +
                                                       " does not match model dimension " +
                                                       std::to_string(model.dimension()));
    double s = model.bias;
    for (const SparseEntry& e : x.entries)
        s += model.weights.at(e.index) * e.value;
    return s;
}

std::vector<ScoredWord> predict_keywords(const LinearModel& model, const TimedTranscript& doc,
                                         const FeatureSpace& space, const SentimentLexicon& lexicon,
                                         std::optional<double> threshold)
{
    if (!model.feature_space_id.empty() && model.feature_space_id != space.id())
        throw Error(ErrorCode::dimension_mismatch, "model was trained with feature space " +
                                                       model.feature_space_id + ", got " + space.id());
    const double cut = threshold.value_or(model.decision_threshold);
    const DocumentFeaturizer featurizer(space, lexicon, doc);
    std::vector<ScoredWord> out;
    for (std::size_t i = 0; i < doc.words.size(); ++i) {
        if (!featurizer.is_candidate(i))
            continue;
        const double score = decision_value(model, featurizer.featurize(i));
        if (score >= cut)
            out.push_back({i, score});
    }
    return out;
}

double f1_score(double precision, double recall)
{
    const double sum = precision + recall;
    return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

EvalReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t fn)
{
    EvalReport r;
    r.true_positives = tp;
    r.false_positives = fp;
    r.false_negatives = fn;
    r.precision = (tp + fp == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = (tp + fn == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

PrPoint precision_recall_at(std::span<const ScoredLabel> scored, double threshold)
{
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const ScoredLabel& s : scored) {
        const bool predicted = s.score >= threshold;
        if (predicted && s.keyword)
            ++tp;
        else if (predicted)
            ++fp;
        else if (s.keyword)
            ++fn;
    }
    const EvalReport r = report_from_counts(tp, fp, fn);
    return {threshold, r.precision, r.recall};
}

std::vector<PrPoint> pr_curve(std::span<const ScoredLabel> scored)
{
    std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
    std::sort(sorted.begin(), sorted.end(), [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
    const auto positives = static_cast<std::size_t>(
        std::count_if(sorted.begin(), sorted.end(), [](const ScoredLabel& s) { return s.keyword; }));

    // Descending sweep; each distinct score closes a group of tied examples.
    std::vector<PrPoint> curve;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        const double threshold = sorted[i].score;
        for (; i < sorted.size() && sorted[i].score == threshold; ++i)
            (sorted[i].keyword ? tp : fp)++;
        const EvalReport r = report_from_counts(tp, fp, positives - tp);
        curve.push_back({threshold, r.precision, r.recall});
    }
    std::reverse(curve.begin(), curve.end());
    return curve;
}

std::vector<PrPoint> pr_curve(const LinearModel& model, std::span<const LabeledVideo> videos)
{
    std::vector<ScoredLabel> scored;
    for (const LabeledVideo& v : videos)
        for (const LabeledExample& e : v.examples)
            scored.push_back({decision_value(model, e.features), e.keyword});
    return pr_curve(scored);
}

double select_threshold(std::span<const PrPoint> curve, double min_precision)
{
    if (curve.empty())
        throw Error(ErrorCode::invalid_argument, "empty precision-recall curve");
    const PrPoint* best = nullptr;
    for (const PrPoint& p : curve) {
        if (p.precision >= min_precision && (best == nullptr || p.threshold < best->threshold))
            best = &p;
    }
    if (best == nullptr)
        throw Error(ErrorCode::infeasible, "no threshold reaches precision " + std::to_string(min_precision));
    return best->threshold;
}

std::vector<bool> keyword_labels(const TimedTranscript& doc, std::span<const EditSet> edits, int min_experts)
{
    std::vector<int> starts(doc.words.size(), 0);
    for (const EditSet& set : edits) {
        for (const EditInsertion& ins : set.insertions) {
            const double at = std::clamp(ins.start_s, 0.0, doc.duration_s);
            if (const auto idx = word_at_time(doc, at))
                ++starts[*idx];
        }
    }
    std::vector<bool> labels(doc.words.size());
    for (std::size_t i = 0; i < starts.size(); ++i)
        labels[i] = starts[i] >= min_experts;
    return labels;
}

LabeledVideo label_video(const TimedTranscript& tagged_doc, std::span<const EditSet> edits,
                         const FeatureSpace& space, const SentimentLexicon& lexicon, int min_experts)
{
    const std::vector<bool> labels = keyword_labels(tagged_doc, edits, min_experts);
    const DocumentFeaturizer featurizer(space, lexicon, tagged_doc);
    LabeledVideo video;
    video.video_id = tagged_doc.video_id;
    for (std::size_t i = 0; i < tagged_doc.words.size(); ++i) {
        video.norms.push_back(tagged_doc.words[i].norm);
        if (!featurizer.is_candidate(i))
            continue;
        video.examples.push_back({featurizer.featurize(i), labels[i], tagged_doc.video_id, i});
    }
    return video;
}

std::vector<std::pair<std::string, std::string>> detect_leakage(std::span<const LabeledVideo> videos)
{
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < videos.size(); ++i)
        for (std::size_t j = i + 1; j < videos.size(); ++j)
            if (!videos[i].norms.empty() && videos[i].norms == videos[j].norms)
                pairs.emplace_back(videos[i].video_id, videos[j].video_id);
    return pairs;
}

CrossValidationReport cross_validate(std::span<const LabeledVideo> videos, const TrainConfig& cfg)
{
    if (videos.size() < 2)
        throw Error(ErrorCode::invalid_argument, "leave-one-video-out needs at least two videos");

    const auto run_fold = [&](std::size_t held_out) {
        std::vector<LabeledExample> training;
        for (std::size_t v = 0; v < videos.size(); ++v) {
            if (v != held_out)
                training.insert(training.end(), videos[v].examples.begin(), videos[v].examples.end());
        }
        const LinearModel model = train(training, cfg);
        FoldResult fold;
        fold.video_id = videos[held_out].video_id;
        std::size_t tp = 0, fp = 0, fn = 0;
        for (const LabeledExample& e : videos[held_out].examples) {
            const double score = decision_value(model, e.features);
            fold.scores.push_back({score, e.keyword});
            const bool predicted = score >= cfg.decision_threshold;
            if (predicted && e.keyword)
                ++tp;
            else if (predicted)
                ++fp;
            else if (e.keyword)
                ++fn;
        }
        fold.report = report_from_counts(tp, fp, fn);
        return fold;
    };

    std::vector<std::future<FoldResult>> pending;
    for (std::size_t v = 0; v < videos.size(); ++v)
        pending.push_back(std::async(std::launch::async, run_fold, v));

    CrossValidationReport report;
    std::size_t tp = 0, fp = 0, fn = 0;
    double p = 0.0, r = 0.0, f = 0.0;
    for (auto& fut : pending) {
        FoldResult fold = fut.get();
        tp += fold.report.true_positives;
        fp += fold.report.false_positives;
        fn += fold.report.false_negatives;
        p += fold.report.precision;
        r += fold.report.recall;
        f += fold.report.f1;
        report.folds.push_back(std::move(fold));
    }
    const double k = static_cast<double>(videos.size());
    report.pooled = report_from_counts(tp, fp, fn);
    report.macro.precision = p / k;
    report.macro.recall = r / k;
    report.macro.f1 = f / k;
    report.macro.true_positives = tp;
    report.macro.false_positives = fp;
    report.macro.false_negatives = fn;
    report.leakage = detect_leakage(videos);
    return report;
}

std::string serialize_model(const LinearModel& model)
{
    json weights = json::array();
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        if (model.weights[j] != 0.0)
            weights.push_back(json::array({j, model.weights[j]}));
    }
    const json doc = {{"format", "bscript.linear_model"},
                      {"version", kModelVersion},
                      {"dimension", model.weights.size()},
                      {"weights", std::move(weights)},
                      {"bias", model.bias},
                      {"threshold", model.decision_threshold},
                      {"feature_space_id", model.feature_space_id},
                      {"train_config", config_to_json(model.config)},
                      {"objective_history", model.objective_history},
                      {"metrics", model.metrics}};
    return doc.dump();
}

LinearModel parse_model(std::string_view document)
{
    try {
        const json doc = json::parse(document);
        if (doc.at("format").get<std::string>() != "bscript.linear_model")
            throw Error(ErrorCode::invalid_document, "not a linear model artifact");
        if (doc.at("version").get<int>() != kModelVersion)
            throw Error(ErrorCode::invalid_document, "unsupported model version");
        LinearModel m;
        m.weights.assign(doc.at("dimension").get<std::size_t>(), 0.0);
        for (const json& entry : doc.at("weights")) {
            const auto j = entry.at(0).get<std::size_t>();
            if (j >= m.weights.size())
                throw Error(ErrorCode::invalid_document, "weight index beyond dimension");
            m.weights[j] = entry.at(1).get<double>();
        }
        m.bias = doc.at("bias").get<double>();
        m.decision_threshold = doc.at("threshold").get<double>();
        m.feature_space_id = doc.at("feature_space_id").get<std::string>();
        m.config = config_from_json(doc.at("train_config"));
        m.objective_history = doc.at("objective_history").get<std::vector<double>>();
        m.metrics = doc.at("metrics").get<std::map<std::string, double>>();
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("malformed model: ") + e.what());
    }
}

}  // namespace bscript
