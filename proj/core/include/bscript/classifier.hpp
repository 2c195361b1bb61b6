#pragma once

#include "bscript/edits.hpp"
#include "bscript/features.hpp"
#include "bscript/transcript.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bscript {

struct LabeledExample {
    WordFeatureVector features;
    bool keyword = false;
    std::string video_id;
    std::size_t word_index = 0;
};

/// Candidate words of one video with their labels and the normalized word
/// sequence (used to detect duplicated videos across folds).
struct LabeledVideo {
    std::string video_id;
    std::vector<LabeledExample> examples;
    std::vector<std::string> norms;
};

struct TrainConfig {
    double C = 0.01;
    int epochs = 30;
    /// Step size at update t is 1 / (lambda * (t + step_offset)), lambda = 1 / (C n).
    /// Empty means n, which caps the first steps at about C per unit class weight.
    std::optional<double> step_offset;
    /// Weight of the keyword class in the hinge term; empty means negatives / positives.
    std::optional<double> positive_weight;
    std::uint64_t seed = 42;
    /// Max-abs column scaling during training, folded back into the weights.
    bool scale_features = false;
    double decision_threshold = 0.0;
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    double decision_threshold = 0.0;
    std::string feature_space_id;
    TrainConfig config;
    /// Training objective of the averaged iterate after each epoch.
    std::vector<double> objective_history;
    std::map<std::string, double> metrics;

    std::size_t dimension() const noexcept { return weights.size(); }
    double norm() const;
};

struct EvalReport {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
};

struct ScoredWord {
    std::size_t word_index = 0;
    double score = 0.0;
};

struct ScoredLabel {
    double score = 0.0;
    bool keyword = false;
};

struct PrPoint {
    double threshold = 0.0;
    double precision = 1.0;
    double recall = 0.0;
};

struct FoldResult {
    std::string video_id;
    EvalReport report;
    std::vector<ScoredLabel> scores;
};

struct CrossValidationReport {
    std::vector<FoldResult> folds;
    /// Metrics over the union of held-out predictions.
    EvalReport pooled;
    /// Unweighted mean of per-video precision, recall and F1.
    EvalReport macro;
    /// Pairs of video ids whose word sequences are identical.
    std::vector<std::pair<std::string, std::string>> leakage;

    std::vector<ScoredLabel> pooled_scores() const;
};

/// (1/2)|w|^2 + C * sum_i cw(y_i) * max(0, 1 - y_i (w.x_i + b)).
double svm_objective(const LinearModel& model, std::span<const LabeledExample> examples,
                     double C, double positive_weight);

/// Averaged stochastic subgradient descent on svm_objective. Deterministic for a
/// given (examples, cfg). Throws Error(single_class) or Error(dimension_mismatch).
LinearModel train(std::span<const LabeledExample> examples, const TrainConfig& cfg,
                  std::string feature_space_id = {});

/// w.x + b. Throws Error(dimension_mismatch).
double decision_value(const LinearModel& model, const WordFeatureVector& x);

/// Non-stopword words scoring at or above the threshold (the model's when not given).
std::vector<ScoredWord> predict_keywords(const LinearModel& model, const TimedTranscript& doc,
                                         const FeatureSpace& space, const SentimentLexicon& lexicon,
                                         std::optional<double> threshold = std::nullopt);

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

EvalReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

template <typename Key>
EvalReport evaluate(const std::set<Key>& predicted, const std::set<Key>& truth)
{
    std::size_t tp = 0;
    for (const Key& k : predicted)
        tp += truth.count(k);
    return report_from_counts(tp, predicted.size() - tp, truth.size() - tp);
}

/// Precision and recall when predicting keyword for score >= threshold.
PrPoint precision_recall_at(std::span<const ScoredLabel> scored, double threshold);

/// One point per distinct score, thresholds ascending.
std::vector<PrPoint> pr_curve(std::span<const ScoredLabel> scored);
std::vector<PrPoint> pr_curve(const LinearModel& model, std::span<const LabeledVideo> videos);

/// Smallest threshold whose precision reaches min_precision. Throws Error(infeasible).
double select_threshold(std::span<const PrPoint> curve, double min_precision = 0.6);

/// Insertions starting at each word: a word is a keyword when at least
/// min_experts insertions start on it.
std::vector<bool> keyword_labels(const TimedTranscript& doc, std::span<const EditSet> edits,
                                 int min_experts = 2);

/// Featurizes the candidate words of a POS-tagged document and attaches labels.
LabeledVideo label_video(const TimedTranscript& tagged_doc, std::span<const EditSet> edits,
                         const FeatureSpace& space, const SentimentLexicon& lexicon,
                         int min_experts = 2);

std::vector<std::pair<std::string, std::string>> detect_leakage(std::span<const LabeledVideo> videos);

/// Leave-one-video-out. Fold i trains on every other video and scores video i
/// at cfg.decision_threshold. Throws Error(invalid_argument) for fewer than two videos.
CrossValidationReport cross_validate(std::span<const LabeledVideo> videos, const TrainConfig& cfg);

std::string serialize_model(const LinearModel& model);
LinearModel parse_model(std::string_view document);

}  // namespace bscript
