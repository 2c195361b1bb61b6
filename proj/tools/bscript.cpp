// bscript command line: ingest, train, evaluate, recommend, analyze, export, serve.

#include <bscript/agreement.hpp>
#include <bscript/classifier.hpp>
#include <bscript/error.hpp>
#include <bscript/features.hpp>
#include <bscript/recommend.hpp>
#include <bscript/resources.hpp>
#include <bscript/service.hpp>
#include <bscript/session.hpp>
#include <bscript/svg.hpp>

#include "CLI11.hpp"
#include "json.hpp"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bscript;

namespace {

void print_error(std::string_view code, const std::string& message)
{
    std::cerr << "error: " << json{{"code", code}, {"message", message}}.dump() << '\n';
}

/// Writes to the file, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& content)
{
    if (path.empty() || path == "-") {
        std::cout << content;
        if (content.empty() || content.back() != '\n')
            std::cout << '\n';
        return;
    }
    write_file_atomic(path, content);
}

/// Every <dir>/*.transcript.json, sorted by file name.
std::vector<TimedTranscript> load_transcript_dir(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::not_found, "no transcript directory " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 16 && name.ends_with(".transcript.json"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw Error(ErrorCode::not_found, "no *.transcript.json files in " + dir.string());
    std::vector<TimedTranscript> out;
    for (const fs::path& f : files)
        out.push_back(load_transcript(f));
    return out;
}

struct Resources {
    std::string stopwords;
    std::string lexicon;
    std::string tagset;

    void add_options(CLI::App* cmd)
    {
        cmd->add_option("--stopwords", stopwords, "Stopword list, one entry per line")->check(CLI::ExistingFile);
        cmd->add_option("--lexicon", lexicon, "Sentiment lexicon TSV")->check(CLI::ExistingFile);
        cmd->add_option("--tagset", tagset, "POS tagset, one tag per line")->check(CLI::ExistingFile);
    }
    StopwordList stops() const { return stopwords.empty() ? StopwordList::english() : StopwordList::load(stopwords); }
    SentimentLexicon lex() const { return lexicon.empty() ? SentimentLexicon::shipped() : SentimentLexicon::load(lexicon); }
    Tagset tags() const { return tagset.empty() ? universal_tagset() : load_tagset(tagset); }
};

std::string fmt(double v, int digits = 3)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void print_report_row(const std::string& name, const EvalReport& r)
{
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %6zu %6zu %6zu\n", name.c_str(), fmt(r.precision).c_str(),
                  fmt(r.recall).c_str(), fmt(r.f1).c_str(), r.true_positives, r.false_positives, r.false_negatives);
    std::cout << line;
}

void print_report_header()
{
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %6s %6s %6s\n", "video", "precision", "recall", "f1", "tp",
                  "fp", "fn");
    std::cout << line;
}

json report_json(const EvalReport& r)
{
    return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
            {"tp", r.true_positives},   {"fp", r.false_positives}, {"fn", r.false_negatives}};
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string output;
    bool no_tag = false;
};

int run_ingest(const IngestArgs& a)
{
    TimedTranscript t = load_transcript(a.input);
    if (!a.no_tag)
        t = tag_pos(std::move(t));
    emit(a.output, serialize_transcript(t));
    std::cerr << "ingested " << t.video_id << ": " << t.words.size() << " words, " << fmt(t.duration_s, 2) << " s\n";
    return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    std::string corpus;
    std::string labels;
    std::string out_dir;
    TrainConfig cfg;
    int min_experts = 2;
    double precision_floor = 0.6;
    std::size_t max_vocabulary = 50'000;
    Resources res;
};

struct LabeledCorpus {
    FeatureSpace space;
    std::vector<LabeledVideo> videos;
};

LabeledCorpus label_corpus(const std::vector<TimedTranscript>& docs, const std::vector<EditSet>& edits,
                           const FeatureSpace& space, const SentimentLexicon& lex, int min_experts)
{
    LabeledCorpus out{space, {}};
    for (const TimedTranscript& doc : docs) {
        const auto mine = edits_for_video(edits, doc.video_id);
        out.videos.push_back(label_video(doc, mine, space, lex, min_experts));
    }
    return out;
}

std::vector<TimedTranscript> tagged(std::vector<TimedTranscript> docs)
{
    for (TimedTranscript& d : docs)
        d = tag_pos(std::move(d));
    return docs;
}

int run_train(const TrainArgs& a)
{
    const auto docs = tagged(load_transcript_dir(a.corpus));
    const auto edits = load_edit_corpus(a.labels);
    const auto lex = a.res.lex();
    const FeatureSpace space = build_feature_space(docs, a.res.stops(), a.res.tags(), {a.max_vocabulary});
    const LabeledCorpus data = label_corpus(docs, edits, space, lex, a.min_experts);

    const CrossValidationReport cv = cross_validate(data.videos, a.cfg);
    std::cout << "leave-one-video-out, " << cv.folds.size() << " folds, C=" << a.cfg.C << ", epochs=" << a.cfg.epochs
              << ", seed=" << a.cfg.seed << "\n";
    print_report_header();
    for (const FoldResult& f : cv.folds)
        print_report_row(f.video_id, f.report);
    print_report_row("pooled", cv.pooled);
    print_report_row("macro", cv.macro);
    for (const auto& [x, y] : cv.leakage)
        std::cerr << "warning: videos " << x << " and " << y << " have identical word sequences\n";

    const auto scores = cv.pooled_scores();
    const auto curve = pr_curve(scores);
    std::optional<double> threshold;
    try {
        threshold = select_threshold(curve, a.precision_floor);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::infeasible)
            throw;
    }
    if (threshold) {
        const PrPoint at = precision_recall_at(scores, *threshold);
        std::cout << "threshold for precision >= " << fmt(a.precision_floor, 2) << ": " << fmt(*threshold, 4)
                  << " (precision " << fmt(at.precision) << ", recall " << fmt(at.recall) << ")\n";
    } else {
        std::cout << "no threshold reaches precision " << fmt(a.precision_floor, 2) << "; keeping "
                  << fmt(a.cfg.decision_threshold, 4) << "\n";
    }

    std::vector<LabeledExample> all;
    for (const LabeledVideo& v : data.videos)
        all.insert(all.end(), v.examples.begin(), v.examples.end());
    TrainConfig final_cfg = a.cfg;
    if (threshold)
        final_cfg.decision_threshold = *threshold;
    LinearModel model = train(all, final_cfg, space.id());
    model.metrics = {{"cv_pooled_precision", cv.pooled.precision}, {"cv_pooled_recall", cv.pooled.recall},
                     {"cv_pooled_f1", cv.pooled.f1},               {"cv_macro_f1", cv.macro.f1}};

    const fs::path out(a.out_dir);
    fs::create_directories(out);
    write_file_atomic(out / "model.json", serialize_model(model));
    write_file_atomic(out / "feature_space.json", space.serialize());

    std::string csv = "threshold,precision,recall\n";
    std::vector<std::pair<double, double>> points;
    for (const PrPoint& p : curve) {
        csv += fmt(p.threshold, 6) + "," + fmt(p.precision, 6) + "," + fmt(p.recall, 6) + "\n";
        points.emplace_back(p.recall, p.precision);
    }
    std::sort(points.begin(), points.end());
    write_file_atomic(out / "pr_curve.csv", csv);
    PlotSpec spec;
    spec.title = "Precision-recall, leave-one-video-out";
    spec.x_label = "recall";
    spec.y_label = "precision";
    spec.reference_y = a.precision_floor;
    write_file_atomic(out / "pr_curve.svg", line_plot_svg(points, spec));

    json folds = json::array();
    for (const FoldResult& f : cv.folds)
        folds.push_back({{"video_id", f.video_id}, {"report", report_json(f.report)}});
    json leakage = json::array();
    for (const auto& [x, y] : cv.leakage)
        leakage.push_back({x, y});
    const json report{{"folds", folds},
                      {"pooled", report_json(cv.pooled)},
                      {"macro", report_json(cv.macro)},
                      {"leakage", leakage},
                      {"threshold", threshold ? json(*threshold) : json(nullptr)},
                      {"precision_floor", a.precision_floor},
                      {"feature_space_id", space.id()},
                      {"dimension", space.dimension()}};
    write_file_atomic(out / "cv_report.json", report.dump(1));
    std::cout << "wrote model.json, feature_space.json, pr_curve.csv, pr_curve.svg, cv_report.json to "
              << out.string() << "\n";
    return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
    std::string model;
    std::string feature_space;
    std::string corpus;
    std::string labels;
    std::optional<double> threshold;
    int min_experts = 2;
    std::string lexicon;
};

int run_evaluate(const EvaluateArgs& a)
{
    const LinearModel model = parse_model(read_file(a.model));
    const fs::path space_path = a.feature_space.empty() ? fs::path(a.model).parent_path() / "feature_space.json"
                                                        : fs::path(a.feature_space);
    const FeatureSpace space = FeatureSpace::parse(read_file(space_path));
    const SentimentLexicon lex = a.lexicon.empty() ? SentimentLexicon::shipped() : SentimentLexicon::load(a.lexicon);
    const auto docs = tagged(load_transcript_dir(a.corpus));
    const auto edits = load_edit_corpus(a.labels);

    print_report_header();
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const TimedTranscript& doc : docs) {
        const auto mine = edits_for_video(edits, doc.video_id);
        const auto labels = keyword_labels(doc, mine, a.min_experts);
        std::set<std::size_t> truth, predicted;
        for (std::size_t i = 0; i < doc.words.size(); ++i)
            if (labels[i] && !space.stopwords().contains(doc.words[i].norm))
                truth.insert(i);
        for (const ScoredWord& s : predict_keywords(model, doc, space, lex, a.threshold))
            predicted.insert(s.word_index);
        const EvalReport r = evaluate(predicted, truth);
        print_report_row(doc.video_id, r);
        tp += r.true_positives;
        fp += r.false_positives;
        fn += r.false_negatives;
    }
    print_report_row("pooled", report_from_counts(tp, fp, fn));
    return 0;
}

// ---- recommend ------------------------------------------------------------

struct RecommendArgs {
    std::string transcript;
    std::string source = "interval";
    std::string model;
    std::string feature_space;
    std::string edits;
    std::string lexicon;
    std::size_t max_n = 0;
    double period_s = kIntervalPeriod;
    double duration_s = kIntervalDuration;
    double bin_s = kDefaultBinSeconds;
    std::string output;
};

int run_recommend(const RecommendArgs& a)
{
    const auto source = parse_source(a.source);
    if (!source)
        throw Error(ErrorCode::invalid_argument, "source must be algorithmic, expert or interval");
    TimedTranscript doc = load_transcript(a.transcript);
    std::vector<Recommendation> recs;
    switch (*source) {
    case RecommendationSource::interval:
        recs = recommend_interval(doc, a.period_s, a.duration_s);
        break;
    case RecommendationSource::algorithmic: {
        if (a.model.empty())
            throw Error(ErrorCode::missing_model, "--model is required for algorithmic recommendations");
        const LinearModel model = parse_model(read_file(a.model));
        const fs::path space_path = a.feature_space.empty() ? fs::path(a.model).parent_path() / "feature_space.json"
                                                            : fs::path(a.feature_space);
        const FeatureSpace space = FeatureSpace::parse(read_file(space_path));
        const SentimentLexicon lex = a.lexicon.empty() ? SentimentLexicon::shipped() : SentimentLexicon::load(a.lexicon);
        doc = tag_pos(std::move(doc));
        recs = recommend_algorithmic(model, doc, space, lex, a.max_n == 0 ? doc.words.size() : a.max_n);
        break;
    }
    case RecommendationSource::expert: {
        if (a.edits.empty())
            throw Error(ErrorCode::missing_corpus, "--edits is required for expert recommendations");
        const auto mine = edits_for_video(load_edit_corpus(a.edits), doc.video_id);
        if (mine.empty())
            throw Error(ErrorCode::missing_corpus, "edit corpus has no edits for video " + doc.video_id);
        recs = recommend_expert(probability_track(mine, doc.duration_s, a.bin_s), mine, doc);
        break;
    }
    }
    recs = normalize(std::move(recs), doc.duration_s);
    emit(a.output, json::parse(recommendations_to_json(recs)).dump(1));
    return 0;
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
    std::string edits;
    std::string transcripts;
    std::string out_dir;
    AgreementOptions opt;
};

int run_analyze(const AnalyzeArgs& a)
{
    const auto corpus = load_edit_corpus(a.edits);
    std::map<std::string, TimedTranscript> docs;
    for (TimedTranscript& t : load_transcript_dir(a.transcripts))
        docs.emplace(t.video_id, std::move(t));
    const AgreementReport report = analyze_agreement(corpus, docs, a.opt);
    const std::string text = to_json(report);
    if (!a.out_dir.empty()) {
        const fs::path out(a.out_dir);
        fs::create_directories(out);
        write_file_atomic(out / "agreement.json", text);
        write_file_atomic(out / "agreement.csv", to_csv(report));
        for (const VideoAgreement& v : report.videos)
            write_file_atomic(out / ("track_" + v.video_id + ".svg"), track_svg(v.track, v.video_id));
    }
    emit("-", text);
    std::cerr << "expert " << fmt(report.expert.mean, 4) << " (sd " << fmt(report.expert.sd, 4) << "), random "
              << fmt(report.random, 4) << ", query locality " << fmt(report.query_locality, 4) << "\n";
    return 0;
}

// ---- export ---------------------------------------------------------------

struct ExportArgs {
    std::string edl;
    std::string format = "csv";
    std::string output;
};

int run_export(const ExportArgs& a)
{
    const EditSession s = import_edl(read_file(a.edl));
    if (a.format == "csv")
        emit(a.output, export_csv(s));
    else if (a.format == "edl-json")
        emit(a.output, export_edl(s));
    else
        throw Error(ErrorCode::invalid_argument, "format must be csv or edl-json");
    return 0;
}

// ---- serve ----------------------------------------------------------------

struct ServeArgs {
    std::string config;
    std::string bind;
    std::string data_dir;
};

int run_serve(const ServeArgs& a)
{
    ServiceConfig cfg = a.config.empty() ? ServiceConfig{} : load_service_config(a.config);
    apply_env_overrides(cfg);
    if (!a.data_dir.empty())
        cfg.data_dir = a.data_dir;
    if (!a.bind.empty()) {
        apply_env_overrides(cfg, [&](const std::string& key) -> std::optional<std::string> {
            if (key == "BSCRIPT_BIND")
                return a.bind;
            return std::nullopt;
        });
    }

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    ProjectService service(cfg);
    HttpServer server(service);
    const int port = server.bind(cfg.bind_host, cfg.bind_port);
    std::cout << "listening on " << cfg.bind_host << ":" << port << ", data in " << cfg.data_dir.string() << std::endl;
    std::thread worker([&] { server.serve(); });
    int received = 0;
    sigwait(&signals, &received);
    std::cerr << "signal " << received << ", shutting down\n";
    server.stop();
    worker.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"bscript: transcript-based B-roll analysis, training and editing service"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bscript 0.1.0");

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate a transcript and fill in POS tags");
    c_ingest->add_option("transcript", ingest.input, "Transcript JSON")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("-o,--output", ingest.output, "Output file (stdout when omitted)");
    c_ingest->add_flag("--no-tag", ingest.no_tag, "Keep the transcript untagged");

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "Cross-validate and train the keyword classifier");
    c_train->add_option("--corpus", tr.corpus, "Directory of *.transcript.json files")->required();
    c_train->add_option("--labels", tr.labels, "Expert edit corpus JSON")->required()->check(CLI::ExistingFile);
    c_train->add_option("--out", tr.out_dir, "Output directory for the model and reports")->required();
    c_train->add_option("--C", tr.cfg.C, "Regularization trade-off")->capture_default_str()->check(CLI::PositiveNumber);
    c_train->add_option("--epochs", tr.cfg.epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
    c_train->add_option("--seed", tr.cfg.seed, "Shuffle seed")->capture_default_str();
    c_train->add_option("--positive-weight", tr.cfg.positive_weight, "Keyword class weight (default negatives/positives)");
    c_train->add_flag("--scale-features", tr.cfg.scale_features, "Max-abs column scaling during training");
    c_train->add_option("--min-experts", tr.min_experts, "Insertions needed to mark a keyword")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    c_train->add_option("--precision-floor", tr.precision_floor, "Precision floor for threshold selection")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    c_train->add_option("--max-vocabulary", tr.max_vocabulary, "Vocabulary cap")->capture_default_str();
    tr.res.add_options(c_train);

    EvaluateArgs ev;
    auto* c_eval = app.add_subcommand("evaluate", "Score a trained model against expert labels");
    c_eval->add_option("--model", ev.model, "model.json")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--feature-space", ev.feature_space, "feature_space.json (default: next to the model)");
    c_eval->add_option("--corpus", ev.corpus, "Directory of *.transcript.json files")->required();
    c_eval->add_option("--labels", ev.labels, "Expert edit corpus JSON")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--threshold", ev.threshold, "Decision threshold (default: the model's)");
    c_eval->add_option("--min-experts", ev.min_experts, "Insertions needed to mark a keyword")->capture_default_str();
    c_eval->add_option("--lexicon", ev.lexicon, "Sentiment lexicon TSV")->check(CLI::ExistingFile);

    RecommendArgs rec;
    auto* c_rec = app.add_subcommand("recommend", "Produce B-roll recommendations for one transcript");
    c_rec->add_option("--transcript", rec.transcript, "Transcript JSON")->required()->check(CLI::ExistingFile);
    c_rec->add_option("--source", rec.source, "algorithmic, expert or interval")
        ->capture_default_str()
        ->check(CLI::IsMember({"algorithmic", "expert", "interval"}));
    c_rec->add_option("--model", rec.model, "model.json for algorithmic recommendations");
    c_rec->add_option("--feature-space", rec.feature_space, "feature_space.json (default: next to the model)");
    c_rec->add_option("--edits", rec.edits, "Expert edit corpus for expert recommendations");
    c_rec->add_option("--lexicon", rec.lexicon, "Sentiment lexicon TSV")->check(CLI::ExistingFile);
    c_rec->add_option("--max", rec.max_n, "Keep at most this many algorithmic recommendations (0 keeps all)");
    c_rec->add_option("--period", rec.period_s, "Interval period in seconds")->capture_default_str();
    c_rec->add_option("--duration", rec.duration_s, "Interval duration in seconds")->capture_default_str();
    c_rec->add_option("--bin", rec.bin_s, "Probability track bin width")->capture_default_str();
    c_rec->add_option("-o,--output", rec.output, "Output file (stdout when omitted)");

    AnalyzeArgs an;
    auto* c_an = app.add_subcommand("analyze", "Agreement, baseline, usage statistics and query locality");
    c_an->add_option("--edits", an.edits, "Expert edit corpus JSON")->required()->check(CLI::ExistingFile);
    c_an->add_option("--transcripts", an.transcripts, "Directory of *.transcript.json files")->required();
    c_an->add_option("--out", an.out_dir, "Also write JSON, CSV and track SVGs here");
    c_an->add_option("--bin", an.opt.bin_s, "Coverage bin width in seconds")->capture_default_str();
    c_an->add_option("--trials", an.opt.trials, "Random baseline trials")->capture_default_str();
    c_an->add_option("--seed", an.opt.seed, "Random baseline seed")->capture_default_str();
    c_an->add_option("--radius", an.opt.locality_radius_s, "Query locality radius in seconds")->capture_default_str();

    ExportArgs ex;
    auto* c_ex = app.add_subcommand("export", "Convert an EDL document");
    c_ex->add_option("edl", ex.edl, "EDL JSON")->required()->check(CLI::ExistingFile);
    c_ex->add_option("--format", ex.format, "csv or edl-json")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "edl-json"}));
    c_ex->add_option("-o,--output", ex.output, "Output file (stdout when omitted)");

    ServeArgs sv;
    auto* c_serve = app.add_subcommand("serve", "Run the project service");
    c_serve->add_option("--config", sv.config, "Service config JSON")->check(CLI::ExistingFile);
    c_serve->add_option("--bind", sv.bind, "host:port");
    c_serve->add_option("--data-dir", sv.data_dir, "Project storage directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("invalid_argument", e.what());
        return 2;
    }

    try {
        if (c_ingest->parsed())
            return run_ingest(ingest);
        if (c_train->parsed())
            return run_train(tr);
        if (c_eval->parsed())
            return run_evaluate(ev);
        if (c_rec->parsed())
            return run_recommend(rec);
        if (c_an->parsed())
            return run_analyze(an);
        if (c_ex->parsed())
            return run_export(ex);
        if (c_serve->parsed())
            return run_serve(sv);
    } catch (const Error& e) {
        print_error(to_string(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("io_error", e.what());
        return 1;
    }
    return 1;
}
