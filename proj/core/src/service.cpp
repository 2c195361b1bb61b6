#include "bscript/service.hpp"

#include "bscript/agreement.hpp"
#include "bscript/classifier.hpp"
#include "bscript/edits.hpp"
#include "bscript/features.hpp"
#include "bscript/resources.hpp"

#include "hash.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <limits>

#include "json.hpp"

namespace bscript {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kProjectVersion = 1;

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_relative() ? base / path : path;
}

void parse_bind(ServiceConfig& cfg, const std::string& address)
{
    const auto colon = address.rfind(':');
    if (colon == std::string::npos)
        throw Error(ErrorCode::invalid_argument, "bind address must be host:port");
    cfg.bind_host = address.substr(0, colon);
    try {
        cfg.bind_port = std::stoi(address.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument, "bad port in bind address '" + address + "'");
    }
}

}  // namespace

struct ProjectService::Artifacts {
    std::optional<LinearModel> model;
    std::optional<FeatureSpace> space;
    std::string model_version = "none";
    std::optional<std::vector<EditSet>> corpus;
    std::string corpus_version = "none";
};

ServiceConfig load_service_config(const fs::path& path)
{
    ServiceConfig cfg;
    const fs::path base = path.parent_path();
    cfg.providers_base_dir = base;
    try {
        const json j = json::parse(read_file(path));
        if (j.contains("data_dir"))
            cfg.data_dir = resolve(base, j["data_dir"].get<std::string>());
        if (j.contains("model_path"))
            cfg.model_path = resolve(base, j["model_path"].get<std::string>());
        if (j.contains("feature_space_path"))
            cfg.feature_space_path = resolve(base, j["feature_space_path"].get<std::string>());
        if (j.contains("expert_corpus_path"))
            cfg.expert_corpus_path = resolve(base, j["expert_corpus_path"].get<std::string>());
        if (j.contains("providers"))
            cfg.providers_json = j["providers"].dump();
        if (j.contains("bind_address"))
            parse_bind(cfg, j["bind_address"].get<std::string>());
        cfg.max_algorithmic = j.value("max_algorithmic", std::size_t{0});
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, "bad service config " + path.string() + ": " + e.what());
    }
    return cfg;
}

void apply_env_overrides(ServiceConfig& cfg,
                         const std::function<std::optional<std::string>(const std::string&)>& getenv)
{
    if (const auto v = getenv("BSCRIPT_SERVICE_DATA_DIR"))
        cfg.data_dir = *v;
    if (const auto v = getenv("BSCRIPT_MODEL_PATH"))
        cfg.model_path = fs::path(*v);
    if (const auto v = getenv("BSCRIPT_FEATURE_SPACE_PATH"))
        cfg.feature_space_path = fs::path(*v);
    if (const auto v = getenv("BSCRIPT_EXPERT_CORPUS"))
        cfg.expert_corpus_path = fs::path(*v);
    if (const auto v = getenv("BSCRIPT_BIND"))
        parse_bind(cfg, *v);
}

void apply_env_overrides(ServiceConfig& cfg)
{
    apply_env_overrides(cfg, [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (v == nullptr || *v == '\0')
            return std::nullopt;
        return std::string(v);
    });
}

std::string project_to_json(const Project& p)
{
    json log = json::array();
    for (const QueryLogEntry& q : p.query_log)
        log.push_back({{"query", q.query}, {"style", q.style}, {"at", q.at}});
    const json doc = {{"format", "bscript.project"},
                      {"version", kProjectVersion},
                      {"project_id", p.project_id},
                      {"media_url", p.media_url},
                      {"created_at", p.created_at},
                      {"updated_at", p.updated_at},
                      {"revision", p.session.revision()},
                      {"transcript", json::parse(serialize_transcript(p.transcript))},
                      {"session", json::parse(export_edl(p.session))},
                      {"query_log", std::move(log)}};
    return doc.dump();
}

Project project_from_json(std::string_view document)
{
    try {
        const json j = json::parse(document);
        if (j.value("format", std::string()) != "bscript.project" || j.value("version", 0) != kProjectVersion)
            throw Error(ErrorCode::invalid_document, "not a version 1 project document");
        TimedTranscript transcript = parse_transcript(j.at("transcript").dump());
        EditSession session = import_edl(j.at("session").dump());
        if (session.video_id() != transcript.video_id)
            throw Error(ErrorCode::invalid_document, "session video does not match the transcript");
        std::vector<QueryLogEntry> log;
        for (const json& q : j.value("query_log", json::array()))
            log.push_back({q.at("query").get<std::string>(), q.value("style", std::string("both")),
                           q.value("at", std::string())});
        return Project{j.at("project_id").get<std::string>(),
                       std::move(transcript),
                       j.value("media_url", std::string()),
                       std::move(session),
                       std::move(log),
                       j.value("created_at", std::string()),
                       j.value("updated_at", std::string())};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("malformed project document: ") + e.what());
    }
}

ProjectService::ProjectService(ServiceConfig config)
    : ProjectService(config, [&] {
          auto registry = std::make_shared<ProviderRegistry>();
          register_providers(*registry, config.providers_json, config.providers_base_dir);
          return std::shared_ptr<const ProviderRegistry>(std::move(registry));
      }())
{
}

ProjectService::ProjectService(ServiceConfig config, std::shared_ptr<const ProviderRegistry> providers)
    : config_(std::move(config)), providers_(std::move(providers))
{
    if (!providers_)
        providers_ = std::make_shared<ProviderRegistry>();
    const fs::path dir = config_.data_dir / "projects";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());

    std::uint64_t max_seq = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json")
            continue;
        Project p = project_from_json(read_file(entry.path()));
        if (p.project_id != entry.path().stem().string())
            throw Error(ErrorCode::invalid_document, entry.path().string() + " holds project " + p.project_id);
        if (p.project_id.rfind("proj-", 0) == 0) {
            try {
                max_seq = std::max<std::uint64_t>(max_seq, std::stoull(p.project_id.substr(5)));
            } catch (const std::exception&) {
            }
        }
        const std::string id = p.project_id;
        projects_.emplace(id, std::make_shared<Slot>(std::move(p)));
    }
    next_project_ = max_seq + 1;
    reload_artifacts();
}

void ProjectService::reload_artifacts()
{
    auto fresh = std::make_shared<Artifacts>();
    if (config_.model_path) {
        const std::string model_doc = read_file(*config_.model_path);
        fresh->model = parse_model(model_doc);
        const fs::path space_path =
            config_.feature_space_path.value_or(config_.model_path->parent_path() / "feature_space.json");
        fresh->space = FeatureSpace::parse(read_file(space_path));
        if (!fresh->model->feature_space_id.empty() && fresh->model->feature_space_id != fresh->space->id())
            throw Error(ErrorCode::dimension_mismatch, "model and feature space do not belong together");
        fresh->model_version = detail::content_hash(model_doc);
    }
    if (config_.expert_corpus_path) {
        const std::string corpus_doc = read_file(*config_.expert_corpus_path);
        fresh->corpus = parse_edit_corpus(corpus_doc);
        fresh->corpus_version = detail::content_hash(corpus_doc);
    }
    std::lock_guard lock(artifacts_mutex_);
    artifacts_ = std::move(fresh);
}

std::shared_ptr<const ProjectService::Artifacts> ProjectService::artifacts() const
{
    std::lock_guard lock(artifacts_mutex_);
    return artifacts_;
}

fs::path ProjectService::project_path(std::string_view project_id) const
{
    return config_.data_dir / "projects" / (std::string(project_id) + ".json");
}

void ProjectService::persist(const Project& project) const
{
    write_file_atomic(project_path(project.project_id), project_to_json(project));
}

std::shared_ptr<ProjectService::Slot> ProjectService::slot(std::string_view project_id) const
{
    std::lock_guard lock(projects_mutex_);
    const auto it = projects_.find(project_id);
    if (it == projects_.end())
        throw Error(ErrorCode::not_found, "no project '" + std::string(project_id) + "'");
    return it->second;
}

Project ProjectService::create_project(std::string_view transcript_json, std::string media_url, double duration_s)
{
    TimedTranscript transcript = parse_transcript(transcript_json);
    if (duration_s > 0.0) {
        if (!transcript.words.empty() && transcript.words.back().end_s > duration_s + kSpanTolerance)
            throw Error(ErrorCode::invalid_document, "video shorter than its transcript");
        transcript.duration_s = duration_s;
    }
    std::lock_guard lock(projects_mutex_);
    char id[32];
    std::snprintf(id, sizeof id, "proj-%06llu", static_cast<unsigned long long>(next_project_));
    const std::string now = utc_now();
    EditSession session(std::string(id) + "-session", transcript.video_id, transcript.duration_s);
    Project project{id, std::move(transcript), std::move(media_url), std::move(session), {}, now, now};
    persist(project);
    ++next_project_;
    projects_.emplace(project.project_id, std::make_shared<Slot>(project));
    return project;
}

Project ProjectService::get_project(std::string_view project_id) const
{
    const auto s = slot(project_id);
    std::lock_guard lock(s->mutex);
    return s->project;
}

std::vector<std::string> ProjectService::project_ids() const
{
    std::lock_guard lock(projects_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : projects_)
        out.push_back(id);
    return out;
}

std::vector<Recommendation> ProjectService::recommendations(std::string_view project_id,
                                                            RecommendationSource source)
{
    const auto s = slot(project_id);
    TimedTranscript transcript = [&] {
        std::lock_guard lock(s->mutex);
        return s->project.transcript;
    }();
    const auto art = artifacts();
    const std::string version = source == RecommendationSource::algorithmic ? art->model_version
                                : source == RecommendationSource::expert    ? art->corpus_version
                                                                            : std::string("none");
    const auto key = std::make_tuple(std::string(project_id), source, version);
    {
        std::lock_guard lock(cache_mutex_);
        if (const auto it = cache_.find(key); it != cache_.end())
            return it->second;
    }

    std::vector<Recommendation> recs;
    switch (source) {
    case RecommendationSource::interval:
        recs = recommend_interval(transcript);
        break;
    case RecommendationSource::algorithmic: {
        if (!art->model)
            throw Error(ErrorCode::missing_model, "no keyword model configured");
        const std::size_t max_n =
            config_.max_algorithmic == 0 ? std::numeric_limits<std::size_t>::max() : config_.max_algorithmic;
        recs = recommend_algorithmic(*art->model, tag_pos(transcript), *art->space, SentimentLexicon::shipped(),
                                     max_n);
        break;
    }
    case RecommendationSource::expert: {
        if (!art->corpus)
            throw Error(ErrorCode::missing_corpus, "no expert edit corpus configured");
        const std::vector<EditSet> edits = edits_for_video(*art->corpus, transcript.video_id);
        if (edits.empty())
            throw Error(ErrorCode::missing_corpus, "expert corpus has no edits for video " + transcript.video_id);
        const ProbabilityTrack track = probability_track(edits, transcript.duration_s);
        recs = recommend_expert(track, edits, transcript);
        break;
    }
    }
    recs = normalize(std::move(recs), transcript.duration_s);

    std::lock_guard lock(cache_mutex_);
    return cache_.emplace(key, std::move(recs)).first->second;
}

std::size_t ProjectService::cache_size() const
{
    std::lock_guard lock(cache_mutex_);
    return cache_.size();
}

SearchResult ProjectService::search(std::string_view project_id, const SearchRequest& request)
{
    const auto s = slot(project_id);
    SearchResult result = providers_->search(request);
    std::lock_guard lock(s->mutex);
    Project next = s->project;
    const std::string style = request.style == StyleFilter::both           ? "both"
                              : request.style == StyleFilter::social_media ? "social_media"
                                                                           : "professional";
    next.query_log.push_back({normalize_query(request.query), style, utc_now()});
    persist(next);
    s->project = std::move(next);
    return result;
}

MutationResult ProjectService::mutate(std::string_view project_id, const EditOp& op, std::uint64_t expected_revision)
{
    const auto s = slot(project_id);
    std::lock_guard lock(s->mutex);
    if (s->project.session.revision() != expected_revision)
        throw Error(ErrorCode::revision_conflict, "expected revision " + std::to_string(expected_revision) +
                                                      ", current is " +
                                                      std::to_string(s->project.session.revision()));
    Project next = s->project;
    MutationResult result;
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, InsertOp>) {
                if (o.word_index.has_value() == o.at_s.has_value())
                    throw Error(ErrorCode::invalid_argument, "insert needs exactly one of at_s and word_index");
                result.insertion_id = o.word_index
                                          ? next.session.insert_at_word(o.asset, next.transcript, *o.word_index, o.origin)
                                          : next.session.insert(o.asset, *o.at_s, o.origin);
            } else if constexpr (std::is_same_v<T, MoveOp>) {
                next.session.move(o.insertion_id, o.new_start_s);
            } else if constexpr (std::is_same_v<T, ResizeOp>) {
                next.session.resize(o.insertion_id, o.new_duration_s);
            } else {
                next.session.remove(o.insertion_id);
            }
        },
        op);
    next.updated_at = utc_now();
    persist(next);
    s->project = std::move(next);
    result.revision = s->project.session.revision();
    return result;
}

std::string ProjectService::export_session(std::string_view project_id, std::string_view format) const
{
    const Project p = get_project(project_id);
    if (format == "edl-json")
        return export_edl(p.session);
    if (format == "csv")
        return export_csv(p.session);
    throw Error(ErrorCode::invalid_argument, "unknown export format '" + std::string(format) + "'");
}

PlaybackPlan ProjectService::playback(std::string_view project_id) const
{
    return get_project(project_id).session.playback_plan();
}

int http_status(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_document: return 400;
    case ErrorCode::invalid_argument:
    case ErrorCode::out_of_range:
    case ErrorCode::single_class:
    case ErrorCode::dimension_mismatch:
    case ErrorCode::infeasible: return 422;
    case ErrorCode::not_found:
    case ErrorCode::unknown_id: return 404;
    case ErrorCode::overlap:
    case ErrorCode::revision_conflict:
    case ErrorCode::missing_model:
    case ErrorCode::missing_corpus:
    case ErrorCode::duplicate_name: return 409;
    case ErrorCode::provider_unavailable:
    case ErrorCode::auth_failure: return 502;
    case ErrorCode::io_error: return 500;
    }
    return 500;
}

}  // namespace bscript
