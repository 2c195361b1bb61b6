#pragma once

#include "bscript/error.hpp"
#include "bscript/providers.hpp"
#include "bscript/recommend.hpp"
#include "bscript/session.hpp"
#include "bscript/transcript.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

namespace bscript {

struct ServiceConfig {
    std::filesystem::path data_dir = "bscript-data";
    std::optional<std::filesystem::path> model_path;
    /// Defaults to feature_space.json next to the model.
    std::optional<std::filesystem::path> feature_space_path;
    std::optional<std::filesystem::path> expert_corpus_path;
    /// Raw JSON list understood by register_providers.
    std::string providers_json = "[]";
    std::filesystem::path providers_base_dir = ".";
    std::string bind_host = "127.0.0.1";
    int bind_port = 8080;
    std::size_t max_algorithmic = 0;  ///< 0 keeps every predicted keyword.
};

/// Reads a JSON config file: {data_dir, model_path, feature_space_path,
/// expert_corpus_path, providers, bind_address "host:port",
/// max_algorithmic}. Relative paths resolve against the file's directory.
ServiceConfig load_service_config(const std::filesystem::path& path);

/// Applies BSCRIPT_SERVICE_DATA_DIR, BSCRIPT_MODEL_PATH,
/// BSCRIPT_FEATURE_SPACE_PATH, BSCRIPT_EXPERT_CORPUS and BSCRIPT_BIND.
void apply_env_overrides(ServiceConfig& config,
                         const std::function<std::optional<std::string>(const std::string&)>& getenv);
void apply_env_overrides(ServiceConfig& config);

struct QueryLogEntry {
    std::string query;
    std::string style;
    std::string at;

    bool operator==(const QueryLogEntry&) const = default;
};

struct Project {
    std::string project_id;
    TimedTranscript transcript;
    std::string media_url;
    EditSession session;
    std::vector<QueryLogEntry> query_log;
    std::string created_at;
    std::string updated_at;

    bool operator==(const Project&) const = default;
};

std::string project_to_json(const Project& project);
/// Throws Error(invalid_document) unless every module invariant holds.
Project project_from_json(std::string_view document);

struct InsertOp {
    BRollAsset asset;
    std::optional<double> at_s;
    std::optional<std::size_t> word_index;
    InsertionOrigin origin;
};
struct MoveOp {
    std::string insertion_id;
    double new_start_s = 0.0;
};
struct ResizeOp {
    std::string insertion_id;
    double new_duration_s = 0.0;
};
struct RemoveOp {
    std::string insertion_id;
};
using EditOp = std::variant<InsertOp, MoveOp, ResizeOp, RemoveOp>;

struct MutationResult {
    std::uint64_t revision = 0;
    std::optional<std::string> insertion_id;
};

/// Projects persisted as one JSON file each under data_dir/projects.
/// Mutations are compare-and-set on the session revision and reach disk
/// before they are acknowledged.
class ProjectService {
public:
    /// Builds the provider registry from the config. Loads every persisted
    /// project and the configured model and corpus.
    explicit ProjectService(ServiceConfig config);
    ProjectService(ServiceConfig config, std::shared_ptr<const ProviderRegistry> providers);

    const ServiceConfig& config() const noexcept { return config_; }

    /// Throws Error(invalid_document) for a bad transcript. A duration of
    /// zero takes the transcript duration.
    Project create_project(std::string_view transcript_json, std::string media_url = {}, double duration_s = 0.0);
    /// Throws Error(not_found).
    Project get_project(std::string_view project_id) const;
    std::vector<std::string> project_ids() const;

    /// Normalized list, cached per (project, source, artifact version).
    /// Throws Error(missing_model) or Error(missing_corpus).
    std::vector<Recommendation> recommendations(std::string_view project_id, RecommendationSource source);
    SearchResult search(std::string_view project_id, const SearchRequest& request);

    /// Throws Error(revision_conflict) when expected_revision is stale.
    MutationResult mutate(std::string_view project_id, const EditOp& op, std::uint64_t expected_revision);

    /// format: "edl-json" or "csv".
    std::string export_session(std::string_view project_id, std::string_view format) const;
    PlaybackPlan playback(std::string_view project_id) const;

    /// Reloads the model and corpus; callers holding the old snapshot keep it.
    void reload_artifacts();
    std::size_t cache_size() const;

private:
    struct Artifacts;
    struct Slot {
        explicit Slot(Project p) : project(std::move(p)) {}
        mutable std::mutex mutex;
        Project project;
    };

    std::shared_ptr<Slot> slot(std::string_view project_id) const;
    std::shared_ptr<const Artifacts> artifacts() const;
    std::filesystem::path project_path(std::string_view project_id) const;
    void persist(const Project& project) const;

    ServiceConfig config_;
    std::shared_ptr<const ProviderRegistry> providers_;

    mutable std::mutex projects_mutex_;
    std::map<std::string, std::shared_ptr<Slot>, std::less<>> projects_;
    std::uint64_t next_project_ = 1;

    mutable std::mutex artifacts_mutex_;
    std::shared_ptr<const Artifacts> artifacts_;

    mutable std::mutex cache_mutex_;
    std::map<std::tuple<std::string, RecommendationSource, std::string>, std::vector<Recommendation>> cache_;
};

/// Maps an error code to its HTTP status.
int http_status(ErrorCode code) noexcept;

/// REST front end. Routes:
///   GET    /healthz
///   POST   /projects
///   GET    /projects/{id}
///   GET    /projects/{id}/recommendations?source=algorithmic|expert|interval
///   GET    /projects/{id}/search?q=..&style=..&limit=..
///   POST   /projects/{id}/insertions
///   PATCH  /projects/{id}/insertions/{iid}
///   DELETE /projects/{id}/insertions/{iid}?expected_revision=..
///   GET    /projects/{id}/export?format=edl-json|csv
///   GET    /projects/{id}/playback
class HttpServer {
public:
    explicit HttpServer(ProjectService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Returns the bound port; port 0 picks a free one.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void serve();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace bscript
