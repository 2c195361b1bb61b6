#pragma once

#include "bscript/session.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bscript {

enum class StyleFilter { social_media, professional, both };

std::optional<StyleFilter> parse_style_filter(std::string_view name) noexcept;

struct SearchRequest {
    std::string query;
    StyleFilter style = StyleFilter::both;
    std::size_t limit = 10;

    /// Throws Error(invalid_argument) on an empty query or zero limit.
    void validate() const;
};

struct RankedAsset {
    std::size_t rank = 0;
    BRollAsset asset;

    bool operator==(const RankedAsset&) const = default;
};

/// Ranks start at 1 and are contiguous within each list.
struct SearchResult {
    std::vector<RankedAsset> social_media;
    std::vector<RankedAsset> professional;

    bool empty() const noexcept { return social_media.empty() && professional.empty(); }
    bool operator==(const SearchResult&) const = default;
};

std::string search_result_to_json(const SearchResult& result);

/// One B-roll source. Every provider serves a single style.
class Provider {
public:
    virtual ~Provider() = default;

    virtual const std::string& name() const noexcept = 0;
    virtual AssetStyle style() const noexcept = 0;
    /// Best matches first, at most limit. The query is already normalized.
    virtual std::vector<BRollAsset> lookup(const std::string& normalized_query, std::size_t limit) const = 0;
};

SearchResult search(const Provider& provider, const SearchRequest& request);

/// Catalog entries: {asset_id, url, natural_duration_s, thumbnail?, tags: [..]}.
/// An asset matches when the normalized query equals one of its tags; earlier
/// tag positions rank higher, ties keep catalog order.
class FixtureProvider final : public Provider {
public:
    FixtureProvider(std::string name, AssetStyle style, std::string_view catalog_json);
    static std::unique_ptr<FixtureProvider> load(std::string name, AssetStyle style,
                                                 const std::filesystem::path& catalog);

    const std::string& name() const noexcept override { return name_; }
    AssetStyle style() const noexcept override { return style_; }
    std::vector<BRollAsset> lookup(const std::string& normalized_query, std::size_t limit) const override;

    std::size_t size() const noexcept { return entries_.size(); }

private:
    struct Entry {
        BRollAsset asset;
        std::vector<std::string> tags;
    };
    std::string name_;
    AssetStyle style_;
    std::vector<Entry> entries_;
};

enum class RemoteFormat { generic, giphy };

struct RemoteConfig {
    std::string name;
    AssetStyle style = AssetStyle::social_media;
    /// scheme://host[:port]/path
    std::string endpoint;
    std::string api_key_env;
    RemoteFormat format = RemoteFormat::generic;
    std::chrono::milliseconds timeout{5000};
    /// Used when the service reports no clip length.
    double default_duration_s = 3.0;
};

/// HTTP adapter. Sends GET endpoint?q=..&limit=..&api_key=.. and caches
/// successful responses per (query, limit). Transport failures raise
/// Error(provider_unavailable); 401 and 403 raise Error(auth_failure).
///
/// generic response: {"assets": [{asset_id, url, natural_duration_s, thumbnail}]}
/// giphy response:   {"data": [{id, images: {original: {mp4|url}, fixed_height_still: {url}}}]}
class RemoteProvider final : public Provider {
public:
    /// Throws Error(invalid_argument) when the key variable is unset or the
    /// endpoint cannot be parsed.
    explicit RemoteProvider(RemoteConfig config);

    const std::string& name() const noexcept override { return config_.name; }
    AssetStyle style() const noexcept override { return config_.style; }
    std::vector<BRollAsset> lookup(const std::string& normalized_query, std::size_t limit) const override;

    std::size_t cache_size() const;

private:
    RemoteConfig config_;
    std::string api_key_;
    std::string origin_;
    std::string path_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<std::string, std::size_t>, std::vector<BRollAsset>> cache_;
};

/// Named providers. Searching the registry merges all providers of each
/// requested style in registration order.
class ProviderRegistry {
public:
    /// Throws Error(duplicate_name).
    Provider& add(std::unique_ptr<Provider> provider);
    Provider& add_fixture(std::string name, AssetStyle style, const std::filesystem::path& catalog);
    Provider& add_remote(RemoteConfig config);

    const Provider* find(std::string_view name) const;
    std::vector<std::string> names() const;
    std::size_t size() const noexcept { return providers_.size(); }

    SearchResult search(const SearchRequest& request) const;
    /// Throws Error(not_found) for an unknown name.
    SearchResult search(std::string_view provider_name, const SearchRequest& request) const;

private:
    std::vector<std::unique_ptr<Provider>> providers_;
};

/// Provider section of a config file: a JSON list of
/// {name, type: fixture|remote, style, catalog | endpoint, api_key_env, format, timeout_ms}.
/// Relative catalog paths resolve against base_dir.
void register_providers(ProviderRegistry& registry, std::string_view config_json,
                        const std::filesystem::path& base_dir);

}  // namespace bscript
