#include "bscript/providers.hpp"

#include "bscript/error.hpp"
#include "bscript/recommend.hpp"
#include "bscript/resources.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>

#include "httplib.h"
#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {

bool wants(StyleFilter filter, AssetStyle style)
{
    if (filter == StyleFilter::both)
        return true;
    return (filter == StyleFilter::social_media) == (style == AssetStyle::social_media);
}

void append_ranked(std::vector<RankedAsset>& list, std::vector<BRollAsset> assets, std::size_t limit)
{
    for (BRollAsset& a : assets) {
        if (list.size() >= limit)
            return;
        list.push_back({list.size() + 1, std::move(a)});
    }
}

json ranked_json(const std::vector<RankedAsset>& list)
{
    json out = json::array();
    for (const RankedAsset& r : list)
        out.push_back({{"rank", r.rank}, {"asset", json::parse(asset_to_json(r.asset))}});
    return out;
}

AssetStyle style_from(const json& j)
{
    const auto style = parse_style(j.at("style").get<std::string>());
    if (!style)
        throw Error(ErrorCode::invalid_argument, "provider style must be social_media or professional");
    return *style;
}

}  // namespace

std::optional<StyleFilter> parse_style_filter(std::string_view name) noexcept
{
    if (name == "social_media")
        return StyleFilter::social_media;
    if (name == "professional")
        return StyleFilter::professional;
    if (name == "both" || name.empty())
        return StyleFilter::both;
    return std::nullopt;
}

void SearchRequest::validate() const
{
    if (normalize_query(query).empty())
        throw Error(ErrorCode::invalid_argument, "search query must be non-empty");
    if (limit < 1)
        throw Error(ErrorCode::invalid_argument, "search limit must be at least 1");
}

std::string search_result_to_json(const SearchResult& result)
{
    return json{{"social_media", ranked_json(result.social_media)},
                {"professional", ranked_json(result.professional)}}
        .dump();
}

SearchResult search(const Provider& provider, const SearchRequest& request)
{
    request.validate();
    SearchResult result;
    if (!wants(request.style, provider.style()))
        return result;
    auto& list = provider.style() == AssetStyle::social_media ? result.social_media : result.professional;
    append_ranked(list, provider.lookup(normalize_query(request.query), request.limit), request.limit);
    return result;
}

FixtureProvider::FixtureProvider(std::string name, AssetStyle style, std::string_view catalog_json)
    : name_(std::move(name)), style_(style)
{
    try {
        for (const json& j : json::parse(catalog_json)) {
            Entry e;
            e.asset.asset_id = j.at("asset_id").get<std::string>();
            e.asset.provider = name_;
            e.asset.url = j.at("url").get<std::string>();
            e.asset.natural_duration_s = j.at("natural_duration_s").get<double>();
            e.asset.style = style_;
            e.asset.thumbnail = j.value("thumbnail", std::string());
            for (const json& t : j.at("tags"))
                e.tags.push_back(normalize_query(t.get<std::string>()));
            if (!(e.asset.natural_duration_s > 0.0))
                throw Error(ErrorCode::invalid_document, "asset " + e.asset.asset_id + " has no positive duration");
            entries_.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("malformed fixture catalog: ") + e.what());
    }
}

std::unique_ptr<FixtureProvider> FixtureProvider::load(std::string name, AssetStyle style,
                                                       const std::filesystem::path& catalog)
{
    return std::make_unique<FixtureProvider>(std::move(name), style, read_file(catalog));
}

std::vector<BRollAsset> FixtureProvider::lookup(const std::string& normalized_query, std::size_t limit) const
{
    std::vector<std::pair<std::size_t, const Entry*>> hits;
    for (const Entry& e : entries_) {
        const auto it = std::find(e.tags.begin(), e.tags.end(), normalized_query);
        if (it != e.tags.end())
            hits.emplace_back(static_cast<std::size_t>(it - e.tags.begin()), &e);
    }
    std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<BRollAsset> out;
    for (const auto& [pos, entry] : hits) {
        if (out.size() >= limit)
            break;
        out.push_back(entry->asset);
    }
    return out;
}

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config))
{
    if (config_.name.empty())
        throw Error(ErrorCode::invalid_argument, "remote provider needs a name");
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url_re))
        throw Error(ErrorCode::invalid_argument, "remote provider " + config_.name + ": bad endpoint '" +
                                                     config_.endpoint + "'");
    origin_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (origin_.rfind("https://", 0) == 0)
        throw Error(ErrorCode::invalid_argument, "https endpoints need a TLS-enabled build");
#endif
    const char* key = config_.api_key_env.empty() ? nullptr : std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw Error(ErrorCode::invalid_argument, "remote provider " + config_.name + ": credentials variable '" +
                                                     config_.api_key_env + "' is not set");
    api_key_ = key;
}

std::size_t RemoteProvider::cache_size() const
{
    std::lock_guard lock(cache_mutex_);
    return cache_.size();
}

std::vector<BRollAsset> RemoteProvider::lookup(const std::string& normalized_query, std::size_t limit) const
{
    const auto key = std::make_pair(normalized_query, limit);
    {
        std::lock_guard lock(cache_mutex_);
        if (const auto it = cache_.find(key); it != cache_.end())
            return it->second;
    }

    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    const httplib::Params params{{"q", normalized_query}, {"limit", std::to_string(limit)}, {"api_key", api_key_}};
    const auto res = client.Get(path_, params, httplib::Headers{});
    if (!res)
        throw Error(ErrorCode::provider_unavailable,
                    "provider " + config_.name + " unreachable: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw Error(ErrorCode::auth_failure, "provider " + config_.name + " rejected the credentials");
    if (res->status != 200)
        throw Error(ErrorCode::provider_unavailable,
                    "provider " + config_.name + " answered HTTP " + std::to_string(res->status));

    std::vector<BRollAsset> assets;
    try {
        const json body = json::parse(res->body);
        if (config_.format == RemoteFormat::giphy) {
            for (const json& item : body.at("data")) {
                BRollAsset a;
                a.asset_id = item.at("id").get<std::string>();
                const json& original = item.at("images").at("original");
                a.url = original.contains("mp4") ? original.at("mp4").get<std::string>()
                                                 : original.at("url").get<std::string>();
                if (item.at("images").contains("fixed_height_still"))
                    a.thumbnail = item["images"]["fixed_height_still"].value("url", std::string());
                a.natural_duration_s = config_.default_duration_s;
                assets.push_back(std::move(a));
            }
        } else {
            for (const json& item : body.at("assets")) {
                BRollAsset a;
                a.asset_id = item.at("asset_id").get<std::string>();
                a.url = item.at("url").get<std::string>();
                a.natural_duration_s = item.value("natural_duration_s", config_.default_duration_s);
                a.thumbnail = item.value("thumbnail", std::string());
                assets.push_back(std::move(a));
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::provider_unavailable,
                    "provider " + config_.name + " sent an unreadable response: " + e.what());
    }
    std::erase_if(assets, [](const BRollAsset& a) { return !(a.natural_duration_s > 0.0); });
    for (BRollAsset& a : assets) {
        a.provider = config_.name;
        a.style = config_.style;
    }
    if (assets.size() > limit)
        assets.resize(limit);

    std::lock_guard lock(cache_mutex_);
    cache_.emplace(key, assets);
    return assets;
}

Provider& ProviderRegistry::add(std::unique_ptr<Provider> provider)
{
    if (find(provider->name()) != nullptr)
        throw Error(ErrorCode::duplicate_name, "provider '" + provider->name() + "' already registered");
    providers_.push_back(std::move(provider));
    return *providers_.back();
}

Provider& ProviderRegistry::add_fixture(std::string name, AssetStyle style, const std::filesystem::path& catalog)
{
    if (find(name) != nullptr)
        throw Error(ErrorCode::duplicate_name, "provider '" + name + "' already registered");
    return add(FixtureProvider::load(std::move(name), style, catalog));
}

Provider& ProviderRegistry::add_remote(RemoteConfig config)
{
    if (find(config.name) != nullptr)
        throw Error(ErrorCode::duplicate_name, "provider '" + config.name + "' already registered");
    return add(std::make_unique<RemoteProvider>(std::move(config)));
}

const Provider* ProviderRegistry::find(std::string_view name) const
{
    for (const auto& p : providers_) {
        if (p->name() == name)
            return p.get();
    }
    return nullptr;
}

std::vector<std::string> ProviderRegistry::names() const
{
    std::vector<std::string> out;
    for (const auto& p : providers_)
        out.push_back(p->name());
    return out;
}

SearchResult ProviderRegistry::search(const SearchRequest& request) const
{
    request.validate();
    const std::string query = normalize_query(request.query);
    SearchResult result;
    for (const auto& p : providers_) {
        if (!wants(request.style, p->style()))
            continue;
        auto& list = p->style() == AssetStyle::social_media ? result.social_media : result.professional;
        if (list.size() >= request.limit)
            continue;
        append_ranked(list, p->lookup(query, request.limit - list.size()), request.limit);
    }
    return result;
}

SearchResult ProviderRegistry::search(std::string_view provider_name, const SearchRequest& request) const
{
    const Provider* p = find(provider_name);
    if (p == nullptr)
        throw Error(ErrorCode::not_found, "no provider named '" + std::string(provider_name) + "'");
    return bscript::search(*p, request);
}

void register_providers(ProviderRegistry& registry, std::string_view config_json,
                        const std::filesystem::path& base_dir)
{
    json list;
    try {
        list = json::parse(config_json);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("provider config is not JSON: ") + e.what());
    }
    try {
        for (const json& j : list) {
            const std::string type = j.value("type", std::string("fixture"));
            const std::string name = j.at("name").get<std::string>();
            if (type == "fixture") {
                std::filesystem::path catalog = j.at("catalog").get<std::string>();
                if (catalog.is_relative())
                    catalog = base_dir / catalog;
                registry.add_fixture(name, style_from(j), catalog);
            } else if (type == "remote") {
                RemoteConfig cfg;
                cfg.name = name;
                cfg.style = style_from(j);
                cfg.endpoint = j.at("endpoint").get<std::string>();
                cfg.api_key_env = j.value("api_key_env", std::string());
                const std::string format = j.value("format", std::string("generic"));
                if (format != "generic" && format != "giphy")
                    throw Error(ErrorCode::invalid_argument, "unknown remote format '" + format + "'");
                cfg.format = format == "giphy" ? RemoteFormat::giphy : RemoteFormat::generic;
                cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", 5000));
                cfg.default_duration_s = j.value("default_duration_s", 3.0);
                registry.add_remote(std::move(cfg));
            } else {
                throw Error(ErrorCode::invalid_argument, "unknown provider type '" + type + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed provider config: ") + e.what());
    }
}

}  // namespace bscript
