#include "bscript/service.hpp"

#include "httplib.h"
#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {

void send_error(httplib::Response& res, ErrorCode code, const std::string& message)
{
    res.status = http_status(code);
    res.set_content(json{{"error", {{"code", std::string(to_string(code))}, {"message", message}}}}.dump(),
                    "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req)
{
    try {
        return req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("request body is not JSON: ") + e.what());
    }
}

std::uint64_t expected_revision(const httplib::Request& req, const json& body)
{
    if (body.contains("expected_revision"))
        return body.at("expected_revision").get<std::uint64_t>();
    if (req.has_param("expected_revision")) {
        try {
            return std::stoull(req.get_param_value("expected_revision"));
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_argument, "expected_revision must be an integer");
        }
    }
    throw Error(ErrorCode::invalid_argument, "expected_revision is required");
}

json project_view(const Project& p)
{
    json j = json::parse(project_to_json(p));
    j.erase("format");
    j.erase("version");
    return j;
}

json plan_json(const PlaybackPlan& plan)
{
    json visual = json::array();
    for (const VisualSegment& s : plan.visual) {
        visual.push_back({{"source", s.asset_id ? *s.asset_id : std::string("a-roll")},
                          {"source_in_s", s.source_in_s},
                          {"source_out_s", s.source_out_s},
                          {"timeline_in_s", s.timeline_in_s},
                          {"timeline_out_s", s.timeline_out_s}});
    }
    return {{"visual", std::move(visual)}, {"audio", {{"in_s", plan.audio_in_s}, {"out_s", plan.audio_out_s}}}};
}

/// Wraps a handler so library errors become JSON error responses.
template <typename F>
httplib::Server::Handler guarded(F f)
{
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_error(res, e.code(), e.what());
        } catch (const json::exception& e) {
            send_error(res, ErrorCode::invalid_document, e.what());
        } catch (const std::exception& e) {
            send_error(res, ErrorCode::io_error, e.what());
        }
    };
}

}  // namespace

struct HttpServer::Impl {
    ProjectService& service;
    httplib::Server server;
};

HttpServer::HttpServer(ProjectService& service) : impl_(new Impl{service, {}})
{
    auto& svr = impl_->server;
    ProjectService& svc = service;

    svr.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, {{"status", "ok"}}); });

    svr.Post("/projects", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const json body = parse_body(req);
                 if (!body.contains("transcript"))
                     throw Error(ErrorCode::invalid_document, "body needs a transcript");
                 const json video = body.value("video", json::object());
                 const Project p = svc.create_project(body.at("transcript").dump(),
                                                      video.value("media_url", std::string()),
                                                      video.value("duration_s", 0.0));
                 send_json(res, project_view(p), 201);
             }));

    svr.Get(R"(/projects/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                send_json(res, project_view(svc.get_project(req.matches[1].str())));
            }));

    svr.Get(R"(/projects/([^/]+)/recommendations)",
            guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const std::string name = req.get_param_value("source");
                const auto source = parse_source(name);
                if (!source)
                    throw Error(ErrorCode::invalid_argument, "source must be algorithmic, expert or interval");
                const auto recs = svc.recommendations(req.matches[1].str(), *source);
                json list = json::parse(recommendations_to_json(recs));
                for (std::size_t i = 0; i < list.size(); ++i)
                    list[i]["id"] = name + "-" + std::to_string(i + 1);
                send_json(res, {{"source", name}, {"recommendations", std::move(list)}});
            }));

    svr.Get(R"(/projects/([^/]+)/search)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                SearchRequest sr;
                sr.query = req.get_param_value("q");
                const auto style = parse_style_filter(req.get_param_value("style"));
                if (!style)
                    throw Error(ErrorCode::invalid_argument, "style must be social_media, professional or both");
                sr.style = *style;
                if (req.has_param("limit")) {
                    try {
                        sr.limit = std::stoul(req.get_param_value("limit"));
                    } catch (const std::exception&) {
                        throw Error(ErrorCode::invalid_argument, "limit must be a positive integer");
                    }
                }
                json body = json::parse(search_result_to_json(svc.search(req.matches[1].str(), sr)));
                body["query"] = sr.query;
                send_json(res, body);
            }));

    svr.Post(R"(/projects/([^/]+)/insertions)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const json body = parse_body(req);
                 InsertOp op;
                 op.asset = asset_from_json(body.at("asset").dump());
                 if (body.contains("at_s"))
                     op.at_s = body.at("at_s").get<double>();
                 if (body.contains("word_index"))
                     op.word_index = body.at("word_index").get<std::size_t>();
                 op.origin = InsertionOrigin::parse(body.value("origin", std::string("manual")));
                 const MutationResult r = svc.mutate(req.matches[1].str(), op, expected_revision(req, body));
                 send_json(res, {{"insertion_id", *r.insertion_id}, {"revision", r.revision}}, 201);
             }));

    svr.Patch(R"(/projects/([^/]+)/insertions/([^/]+))",
              guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  const bool has_start = body.contains("start_s");
                  if (has_start == body.contains("duration_s"))
                      throw Error(ErrorCode::invalid_argument, "patch exactly one of start_s and duration_s");
                  const std::string iid = req.matches[2].str();
                  const EditOp op = has_start ? EditOp(MoveOp{iid, body.at("start_s").get<double>()})
                                              : EditOp(ResizeOp{iid, body.at("duration_s").get<double>()});
                  const MutationResult r = svc.mutate(req.matches[1].str(), op, expected_revision(req, body));
                  send_json(res, {{"revision", r.revision}});
              }));

    svr.Delete(R"(/projects/([^/]+)/insertions/([^/]+))",
               guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                   const json body = parse_body(req);
                   const MutationResult r = svc.mutate(req.matches[1].str(), RemoveOp{req.matches[2].str()},
                                                       expected_revision(req, body));
                   send_json(res, {{"revision", r.revision}});
               }));

    svr.Get(R"(/projects/([^/]+)/export)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const std::string format =
                    req.has_param("format") ? req.get_param_value("format") : std::string("edl-json");
                const std::string doc = svc.export_session(req.matches[1].str(), format);
                res.status = 200;
                res.set_content(doc, format == "csv" ? "text/csv" : "application/json");
            }));

    svr.Get(R"(/projects/([^/]+)/playback)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                send_json(res, plan_json(svc.playback(req.matches[1].str())));
            }));
}

HttpServer::~HttpServer()
{
    stop();
}

int HttpServer::bind(const std::string& host, int port)
{
    if (port == 0)
        return impl_->server.bind_to_any_port(host);
    if (!impl_->server.bind_to_port(host, port))
        throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::serve()
{
    impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
    if (impl_)
        impl_->server.stop();
}

bool HttpServer::running() const
{
    return impl_->server.is_running();
}

}  // namespace bscript
