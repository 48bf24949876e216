#pragma once

#include <cstdint>
#include <optional>
#include <string>

// Eigen must be seen before httplib: <resolv.h> defines a `_res` macro that
// clashes with Eigen parameter names.
#include "safetune/session.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace safetune {

// JSON-over-HTTP front end of a SessionService.
//
//   POST /sessions                       body: campaign config, or {"config": ..., "id": ...}
//   GET  /sessions                       ids of stored sessions
//   GET  /sessions/{id}/queries          unresolved queries with rollout payloads
//   POST /sessions/{id}/feedback         {"query_id", "verdict", "rater"?, "version"?}
//   GET  /sessions/{id}/rollouts/{rid}   one rollout payload
//   GET  /sessions/{id}/report           progress and believed best action
//
// Errors come back as {"error": code, "message": text} with a 4xx/5xx status.
class ApiServer {
public:
    explicit ApiServer(SessionService& service) : service_(service) { routes(); }

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port)
    {
        if (port == 0) return server_.bind_to_any_port(host);
        return server_.bind_to_port(host, port) ? port : -1;
    }

    // Blocks until stop() is called.
    bool listen() { return server_.listen_after_bind(); }

    void wait_until_ready() const { server_.wait_until_ready(); }

    void stop() { server_.stop(); }

private:
    static void send_json(httplib::Response& res, int status, const json& body)
    {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void send_error(httplib::Response& res, ServiceErrorKind kind, const std::string& msg)
    {
        send_json(res, http_status(kind), {{"error", error_code(kind)}, {"message", msg}});
    }

    template <class Fn>
    static void guarded(httplib::Response& res, Fn&& fn)
    {
        try {
            fn();
        } catch (const ServiceError& e) {
            send_error(res, e.kind, e.what());
        } catch (const json::exception& e) {
            send_error(res, ServiceErrorKind::invalid, e.what());
        } catch (const std::exception& e) {
            send_error(res, ServiceErrorKind::internal, e.what());
        }
    }

    static json parse_body(const httplib::Request& req)
    {
        try {
            return json::parse(req.body);
        } catch (const json::parse_error& e) {
            throw ServiceError(ServiceErrorKind::invalid, std::string("body is not valid JSON: ") + e.what());
        }
    }

    static FeedbackSubmission parse_submission(const json& j)
    {
        if (!j.is_object()) throw ServiceError(ServiceErrorKind::invalid, "feedback must be a JSON object");
        FeedbackSubmission f;
        auto str = [&](const char* key, bool required) -> std::optional<std::string> {
            auto it = j.find(key);
            if (it == j.end()) {
                if (required) throw ServiceError(ServiceErrorKind::invalid, std::string(key) + ": missing required field");
                return std::nullopt;
            }
            if (!it->is_string()) throw ServiceError(ServiceErrorKind::invalid, std::string(key) + ": expected a string");
            return it->get<std::string>();
        };
        f.query_id = *str("query_id", true);
        f.verdict = *str("verdict", true);
        if (auto r = str("rater", false)) f.rater = *r;
        if (auto it = j.find("version"); it != j.end() && !it->is_null()) {
            if (!it->is_number_unsigned()) {
                throw ServiceError(ServiceErrorKind::invalid, "version: expected a non-negative integer");
            }
            f.expected_version = it->get<std::uint64_t>();
        }
        return f;
    }

    void routes()
    {
        server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                     {"Access-Control-Allow-Headers", "Content-Type"},
                                     {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        server_.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server_.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = parse_body(req);
                std::optional<std::string> id;
                json config = body;
                if (body.is_object() && body.contains("config")) {
                    config = body.at("config");
                    if (body.contains("id")) {
                        if (!body.at("id").is_string()) throw ServiceError(ServiceErrorKind::invalid, "id: expected a string");
                        id = body.at("id").get<std::string>();
                    }
                }
                auto s = service_.create(config, id);
                send_json(res, 201, {{"id", s->id()}, {"version", s->version()}});
            });
        });

        server_.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, {{"sessions", service_.list()}}); });
        });

        server_.Get(R"(/sessions/([A-Za-z0-9_-]+)/queries)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, service_.get(req.matches[1])->queries()); });
        });

        server_.Post(R"(/sessions/([A-Za-z0-9_-]+)/feedback)",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         guarded(res, [&] {
                             auto s = service_.get(req.matches[1]);
                             const SubmitResult r = s->submit(parse_submission(parse_body(req)));
                             send_json(res, 200,
                                       {{"accepted", true},
                                        {"version", r.version},
                                        {"advanced", r.advanced},
                                        {"iteration", r.iteration},
                                        {"finished", r.finished}});
                         });
                     });

        server_.Get(R"(/sessions/([A-Za-z0-9_-]+)/rollouts/([A-Za-z0-9_-]+))",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] { send_json(res, 200, service_.get(req.matches[1])->rollout(req.matches[2])); });
                    });

        server_.Get(R"(/sessions/([A-Za-z0-9_-]+)/report)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, service_.get(req.matches[1])->report()); });
        });
    }

    SessionService& service_;
    httplib::Server server_;
};

}  // namespace safetune
