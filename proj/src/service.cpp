#include "vcrisk/service.hpp"

#include <httplib.h>

#include "vcrisk/commands.hpp"
#include "vcrisk/error.hpp"

namespace vcrisk {

namespace {

using report::json;

HttpResponse respond(int status, const json& body) { return {status, report::dump(body)}; }

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
    return respond(status, report::error_body(code, message));
}

// Releases the in-flight slot however the handler exits.
struct SlotGuard {
    std::atomic<unsigned>& counter;
    ~SlotGuard() { counter.fetch_sub(1); }
};

}  // namespace

int http_status(Errc code) noexcept {
    return code == Errc::CalibrationInfeasible ? 422 : 400;
}

Service::Service(UniverseContext ctx, ServiceConfig config)
    : ctx_(std::move(ctx)), config_(std::move(config)) {}

template <typename F>
HttpResponse Service::guarded_run(F&& f) {
    if (in_flight_.fetch_add(1) >= config_.max_in_flight) {
        in_flight_.fetch_sub(1);
        return error_response(429, "TooManyRequests",
                              "simulation capacity reached; retry shortly");
    }
    SlotGuard guard{in_flight_};
    try {
        return f();
    } catch (const Error& e) {
        return error_response(http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception&) {
        // Nothing from a half-finished run goes back to the client.
        return error_response(500, "InternalError", "internal error while running the request");
    }
}

HttpResponse Service::simulate(std::string_view body) {
    return guarded_run([&] {
        const json doc = report::parse_document(body, "request body");
        return respond(200, commands::simulate(doc, ctx_, config_.defaults, options()));
    });
}

HttpResponse Service::compare(std::string_view body) {
    return guarded_run([&] {
        const json doc = report::parse_document(body, "request body");
        return respond(200, commands::compare(doc, ctx_, config_.defaults, options()));
    });
}

commands::Options Service::options() const {
    commands::Options o;
    o.threads = config_.threads;
    o.max_iterations = config_.max_iterations;
    return o;
}

HttpResponse Service::universe() const {
    json groups = json::array();
    for (const auto& g : ctx_.universe.groups()) {
        groups.push_back({{"label", g.label}, {"kind", to_string(g.kind)}});
    }
    const auto& s = ctx_.universe.sigma();
    json sigma = json::array();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < s.cols(); ++j) row.push_back(s(i, j));
        sigma.push_back(row);
    }
    return respond(200, {{"schema_version", report::kSchemaVersion},
                         {"manifest", report::to_json(report::make_manifest(
                                          "universe", ctx_, json::object(), config_.defaults, {}))},
                         {"groups", groups},
                         {"sigma", sigma}});
}

HttpResponse Service::defaults() const {
    json presets = json::object();
    for (const auto& name : preset_names()) {
        presets[name] = report::to_json(preset_composition(name));
    }
    return respond(200,
                   {{"schema_version", report::kSchemaVersion},
                    {"manifest", report::to_json(report::make_manifest(
                                     "defaults", ctx_, json::object(), config_.defaults, {}))},
                    {"settings", report::settings_to_json(config_.defaults)},
                    {"rules", report::to_json(config_.defaults.rules)},
                    {"healthcare_rules", report::to_json(AssignmentRules::healthcare_high_growth())},
                    {"presets", presets},
                    {"modes", {"uncorrelated", "single_factor_sector", "multi_factor"}},
                    {"max_iterations", config_.max_iterations}});
}

HttpResponse Service::health() const {
    return respond(200, {{"schema_version", report::kSchemaVersion},
                         {"status", "ok"},
                         {"engine_version", report::kEngineVersion},
                         {"manifest", report::to_json(report::make_manifest(
                                          "health", ctx_, json::object(), config_.defaults, {}))}});
}

HttpResponse Service::handle(std::string_view method, std::string_view path,
                             std::string_view body) {
    const auto allowed = [&](std::string_view want) { return method == want; };
    const auto wrong = [](std::string_view want) {
        return error_response(405, "MethodNotAllowed", "use " + std::string(want));
    };
    if (path == "/simulate") return allowed("POST") ? simulate(body) : wrong("POST");
    if (path == "/compare") return allowed("POST") ? compare(body) : wrong("POST");
    if (path == "/universe") return allowed("GET") ? universe() : wrong("GET");
    if (path == "/defaults") return allowed("GET") ? defaults() : wrong("GET");
    if (path == "/health") return allowed("GET") ? health() : wrong("GET");
    return error_response(404, "NotFound", "no endpoint " + std::string(path));
}

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(new Impl{service, {}}) {
    const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const HttpResponse r = impl_->service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    for (const char* path : {"/simulate", "/compare", "/universe", "/defaults", "/health"}) {
        impl_->server.Get(path, forward);
        impl_->server.Post(path, forward);
    }
    impl_->server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.status == 404) {
            res.set_content(report::dump(report::error_body("NotFound", "no endpoint " + req.path)),
                            "application/json");
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace vcrisk
