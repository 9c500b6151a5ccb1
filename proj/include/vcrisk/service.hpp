#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "vcrisk/commands.hpp"
#include "vcrisk/error.hpp"
#include "vcrisk/report.hpp"
#include "vcrisk/scenario.hpp"

namespace vcrisk {

struct ServiceConfig {
    std::uint64_t max_iterations = 10'000'000;  // larger requests are rejected
    unsigned max_in_flight = 4;                 // simulate/compare beyond this get 429
    unsigned threads = 0;                       // per simulation; 0 = hardware
    RunSettings defaults;                       // applied to absent request keys
};

struct HttpResponse {
    int status = 200;
    std::string body;  // JSON
};

// Request handling without sockets. Σ and the config are fixed at
// construction and only read afterwards, so handle() is safe to call from
// several threads at once.
class Service {
public:
    Service(UniverseContext ctx, ServiceConfig config);

    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

    HttpResponse simulate(std::string_view body);
    HttpResponse compare(std::string_view body);
    HttpResponse universe() const;
    HttpResponse defaults() const;
    HttpResponse health() const;

    const UniverseContext& context() const noexcept { return ctx_; }
    const ServiceConfig& config() const noexcept { return config_; }

private:
    template <typename F>
    HttpResponse guarded_run(F&& f);
    commands::Options options() const;

    UniverseContext ctx_;
    ServiceConfig config_;
    std::atomic<unsigned> in_flight_{0};
};

/// Maps a library error code to its HTTP status (422 for an infeasible
/// calibration, 400 otherwise).
int http_status(Errc code) noexcept;

// Thin cpp-httplib binding around Service.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace vcrisk
