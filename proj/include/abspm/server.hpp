#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "abspm/pipeline.hpp"

namespace abspm::pipeline {

/// Closed set of ApiError codes.
namespace api_error {
inline constexpr std::string_view invalid_json = "invalid_json";              // 400
inline constexpr std::string_view invalid_spec = "invalid_spec";              // 400
inline constexpr std::string_view unknown_observation = "unknown_observation";  // 404
inline constexpr std::string_view not_found = "not_found";                    // 404
inline constexpr std::string_view method_not_allowed = "method_not_allowed";  // 405
inline constexpr std::string_view precondition_failed = "precondition_failed";  // 409
inline constexpr std::string_view internal_error = "internal_error";          // 500
}  // namespace api_error

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// JSON endpoints over an opened project. Logs and observations are loaded
/// once; the filter view and the judgment store are the mutable parts.
class ApiService {
public:
    /// Throws PreconditionError when the project has no converted log.
    explicit ApiService(Project project);

    ApiResponse handle(const ApiRequest& request);

private:
    ApiResponse get_stats();
    ApiResponse get_dfg(const std::map<std::string, std::string>& query);
    ApiResponse post_filter(const std::string& body);
    ApiResponse get_observations();
    ApiResponse post_judgments(const std::string& body);
    ApiResponse get_report();

    struct View {
        std::string source;  // "converted", "filtered" or "request"
        eventlog::FilterSpec spec;
        std::shared_ptr<const eventlog::EventLog> log;
    };

    Project project_;
    eventlog::EventLog base_log_;
    std::optional<std::vector<assessment::Observation>> observations_;

    std::shared_mutex mutex_;  // guards view_ and store_
    View view_;
    assessment::JudgmentStore store_;
};

ApiResponse api_error_response(int status, std::string_view code, std::string_view message,
                               const Json& detail = nullptr);

/// httplib transport for ApiService, plus static UI assets.
class HttpServer {
public:
    HttpServer(ApiService& service, std::filesystem::path static_dir);
    ~HttpServer();

    /// Binds and returns the actual port (port 0 picks a free one).
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace abspm::pipeline
