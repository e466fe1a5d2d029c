#include "abspm/server.hpp"

#include <charconv>
#include <mutex>

#include <fmt/format.h>
#include <httplib.h>

#include "abspm/error.hpp"
#include "abspm/xes.hpp"

namespace abspm::pipeline {

namespace {

ApiResponse json_response(const Json& body, int status = 200) {
    return {status, body.dump(2) + "\n", "application/json"};
}

double ratio_param(const std::map<std::string, std::string>& query, const char* key, double fallback) {
    auto it = query.find(key);
    if (it == query.end() || it->second.empty()) return fallback;
    const auto& text = it->second;
    double v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw InvalidArgument(fmt::format("{} must be a number in [0, 1], got '{}'", key, text));
    }
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(fmt::format("{} must be in [0, 1], got {}", key, text));
    return v;
}

std::string param(const std::map<std::string, std::string>& query, const char* key, std::string_view fallback) {
    auto it = query.find(key);
    return it == query.end() || it->second.empty() ? std::string(fallback) : it->second;
}

Json parse_body(const std::string& body) {
    try {
        return Json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("request body is not valid JSON: {}", e.what()));
    }
}

Json verdict_or_null(const std::optional<assessment::Verdict>& v) {
    return v ? Json(assessment::verdict_token(*v)) : Json(nullptr);
}

Json counts_json(const std::map<assessment::Verdict, std::size_t>& counts) {
    Json j = Json::object();
    for (const auto& [v, n] : counts) j[std::string(assessment::verdict_token(v))] = n;
    return j;
}

}  // namespace

ApiResponse api_error_response(int status, std::string_view code, std::string_view message, const Json& detail) {
    Json j = {{"code", code}, {"message", message}};
    if (!detail.is_null()) j["detail"] = detail;
    return json_response(j, status);
}

ApiService::ApiService(Project project) : project_(std::move(project)) {
    base_log_ = eventlog::read_xes(project_.require("event_log_xes"));
    auto initial = modeling_log(project_);
    bool filtered = project_.has("filtered_log_xes");
    view_ = View{filtered ? "filtered" : "converted",
                 filtered ? project_.state().active_filter() : eventlog::FilterSpec{},
                 std::make_shared<const eventlog::EventLog>(std::move(initial))};
    if (project_.has("model_json")) observations_ = prepare_observations(project_);
    store_ = project_.load_judgments();
}

ApiResponse ApiService::handle(const ApiRequest& request) {
    struct Route {
        const char* path;
        const char* method;
    };
    static constexpr Route routes[] = {{"/api/stats", "GET"},        {"/api/dfg", "GET"},
                                       {"/api/filter", "POST"},      {"/api/observations", "GET"},
                                       {"/api/judgments", "POST"},   {"/api/report", "GET"}};
    try {
        const Route* match = nullptr;
        for (const auto& r : routes) {
            if (request.path == r.path) match = &r;
        }
        if (match == nullptr) {
            return api_error_response(404, api_error::not_found, fmt::format("no endpoint {}", request.path));
        }
        if (request.method != match->method) {
            return api_error_response(405, api_error::method_not_allowed,
                                      fmt::format("{} expects {}", request.path, match->method));
        }
        if (request.path == "/api/stats") return get_stats();
        if (request.path == "/api/dfg") return get_dfg(request.query);
        if (request.path == "/api/filter") return post_filter(request.body);
        if (request.path == "/api/observations") return get_observations();
        if (request.path == "/api/judgments") return post_judgments(request.body);
        return get_report();
    } catch (const ParseError& e) {
        return api_error_response(400, api_error::invalid_json, e.what());
    } catch (const InvalidArgument& e) {
        return api_error_response(400, api_error::invalid_spec, e.what());
    } catch (const PreconditionError& e) {
        return api_error_response(409, api_error::precondition_failed, e.what());
    } catch (const std::exception& e) {
        return api_error_response(500, api_error::internal_error, e.what());
    }
}

ApiResponse ApiService::get_stats() {
    std::shared_lock lock(mutex_);
    Json j;
    j["source"] = view_.source;
    j["filter"] = to_json(view_.spec);
    j["stats"] = to_json(eventlog::stats(*view_.log));
    j["unfiltered"] = to_json(eventlog::stats(base_log_));
    return json_response(j);
}

ApiResponse ApiService::get_dfg(const std::map<std::string, std::string>& query) {
    const auto& s = project_.state();
    discovery::AbstractionSpec spec = s.abstraction;
    spec.activity_ratio = ratio_param(query, "activities", spec.activity_ratio);
    spec.path_ratio = ratio_param(query, "paths", spec.path_ratio);
    spec.mode = discovery::parse_mode(param(query, "mode", discovery::mode_name(spec.mode)));
    spec.cutoff = ratio_param(query, "cutoff", spec.cutoff);
    auto primary = discovery::parse_indicator(param(query, "metric", discovery::indicator_name(s.primary)));
    auto secondary = discovery::parse_indicator(param(query, "secondary", discovery::indicator_name(s.secondary)));
    auto format = param(query, "format", "json");
    if (format != "json" && format != "dot") {
        throw InvalidArgument(fmt::format("format must be json or dot, got '{}'", format));
    }

    std::shared_ptr<const eventlog::EventLog> log;
    {
        std::shared_lock lock(mutex_);
        log = view_.log;
    }
    auto dfg = discover_model(*log, spec);
    if (format == "dot") return {200, discovery::export_dot(dfg, primary, secondary), "text/vnd.graphviz"};
    return {200, discovery::export_json(dfg), "application/json"};
}

ApiResponse ApiService::post_filter(const std::string& body) {
    auto j = parse_body(body);
    eventlog::FilterSpec spec;
    std::string source = "request";
    if (j.is_object() && j.contains("preset")) {
        if (j.size() != 1 || !j["preset"].is_string()) {
            throw InvalidArgument("a preset request holds only the preset name");
        }
        auto name = j["preset"].get<std::string>();
        auto it = project_.state().filter_presets.find(name);
        if (it == project_.state().filter_presets.end()) {
            throw InvalidArgument(fmt::format("unknown filter preset '{}'", name));
        }
        spec = it->second;
        source = "preset:" + name;
    } else {
        spec = filter_from_json(j);
    }
    auto filtered = std::make_shared<const eventlog::EventLog>(eventlog::apply_filters(base_log_, spec));
    auto dfg = discover_model(*filtered, project_.state().abstraction);

    Json out;
    out["filter"] = to_json(spec);
    out["stats"] = to_json(eventlog::stats(*filtered));
    out["model"] = Json::parse(discovery::export_json(dfg));
    {
        std::unique_lock lock(mutex_);
        view_ = View{source, spec, std::move(filtered)};
    }
    return json_response(out);
}

ApiResponse ApiService::get_observations() {
    if (!observations_) throw PreconditionError("no discovered model; run `abspm discover` first");
    auto population = project_.state().population();
    const auto& assessor = project_.state().assessment.assessor;
    auto obs_json = Json::parse(assessment::observations_to_json(*observations_));

    std::shared_lock lock(mutex_);
    auto report = assessment::summarize(*observations_, store_.current(), assessor);
    for (std::size_t i = 0; i < obs_json.size(); ++i) {
        obs_json[i]["verdicts"] = {{"Q1", verdict_or_null(report.rows[i].q1)},
                                   {"Q2", verdict_or_null(report.rows[i].q2)}};
    }
    Json out;
    out["population"] = population;
    out["assessor"] = assessor;
    if (!observations_->empty()) {
        auto q = assessment::render_questions(observations_->front(), population);
        out["questions"] = {{"Q1", q.q1}, {"Q2", q.q2}};
    } else {
        out["questions"] = Json::object();
    }
    out["observations"] = std::move(obs_json);
    return json_response(out);
}

ApiResponse ApiService::post_judgments(const std::string& body) {
    if (!observations_) throw PreconditionError("no discovered model; run `abspm discover` first");
    auto j = parse_body(body);
    if (!j.is_array()) j = Json::array({j});
    if (j.empty()) throw InvalidArgument("no judgments in request");

    std::vector<assessment::Judgment> judgments;
    for (auto& item : j) {
        if (!item.is_object()) throw InvalidArgument("each judgment must be a JSON object");
        if (!item.contains("assessor")) item["assessor"] = project_.state().assessment.assessor;
        if (!item.contains("recorded_at")) item["recorded_at"] = now_timestamp();
        judgments.push_back(assessment::judgment_from_json(item.dump()));
    }
    for (const auto& jd : judgments) {
        bool known = std::any_of(observations_->begin(), observations_->end(),
                                 [&](const auto& o) { return o.obs_id == jd.obs_id; });
        if (!known) {
            return api_error_response(404, api_error::unknown_observation,
                                      fmt::format("unknown observation id {}", jd.obs_id), {{"obs_id", jd.obs_id}});
        }
    }

    std::unique_lock lock(mutex_);
    auto staged = store_;
    for (const auto& jd : judgments) staged.record(jd, *observations_);
    project_.persist_judgments(staged, judgments);
    store_ = std::move(staged);
    return json_response({{"recorded", judgments.size()}, {"judgments", store_.size()}});
}

ApiResponse ApiService::get_report() {
    if (!observations_) throw PreconditionError("no discovered model; run `abspm discover` first");
    const auto& assessor = project_.state().assessment.assessor;
    std::shared_lock lock(mutex_);
    auto report = assessment::summarize(*observations_, store_.current(), assessor);
    lock.unlock();

    Json rows = Json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"obs_id", r.observation.obs_id},
                        {"label", r.observation.element.display()},
                        {"value_display", r.observation.value_display},
                        {"Q1", verdict_or_null(r.q1)},
                        {"Q2", verdict_or_null(r.q2)}});
    }
    Json out;
    out["assessor"] = assessor;
    out["rows"] = std::move(rows);
    out["q1_counts"] = counts_json(report.q1_counts);
    out["q2_counts"] = counts_json(report.q2_counts);
    out["discrepancies"] = report.discrepancies;
    out["pending"] = report.pending;
    out["markdown"] = report.to_markdown();
    out["csv"] = report.to_csv();
    return json_response(out);
}

// --- transport -----------------------------------------------------------------------

struct HttpServer::Impl {
    explicit Impl(ApiService& s) : service(s) {}
    ApiService& service;
    httplib::Server server;
};

HttpServer::HttpServer(ApiService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest r{req.method, req.path, {}, req.body};
        for (const auto& [k, v] : req.params) r.query[k] = v;
        auto out = impl_->service.handle(r);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    const char* pattern = R"(/api/.*)";
    impl_->server.Get(pattern, handler);
    impl_->server.Post(pattern, handler);
    impl_->server.Put(pattern, handler);
    impl_->server.Delete(pattern, handler);
    impl_->server.Patch(pattern, handler);
    if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
        impl_->server.set_mount_point("/", static_dir.string());
    }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw IoError(fmt::format("cannot bind {}", host));
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw IoError(fmt::format("cannot bind {}:{}", host, port));
    return port;
}

void HttpServer::run() {
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    impl_->server.stop();
}

}  // namespace abspm::pipeline
