#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "abspm/assessment.hpp"
#include "abspm/error.hpp"

namespace abspm::assessment {

using discovery::Dfg;

std::string Element::display() const {
    return kind == ElementKind::activity ? source : source + " -> " + target;
}

std::string display_value(Indicator indicator, double value, std::size_t total_cases) {
    const auto count = static_cast<long long>(std::llround(value));
    switch (indicator) {
        case Indicator::case_frequency: {
            long pct = total_cases == 0 ? 0 : std::lround(value / static_cast<double>(total_cases) * 100.0);
            return fmt::format("CF={} ({}%)", count, pct);
        }
        case Indicator::max_repetitions: return fmt::format("MNR={}", count);
        case Indicator::absolute_frequency: return fmt::format("AF={}", count);
        case Indicator::case_coverage: return fmt::format("CC={}%", std::lround(value * 100.0));
        case Indicator::min_duration: return "MinD=" + discovery::format_indicator_value(indicator, value);
        case Indicator::max_duration: return "MaxD=" + discovery::format_indicator_value(indicator, value);
        case Indicator::mean_duration: return "MeanD=" + discovery::format_indicator_value(indicator, value);
        case Indicator::median_duration: return "MedD=" + discovery::format_indicator_value(indicator, value);
        case Indicator::total_duration: return "TotD=" + discovery::format_indicator_value(indicator, value);
    }
    return {};
}

std::vector<ObservationRequest> default_requests() {
    return {
        {ElementKind::activity, Indicator::case_frequency, 3},
        {ElementKind::activity, Indicator::max_repetitions, 3},
        {ElementKind::path, Indicator::case_frequency, 3},
        {ElementKind::path, Indicator::max_repetitions, 3},
    };
}

std::vector<Observation> generate_observations(const Dfg& dfg, std::span<const ObservationRequest> requests) {
    for (const auto& r : requests) {
        if (r.kind == ElementKind::activity && discovery::is_duration(r.indicator)) {
            throw InvalidArgument(fmt::format("indicator {} is not defined for activities",
                                              discovery::indicator_name(r.indicator)));
        }
    }

    std::vector<Observation> out;
    std::set<std::pair<Element, Indicator>> seen;
    for (const auto& r : requests) {
        std::vector<std::pair<Element, double>> candidates;
        if (r.kind == ElementKind::activity) {
            for (const auto& [activity, m] : dfg.nodes) {
                candidates.emplace_back(Element::activity(activity), *discovery::node_value(dfg, m, r.indicator));
            }
        } else {
            for (const auto& [key, m] : dfg.edges) {
                candidates.emplace_back(Element::path(key.first, key.second), discovery::edge_value(dfg, m, r.indicator));
            }
        }
        // candidates arrive in label order; a stable sort keeps it for ties
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        std::size_t taken = 0;
        for (const auto& [element, value] : candidates) {
            if (taken == r.top_k) break;
            ++taken;
            if (!seen.insert({element, r.indicator}).second) continue;
            Observation o;
            o.obs_id = static_cast<int>(out.size()) + 1;
            o.element = element;
            o.indicator = r.indicator;
            o.value = value;
            o.value_display = display_value(r.indicator, value, dfg.total_cases);
            out.push_back(std::move(o));
        }
    }
    return out;
}

// --- questions and verdicts ----------------------------------------------------

std::string_view question_token(Question q) {
    return q == Question::q1 ? "Q1" : "Q2";
}

Question parse_question(std::string_view text) {
    if (text == "Q1" || text == "q1" || text == "1") return Question::q1;
    if (text == "Q2" || text == "q2" || text == "2") return Question::q2;
    throw InvalidArgument(fmt::format("unknown question '{}'; expected Q1 or Q2", text));
}

std::string_view verdict_token(Verdict v) {
    switch (v) {
        case Verdict::plausible: return "plausible";
        case Verdict::not_plausible: return "not_plausible";
        case Verdict::further_investigation: return "further_investigation";
    }
    return {};
}

std::string_view verdict_label(Verdict v) {
    switch (v) {
        case Verdict::plausible: return "plausible";
        case Verdict::not_plausible: return "not plausible";
        case Verdict::further_investigation: return "further investigation";
    }
    return {};
}

Verdict parse_verdict(std::string_view text) {
    std::string t;
    for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
    if (t == "p" || t == "plausible") return Verdict::plausible;
    if (t == "n" || t == "not_plausible" || t == "not plausible") return Verdict::not_plausible;
    if (t == "f" || t == "further_investigation" || t == "further investigation") {
        return Verdict::further_investigation;
    }
    throw InvalidArgument(fmt::format(
        "unknown verdict '{}'; expected plausible, not_plausible or further_investigation", text));
}

QuestionTexts render_questions(const Observation&, std::size_t population) {
    if (population == 0) throw InvalidArgument("population must be positive");
    QuestionTexts q;
    q.q1 = "Does the obtained performance indicator value accurately reflect the real-world system being modeled?";
    q.q2 = fmt::format(
        "Given an overall population size of {} {}, can the obtained performance indicator value be considered a "
        "plausible representation?",
        population, population == 1 ? "agent" : "agents");
    return q;
}

// --- json ----------------------------------------------------------------------

namespace {
using ojson = nlohmann::ordered_json;
}

std::string observations_to_json(std::span<const Observation> observations) {
    ojson arr = ojson::array();
    for (const auto& o : observations) {
        ojson j;
        j["obs_id"] = o.obs_id;
        j["element"] = o.element.kind == ElementKind::activity ? "activity" : "path";
        j["source"] = o.element.source;
        if (o.element.kind == ElementKind::path) j["target"] = o.element.target;
        j["label"] = o.element.display();
        j["indicator"] = discovery::indicator_name(o.indicator);
        j["value"] = o.value;
        j["value_display"] = o.value_display;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<Observation> observations_from_json(std::string_view text) {
    std::vector<Observation> out;
    try {
        for (const auto& j : ojson::parse(text)) {
            Observation o;
            o.obs_id = j.at("obs_id").get<int>();
            auto kind = j.at("element").get<std::string>();
            if (kind == "activity") {
                o.element = Element::activity(j.at("source").get<std::string>());
            } else if (kind == "path") {
                o.element = Element::path(j.at("source").get<std::string>(), j.at("target").get<std::string>());
            } else {
                throw ParseError(fmt::format("observations json: unknown element kind '{}'", kind));
            }
            o.indicator = discovery::parse_indicator(j.at("indicator").get<std::string>());
            o.value = j.at("value").get<double>();
            o.value_display = j.at("value_display").get<std::string>();
            out.push_back(std::move(o));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("observations json: {}", e.what()));
    }
    return out;
}

}  // namespace abspm::assessment
