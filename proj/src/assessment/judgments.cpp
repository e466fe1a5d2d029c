#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "abspm/assessment.hpp"
#include "abspm/csv.hpp"
#include "abspm/error.hpp"

namespace abspm::assessment {

namespace {
using ojson = nlohmann::ordered_json;

ojson to_ojson(const Judgment& j) {
    ojson o;
    o["obs_id"] = j.obs_id;
    o["question"] = question_token(j.question);
    o["verdict"] = verdict_token(j.verdict);
    o["note"] = j.note;
    o["assessor"] = j.assessor;
    o["recorded_at"] = j.recorded_at;
    return o;
}
}  // namespace

std::string judgment_to_json(const Judgment& judgment) {
    return to_ojson(judgment).dump();
}

Judgment judgment_from_json(std::string_view text) {
    try {
        auto o = ojson::parse(text);
        Judgment j;
        j.obs_id = o.at("obs_id").get<int>();
        j.question = parse_question(o.at("question").get<std::string>());
        j.verdict = parse_verdict(o.at("verdict").get<std::string>());
        j.note = o.value("note", "");
        j.assessor = o.value("assessor", "expert");
        j.recorded_at = o.value("recorded_at", "");
        if (j.assessor.empty()) throw InvalidArgument("judgment assessor must not be empty");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("judgment json: {}", e.what()));
    }
}

void JudgmentStore::apply(const Judgment& judgment) {
    current_[{judgment.obs_id, judgment.question, judgment.assessor}] = judgment;
    audit_.push_back(judgment);
}

void JudgmentStore::record(const Judgment& judgment, std::span<const Observation> observations) {
    bool known = std::any_of(observations.begin(), observations.end(),
                             [&](const Observation& o) { return o.obs_id == judgment.obs_id; });
    if (!known) throw InvalidArgument(fmt::format("unknown observation id {}", judgment.obs_id));
    if (judgment.assessor.empty()) throw InvalidArgument("judgment assessor must not be empty");
    apply(judgment);
}

std::vector<Judgment> JudgmentStore::current() const {
    std::vector<Judgment> out;
    out.reserve(current_.size());
    for (const auto& [key, j] : current_) out.push_back(j);
    return out;
}

std::string JudgmentStore::audit_ndjson() const {
    std::string out;
    for (const auto& j : audit_) {
        out += judgment_to_json(j);
        out.push_back('\n');
    }
    return out;
}

std::string JudgmentStore::current_json() const {
    ojson arr = ojson::array();
    for (const auto& [key, j] : current_) arr.push_back(to_ojson(j));
    return arr.dump(2) + "\n";
}

JudgmentStore JudgmentStore::from_audit(std::string_view ndjson) {
    JudgmentStore store;
    std::istringstream in{std::string(ndjson)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            store.apply(judgment_from_json(line));
        } catch (const Error& e) {
            throw ParseError(fmt::format("judgment audit line {}: {}", line_no, e.what()));
        }
    }
    return store;
}

std::vector<Judgment> parse_verdict_csv(std::string_view text, std::string_view assessor,
                                        std::string_view recorded_at) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t row = 0;
    std::vector<Judgment> out;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            auto h = csv::split_row(line);
            if (h.size() < 3 || h[0] != "obs_id" || h[1] != "q1" || h[2] != "q2") {
                throw ParseError("verdict csv: header must start with obs_id,q1,q2");
            }
            header_seen = true;
            continue;
        }
        ++row;
        if (line.empty()) continue;
        auto f = csv::split_row(line);
        if (f.size() < 3 || f.size() > 4) {
            throw ParseError(fmt::format("verdict csv row {}: expected 3 or 4 fields, found {}", row, f.size()));
        }
        int obs_id = 0;
        try {
            std::size_t used = 0;
            obs_id = std::stoi(f[0], &used);
            if (used != f[0].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(fmt::format("verdict csv row {}: obs_id '{}' is not an integer", row, f[0]));
        }
        for (auto [column, question] : {std::pair{1, Question::q1}, std::pair{2, Question::q2}}) {
            const std::string& cell = f[static_cast<std::size_t>(column)];
            if (cell.empty()) continue;
            Judgment j;
            j.obs_id = obs_id;
            j.question = question;
            try {
                j.verdict = parse_verdict(cell);
            } catch (const InvalidArgument& e) {
                throw ParseError(fmt::format("verdict csv row {}: {}", row, e.what()));
            }
            j.note = f.size() == 4 ? f[3] : std::string{};
            j.assessor = std::string(assessor);
            j.recorded_at = std::string(recorded_at);
            out.push_back(std::move(j));
        }
    }
    if (!header_seen) throw ParseError("verdict csv: missing header");
    return out;
}

std::vector<Judgment> run_interactive(std::span<const Observation> observations, std::size_t population,
                                      std::string_view assessor, std::string_view recorded_at, std::istream& in,
                                      std::ostream& out) {
    std::vector<Judgment> judgments;
    if (observations.empty()) {
        out << "No observations to assess.\n";
        return judgments;
    }
    out << "Verdicts: [p]lausible, [n]ot plausible, [f]urther investigation, [s]kip\n";
    for (const auto& o : observations) {
        auto texts = render_questions(o, population);
        out << fmt::format("\nObservation {}: {}  {}\n", o.obs_id, o.element.display(), o.value_display);
        for (auto [question, text] : {std::pair{Question::q1, &texts.q1}, std::pair{Question::q2, &texts.q2}}) {
            for (;;) {
                out << fmt::format("{}: {}\n> ", question_token(question), *text);
                std::string answer;
                if (!std::getline(in, answer)) {
                    out << "\n";
                    return judgments;
                }
                if (answer == "s" || answer == "S" || answer == "skip") break;
                try {
                    Judgment j;
                    j.obs_id = o.obs_id;
                    j.question = question;
                    j.verdict = parse_verdict(answer);
                    j.assessor = std::string(assessor);
                    j.recorded_at = std::string(recorded_at);
                    judgments.push_back(std::move(j));
                    break;
                } catch (const InvalidArgument& e) {
                    out << e.what() << "\n";
                }
            }
        }
    }
    return judgments;
}

}  // namespace abspm::assessment
