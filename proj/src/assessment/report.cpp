#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "abspm/assessment.hpp"
#include "abspm/csv.hpp"

namespace abspm::assessment {

namespace {

constexpr Verdict kVerdicts[] = {Verdict::plausible, Verdict::not_plausible, Verdict::further_investigation};

std::string cell(const std::optional<Verdict>& v) {
    return v ? std::string(verdict_label(*v)) : std::string("pending");
}

std::string md_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '|') out += "\\|";
        else out.push_back(c);
    }
    return out;
}

}  // namespace

AssessmentReport summarize(std::span<const Observation> observations, std::span<const Judgment> judgments,
                           std::string_view assessor) {
    AssessmentReport report;
    report.assessor = std::string(assessor);
    for (Verdict v : kVerdicts) {
        report.q1_counts[v] = 0;
        report.q2_counts[v] = 0;
    }
    std::map<std::pair<int, Question>, Verdict> latest;
    for (const auto& j : judgments) {
        if (j.assessor == assessor) latest[{j.obs_id, j.question}] = j.verdict;
    }
    for (const auto& o : observations) {
        ReportRow row{o, std::nullopt, std::nullopt};
        if (auto it = latest.find({o.obs_id, Question::q1}); it != latest.end()) row.q1 = it->second;
        if (auto it = latest.find({o.obs_id, Question::q2}); it != latest.end()) row.q2 = it->second;
        if (row.q1) ++report.q1_counts[*row.q1];
        if (row.q2) ++report.q2_counts[*row.q2];
        if (row.q1 && row.q2 && *row.q1 != *row.q2) report.discrepancies.push_back(o.obs_id);
        if (!row.q1 || !row.q2) report.pending.push_back(o.obs_id);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::size_t AssessmentReport::judged(Question q) const {
    const auto& counts = q == Question::q1 ? q1_counts : q2_counts;
    std::size_t n = 0;
    for (const auto& [v, c] : counts) n += c;
    return n;
}

std::optional<Verdict> AssessmentReport::most_frequent(Question q) const {
    const auto& counts = q == Question::q1 ? q1_counts : q2_counts;
    std::optional<Verdict> best;
    std::size_t best_count = 0;
    bool tie = false;
    for (const auto& [v, c] : counts) {
        if (c > best_count) {
            best = v;
            best_count = c;
            tie = false;
        } else if (c == best_count && c > 0) {
            tie = true;
        }
    }
    if (tie || best_count == 0) return std::nullopt;
    return best;
}

std::string AssessmentReport::to_markdown() const {
    std::string out;
    out += fmt::format("# Face-validity assessment\n\nAssessor: {}\n\n", assessor);
    if (rows.empty()) {
        out += "_No observations were generated; the report has zero rows._\n";
    } else {
        out += "| No. | Activity/path | Observation | Question 1 | Question 2 |\n";
        out += "|---|---|---|---|---|\n";
        for (const auto& r : rows) {
            out += fmt::format("| {} | {} | {} | {} | {} |\n", r.observation.obs_id,
                               md_escape(r.observation.element.display()), md_escape(r.observation.value_display),
                               cell(r.q1), cell(r.q2));
        }
    }

    out += "\n## Verdict counts\n\n";
    out += "| Verdict | Question 1 | Question 2 |\n|---|---|---|\n";
    for (Verdict v : kVerdicts) {
        out += fmt::format("| {} | {} | {} |\n", verdict_label(v), q1_counts.at(v), q2_counts.at(v));
    }
    out += fmt::format("| judged | {} | {} |\n", judged(Question::q1), judged(Question::q2));

    out += "\n## Summary\n\n";
    for (Question q : {Question::q1, Question::q2}) {
        auto top = most_frequent(q);
        out += fmt::format("- Most frequent verdict for {}: {}\n", question_token(q),
                           top ? fmt::format("{} ({} of {})", verdict_label(*top),
                                             (q == Question::q1 ? q1_counts : q2_counts).at(*top), judged(q))
                               : std::string("none (tied or unjudged)"));
    }
    out += fmt::format("- Observations with differing Q1/Q2 verdicts: {}\n",
                       discrepancies.empty() ? std::string("none") : fmt::format("{}", fmt::join(discrepancies, ", ")));
    out += fmt::format("- Pending observations: {}\n",
                       pending.empty() ? std::string("none") : fmt::format("{}", fmt::join(pending, ", ")));
    return out;
}

std::string AssessmentReport::to_csv() const {
    std::string out = "No.,Activity/path,Observation,Question 1,Question 2\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{}\n", r.observation.obs_id, csv::quote_if_needed(r.observation.element.display()),
                           csv::quote_if_needed(r.observation.value_display), cell(r.q1), cell(r.q2));
    }
    return out;
}

}  // namespace abspm::assessment
