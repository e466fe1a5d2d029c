#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "abspm/dfg.hpp"

namespace abspm::assessment {

using discovery::Indicator;

enum class ElementKind { activity, path };

struct Element {
    ElementKind kind = ElementKind::activity;
    std::string source;  // the activity itself for activity elements
    std::string target;  // empty for activity elements

    static Element activity(std::string name) { return {ElementKind::activity, std::move(name), {}}; }
    static Element path(std::string from, std::string to) { return {ElementKind::path, std::move(from), std::move(to)}; }

    /// "move_location" or "move_location -> change_happy_5_3".
    std::string display() const;

    friend bool operator==(const Element&, const Element&) = default;
    friend auto operator<=>(const Element&, const Element&) = default;
};

struct Observation {
    int obs_id = 0;
    Element element;
    Indicator indicator = Indicator::case_frequency;
    double value = 0.0;
    std::string value_display;  // e.g. "CF=12 (100%)"

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// "CF=12 (100%)", "MNR=22", "AF=40", "CC=42%", "MaxD=3 d", ...
std::string display_value(Indicator indicator, double value, std::size_t total_cases);

struct ObservationRequest {
    ElementKind kind = ElementKind::activity;
    Indicator indicator = Indicator::case_frequency;
    std::size_t top_k = 3;

    friend bool operator==(const ObservationRequest&, const ObservationRequest&) = default;
};

/// Case frequency and repetitions for activities and paths, top 3 each.
std::vector<ObservationRequest> default_requests();

/// Top-k elements per request by value (descending, ties by label),
/// deduplicated on (element, indicator) and numbered from 1 in request order.
/// Throws InvalidArgument for duration indicators on activities.
std::vector<Observation> generate_observations(const discovery::Dfg& dfg, std::span<const ObservationRequest> requests);

// --- questions and verdicts ----------------------------------------------------

enum class Question { q1, q2 };
enum class Verdict { plausible, not_plausible, further_investigation };

std::string_view question_token(Question q);  // "Q1"
Question parse_question(std::string_view text);

std::string_view verdict_token(Verdict v);  // "not_plausible"
std::string_view verdict_label(Verdict v);  // "not plausible"

/// Accepts tokens, labels and the single letters p / n / f, case-insensitive.
Verdict parse_verdict(std::string_view text);

struct QuestionTexts {
    std::string q1;
    std::string q2;
};

/// Q1 is fixed; Q2 substitutes the pre-filter population size.
QuestionTexts render_questions(const Observation& observation, std::size_t population);

// --- judgments -----------------------------------------------------------------

struct Judgment {
    int obs_id = 0;
    Question question = Question::q1;
    Verdict verdict = Verdict::plausible;
    std::string note;
    std::string assessor = "expert";
    std::string recorded_at;

    friend bool operator==(const Judgment&, const Judgment&) = default;
};

/// Current verdicts keyed by (obs_id, question, assessor) plus the full
/// append-only history. Not synchronized; callers serialize writes.
class JudgmentStore {
public:
    using Key = std::tuple<int, Question, std::string>;

    /// Throws InvalidArgument when obs_id is not among `observations`.
    void record(const Judgment& judgment, std::span<const Observation> observations);

    std::vector<Judgment> current() const;
    std::span<const Judgment> audit() const { return audit_; }
    std::size_t size() const { return current_.size(); }

    /// One JSON object per line, in recording order.
    std::string audit_ndjson() const;
    /// JSON array of the current entries sorted by key.
    std::string current_json() const;

    /// Rebuilds a store by replaying an audit trail.
    static JudgmentStore from_audit(std::string_view ndjson);

private:
    void apply(const Judgment& judgment);

    std::map<Key, Judgment> current_;
    std::vector<Judgment> audit_;
};

std::string judgment_to_json(const Judgment& judgment);
Judgment judgment_from_json(std::string_view text);

/// Verdict sheet `obs_id,q1,q2[,note]`; empty cells stay pending. Throws
/// ParseError naming the row of the first bad cell.
std::vector<Judgment> parse_verdict_csv(std::string_view text, std::string_view assessor,
                                        std::string_view recorded_at);

/// Prompts for Q1 and Q2 of every observation on `out`, reading verdicts
/// from `in`. Unknown tokens re-prompt, `s` skips, end of input stops.
std::vector<Judgment> run_interactive(std::span<const Observation> observations, std::size_t population,
                                      std::string_view assessor, std::string_view recorded_at, std::istream& in,
                                      std::ostream& out);

// --- report --------------------------------------------------------------------

struct ReportRow {
    Observation observation;
    std::optional<Verdict> q1;
    std::optional<Verdict> q2;
};

struct AssessmentReport {
    std::vector<ReportRow> rows;
    std::map<Verdict, std::size_t> q1_counts;
    std::map<Verdict, std::size_t> q2_counts;
    std::vector<int> discrepancies;  // judged on both questions, verdicts differ
    std::vector<int> pending;        // missing at least one verdict
    std::string assessor;

    std::size_t judged(Question q) const;
    /// Unique most frequent verdict, if any.
    std::optional<Verdict> most_frequent(Question q) const;

    std::string to_markdown() const;
    std::string to_csv() const;
};

AssessmentReport summarize(std::span<const Observation> observations, std::span<const Judgment> judgments,
                           std::string_view assessor = "expert");

std::string observations_to_json(std::span<const Observation> observations);
std::vector<Observation> observations_from_json(std::string_view text);

}  // namespace abspm::assessment
