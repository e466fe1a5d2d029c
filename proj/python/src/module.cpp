#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "abspm/assessment.hpp"
#include "abspm/dfg.hpp"
#include "abspm/error.hpp"
#include "abspm/eventlog.hpp"
#include "abspm/pipeline.hpp"
#include "abspm/sim.hpp"
#include "abspm/time.hpp"
#include "abspm/xes.hpp"

namespace py = pybind11;
using namespace abspm;

namespace {

Date to_date(const std::string& text) {
    auto d = parse_date(text);
    if (!d) throw InvalidArgument("not a date: '" + text + "'");
    return *d;
}

py::dict stats_dict(const eventlog::LogStats& s) {
    return py::module_::import("json").attr("loads")(pipeline::to_json(s).dump());
}

struct PyDfg {
    discovery::Dfg dfg;
};

}  // namespace

PYBIND11_MODULE(_abspm, m) {
    m.doc() = "Schelling simulation, event logs, process discovery and face-validity assessment";

    auto base = py::register_exception<Error>(m, "AbspmError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<sim::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("grid_width", &sim::SimConfig::grid_width)
        .def_readwrite("grid_height", &sim::SimConfig::grid_height)
        .def_readwrite("density", &sim::SimConfig::density)
        .def_readwrite("tolerance", &sim::SimConfig::tolerance)
        .def_readwrite("group_count", &sim::SimConfig::group_count)
        .def_readwrite("max_steps", &sim::SimConfig::max_steps)
        .def_readwrite("seed", &sim::SimConfig::seed)
        .def_readwrite("emit_initial_status", &sim::SimConfig::emit_initial_status)
        .def_property(
            "base_date", [](const sim::SimConfig& c) { return format_iso_date(c.base_date); },
            [](sim::SimConfig& c, const std::string& d) { c.base_date = to_date(d); })
        .def("agent_count", &sim::SimConfig::agent_count)
        .def("validate", &sim::SimConfig::validate);

    py::class_<sim::SimResult>(m, "SimResult")
        .def_readonly("steps_executed", &sim::SimResult::steps_executed)
        .def_readonly("converged", &sim::SimResult::converged)
        .def_property_readonly("agent_count", [](const sim::SimResult& r) { return r.final_grid.size(); })
        .def_property_readonly("record_count", [](const sim::SimResult& r) { return r.records.size(); })
        .def("raw_csv", [](const sim::SimResult& r) { return sim::to_raw_csv(r.records); });

    m.def("simulate", py::overload_cast<const sim::SimConfig&>(&sim::run), py::arg("config"));

    py::class_<eventlog::EventLog>(m, "EventLog")
        .def_static(
            "from_raw_csv",
            [](const std::string& text, const std::string& base_date) {
                return eventlog::convert(sim::parse_raw_csv(text), to_date(base_date));
            },
            py::arg("text"), py::arg("base_date") = "2023-10-17")
        .def_static("from_xes", [](const std::string& text) { return eventlog::parse_xes(text); })
        .def_static("from_csv", [](const std::string& text) { return eventlog::parse_log_csv(text); })
        .def("to_xes", [](const eventlog::EventLog& l) { return eventlog::to_xes(l); })
        .def("to_csv", [](const eventlog::EventLog& l) { return eventlog::to_log_csv(l); })
        .def_property_readonly("case_count", [](const eventlog::EventLog& l) { return l.traces.size(); })
        .def_property_readonly("event_count", &eventlog::EventLog::event_count)
        .def("case_ids",
             [](const eventlog::EventLog& l) {
                 std::vector<std::string> ids;
                 for (const auto& t : l.traces) ids.push_back(t.case_id);
                 return ids;
             })
        .def("activities",
             [](const eventlog::EventLog& l, const std::string& case_id) {
                 std::vector<std::string> out;
                 for (const auto& t : l.traces) {
                     if (t.case_id != case_id) continue;
                     for (const auto& e : t.events) out.push_back(e.activity);
                     return out;
                 }
                 throw InvalidArgument("unknown case '" + case_id + "'");
             })
        .def("stats", [](const eventlog::EventLog& l) { return stats_dict(eventlog::stats(l)); })
        .def(
            "filter",
            [](const eventlog::EventLog& l, std::optional<std::string> from, std::optional<std::string> to,
               std::optional<double> max_duration_days, std::optional<std::size_t> max_events) {
                eventlog::FilterSpec spec;
                if (from) spec.from = to_date(*from);
                if (to) spec.to = to_date(*to);
                spec.max_case_duration_days = max_duration_days;
                spec.max_events_per_case = max_events;
                spec.validate();
                return eventlog::apply_filters(l, spec);
            },
            py::kw_only(), py::arg("from_date") = py::none(), py::arg("to_date") = py::none(),
            py::arg("max_duration_days") = py::none(), py::arg("max_events") = py::none())
        .def("__eq__", [](const eventlog::EventLog& a, const eventlog::EventLog& b) { return a == b; });

    py::class_<PyDfg>(m, "Dfg")
        .def_static("from_json", [](const std::string& text) { return PyDfg{discovery::dfg_from_json(text)}; })
        .def_property_readonly("total_cases", [](const PyDfg& d) { return d.dfg.total_cases; })
        .def("activities",
             [](const PyDfg& d) {
                 std::vector<std::string> out;
                 for (const auto& [a, n] : d.dfg.nodes) out.push_back(a);
                 return out;
             })
        .def("paths",
             [](const PyDfg& d) {
                 std::vector<std::pair<std::string, std::string>> out;
                 for (const auto& [k, e] : d.dfg.edges) out.push_back(k);
                 return out;
             })
        .def("to_json", [](const PyDfg& d) { return discovery::export_json(d.dfg); })
        .def(
            "to_dot",
            [](const PyDfg& d, const std::string& primary, const std::string& secondary) {
                return discovery::export_dot(d.dfg, primary, secondary);
            },
            py::arg("primary") = "case_frequency", py::arg("secondary") = "max_repetitions")
        .def("__eq__", [](const PyDfg& a, const PyDfg& b) { return a.dfg == b.dfg; });

    m.def(
        "discover",
        [](const eventlog::EventLog& log, double activities, double paths, const std::string& mode, double cutoff) {
            discovery::AbstractionSpec spec;
            spec.activity_ratio = activities;
            spec.path_ratio = paths;
            spec.mode = discovery::parse_mode(mode);
            spec.cutoff = cutoff;
            return PyDfg{pipeline::discover_model(log, spec)};
        },
        py::arg("log"), py::kw_only(), py::arg("activities") = 1.0, py::arg("paths") = 1.0,
        py::arg("mode") = "frequency_rank", py::arg("cutoff") = 0.0);

    m.def(
        "observations",
        [](const PyDfg& d) {
            auto requests = assessment::default_requests();
            return assessment::observations_to_json(assessment::generate_observations(d.dfg, requests));
        },
        py::arg("dfg"), "Default observations as JSON text.");

    m.def(
        "render_questions",
        [](std::size_t population) {
            auto q = assessment::render_questions(assessment::Observation{}, population);
            return std::make_pair(q.q1, q.q2);
        },
        py::arg("population"));

    m.def(
        "summarize",
        [](const std::string& observations_json, const std::string& verdict_csv, const std::string& assessor) {
            auto obs = assessment::observations_from_json(observations_json);
            assessment::JudgmentStore store;
            for (const auto& j : assessment::parse_verdict_csv(verdict_csv, assessor, "")) store.record(j, obs);
            auto current = store.current();
            auto r = assessment::summarize(obs, current, assessor);
            auto counts = [](const std::map<assessment::Verdict, std::size_t>& c) {
                py::dict d;
                for (const auto& [v, n] : c) d[py::str(std::string(assessment::verdict_token(v)))] = n;
                return d;
            };
            py::dict out;
            out["q1_counts"] = counts(r.q1_counts);
            out["q2_counts"] = counts(r.q2_counts);
            out["discrepancies"] = r.discrepancies;
            out["pending"] = r.pending;
            out["markdown"] = r.to_markdown();
            out["csv"] = r.to_csv();
            return out;
        },
        py::arg("observations_json"), py::arg("verdict_csv"), py::arg("assessor") = "expert");
}
