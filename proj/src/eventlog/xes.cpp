#include "abspm/xes.hpp"

#include <charconv>
#include <cstring>
#include <memory>

#include <expat.h>
#include <fmt/format.h>

#include "abspm/error.hpp"
#include "abspm/io.hpp"

namespace abspm::eventlog {

namespace {

constexpr std::string_view kConceptName = "concept:name";
constexpr std::string_view kTimestamp = "time:timestamp";
constexpr std::string_view kSourceDigest = "abspm:source_digest";
constexpr std::string_view kBaseDate = "abspm:base_date";
constexpr std::string_view kFilteredEmpty = "abspm:filtered_empty";

const Extension kConceptExt{"Concept", "concept", "http://www.xes-standard.org/concept.xesext"};
const Extension kTimeExt{"Time", "time", "http://www.xes-standard.org/time.xesext"};

bool is_attribute_element(std::string_view name) {
    return name == "string" || name == "date" || name == "int" || name == "float" || name == "boolean" ||
           name == "id" || name == "list" || name == "container" || name == "values";
}

void escape_into(std::string& out, std::string_view text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            case '\n': out += "&#10;"; break;
            case '\r': out += "&#13;"; break;
            case '\t': out += "&#9;"; break;
            default: out.push_back(c);
        }
    }
}

std::string escape(std::string_view text) {
    std::string out;
    escape_into(out, text);
    return out;
}

void write_attribute(std::string& out, const Attribute& a, int depth) {
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    out += fmt::format("{}<{} key=\"{}\"", indent, a.type, escape(a.key));
    // list/container/values carry no value in XES 2.0; keep it only when set
    if (!a.value.empty() || (a.type != "list" && a.type != "container" && a.type != "values")) {
        out += fmt::format(" value=\"{}\"", escape(a.value));
    }
    if (a.children.empty()) {
        out += "/>\n";
        return;
    }
    out += ">\n";
    for (const auto& child : a.children) write_attribute(out, child, depth + 1);
    out += fmt::format("{}</{}>\n", indent, a.type);
}

void write_simple(std::string& out, int depth, std::string_view type, std::string_view key, std::string_view value) {
    out += fmt::format("{}<{} key=\"{}\" value=\"{}\"/>\n", std::string(static_cast<std::size_t>(depth) * 2, ' '), type,
                       escape(key), escape(value));
}

}  // namespace

std::string to_xes(const EventLog& log) {
    std::string out;
    out.reserve(256 + log.event_count() * 200);
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<log xes.version=\"1.0\" xes.features=\"nested-attributes\" xmlns=\"http://www.xes-standard.org/\">\n";
    for (const Extension* ext : {&kConceptExt, &kTimeExt}) {
        out += fmt::format("  <extension name=\"{}\" prefix=\"{}\" uri=\"{}\"/>\n", ext->name, ext->prefix, ext->uri);
    }
    for (const auto& ext : log.extensions) {
        out += fmt::format("  <extension name=\"{}\" prefix=\"{}\" uri=\"{}\"/>\n", escape(ext.name),
                           escape(ext.prefix), escape(ext.uri));
    }
    out += "  <global scope=\"trace\">\n";
    write_simple(out, 2, "string", kConceptName, "__INVALID__");
    out += "  </global>\n";
    out += "  <global scope=\"event\">\n";
    write_simple(out, 2, "string", kConceptName, "__INVALID__");
    write_simple(out, 2, "date", kTimestamp, "1970-01-01T00:00:00.000+00:00");
    out += "  </global>\n";
    out += "  <classifier name=\"Activity\" keys=\"concept:name\"/>\n";

    write_simple(out, 1, "string", kConceptName, log.meta.name);
    if (!log.meta.source_digest.empty()) write_simple(out, 1, "string", kSourceDigest, log.meta.source_digest);
    if (log.meta.base_date) write_simple(out, 1, "string", kBaseDate, format_iso_date(*log.meta.base_date));
    if (log.meta.filtered_empty) write_simple(out, 1, "boolean", kFilteredEmpty, "true");
    for (const auto& a : log.attributes) write_attribute(out, a, 1);

    for (const auto& trace : log.traces) {
        out += "  <trace>\n";
        write_simple(out, 2, "string", kConceptName, trace.case_id);
        for (const auto& a : trace.attributes) write_attribute(out, a, 2);
        for (const auto& e : trace.events) {
            out += "    <event>\n";
            write_simple(out, 3, "string", kConceptName, e.activity);
            write_simple(out, 3, "date", kTimestamp, format_iso_timestamp(e.timestamp));
            for (const auto& a : e.attributes) write_attribute(out, a, 3);
            out += "    </event>\n";
        }
        out += "  </trace>\n";
    }
    out += "</log>\n";
    return out;
}

namespace {

enum class Scope { document, log, global, trace, event, attribute, ignored };

/// SAX state for one parse. Attributes are collected on a stack so nested
/// list/container values are kept.
class XesReader {
public:
    explicit XesReader(XML_Parser parser) : parser_(parser) {}

    EventLog take() { return std::move(log_); }
    const std::string& error() const { return error_; }

    static void on_start(void* self, const XML_Char* name, const XML_Char** atts) {
        static_cast<XesReader*>(self)->start(name, atts);
    }
    static void on_end(void* self, const XML_Char* name) { static_cast<XesReader*>(self)->end(name); }

private:
    struct Frame {
        Scope scope;
        std::string name;
        Attribute attribute;
    };

    void fail(std::string_view element, const std::string& message) {
        if (!error_.empty()) return;
        error_ = fmt::format("xes line {}: <{}>: {}", XML_GetCurrentLineNumber(parser_), element, message);
        XML_StopParser(parser_, XML_FALSE);
    }

    static std::optional<std::string> xml_attr(const XML_Char** atts, std::string_view key) {
        for (int i = 0; atts[i] != nullptr; i += 2) {
            if (key == atts[i]) return std::string(atts[i + 1]);
        }
        return std::nullopt;
    }

    Scope parent_scope() const { return stack_.empty() ? Scope::document : stack_.back().scope; }

    void start(std::string_view name, const XML_Char** atts) {
        if (!error_.empty()) return;
        const Scope parent = parent_scope();
        if (parent == Scope::global || parent == Scope::ignored) {
            stack_.push_back({Scope::ignored, std::string(name), {}});
            return;
        }
        if (parent == Scope::document) {
            if (name != "log") return fail(name, "root element must be <log>");
            stack_.push_back({Scope::log, "log", {}});
            return;
        }
        if (name == "extension") {
            if (parent != Scope::log) return fail(name, "extension outside <log>");
            Extension ext{xml_attr(atts, "name").value_or(""), xml_attr(atts, "prefix").value_or(""),
                          xml_attr(atts, "uri").value_or("")};
            if (!(ext.prefix == kConceptExt.prefix && ext.uri == kConceptExt.uri) &&
                !(ext.prefix == kTimeExt.prefix && ext.uri == kTimeExt.uri)) {
                log_.extensions.push_back(std::move(ext));
            }
            stack_.push_back({Scope::ignored, std::string(name), {}});
            return;
        }
        if (name == "global" || name == "classifier") {
            if (parent != Scope::log) return fail(name, "must be a direct child of <log>");
            stack_.push_back({Scope::global, std::string(name), {}});
            return;
        }
        if (name == "trace") {
            if (parent != Scope::log) return fail(name, "trace outside <log>");
            log_.traces.emplace_back();
            stack_.push_back({Scope::trace, "trace", {}});
            seen_case_id_ = false;
            return;
        }
        if (name == "event") {
            if (parent != Scope::trace) return fail(name, "event outside <trace>");
            event_ = Event{};
            seen_activity_ = false;
            seen_timestamp_ = false;
            stack_.push_back({Scope::event, "event", {}});
            return;
        }
        if (is_attribute_element(name)) {
            auto key = xml_attr(atts, "key");
            if (!key && name != "values") return fail(name, "attribute without key");
            auto value = xml_attr(atts, "value");
            if (!value && name != "list" && name != "container" && name != "values") {
                return fail(name, fmt::format("attribute '{}' without value", key.value_or("")));
            }
            Attribute a{key.value_or(""), std::string(name), value.value_or(""), {}};
            if (!check_value(a)) return;
            stack_.push_back({Scope::attribute, std::string(name), std::move(a)});
            return;
        }
        fail(name, "unknown element");
    }

    bool check_value(const Attribute& a) {
        if (a.type == "int") {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(a.value.data(), a.value.data() + a.value.size(), v);
            if (a.value.empty() || ec != std::errc{} || ptr != a.value.data() + a.value.size()) {
                fail(a.type, fmt::format("attribute '{}' has non-integer value '{}'", a.key, a.value));
                return false;
            }
        } else if (a.type == "date") {
            if (!parse_timestamp(a.value)) {
                fail(a.type, fmt::format("attribute '{}' has unreadable date '{}'", a.key, a.value));
                return false;
            }
        } else if (a.type == "boolean") {
            if (a.value != "true" && a.value != "false") {
                fail(a.type, fmt::format("attribute '{}' has non-boolean value '{}'", a.key, a.value));
                return false;
            }
        }
        return true;
    }

    void end(std::string_view name) {
        if (!error_.empty() || stack_.empty()) return;
        Frame frame = std::move(stack_.back());
        stack_.pop_back();
        switch (frame.scope) {
            case Scope::attribute:
                attach(std::move(frame.attribute));
                break;
            case Scope::event:
                if (!seen_activity_) return fail(name, "event without concept:name");
                if (!seen_timestamp_) return fail(name, "event without time:timestamp");
                log_.traces.back().events.push_back(std::move(event_));
                break;
            case Scope::trace:
                if (!seen_case_id_) return fail(name, "trace without concept:name");
                break;
            default:
                break;
        }
    }

    void attach(Attribute a) {
        const Scope parent = parent_scope();
        if (parent == Scope::attribute) {
            stack_.back().attribute.children.push_back(std::move(a));
            return;
        }
        if (parent == Scope::log) {
            if (a.key == kConceptName && a.type == "string") {
                log_.meta.name = a.value;
            } else if (a.key == kSourceDigest && a.type == "string") {
                log_.meta.source_digest = a.value;
            } else if (a.key == kBaseDate && a.type == "string") {
                auto d = parse_date(a.value);
                if (!d) return fail(a.type, fmt::format("unreadable base date '{}'", a.value));
                log_.meta.base_date = d;
            } else if (a.key == kFilteredEmpty && a.type == "boolean") {
                log_.meta.filtered_empty = a.value == "true";
            } else {
                log_.attributes.push_back(std::move(a));
            }
            return;
        }
        if (parent == Scope::trace) {
            Trace& t = log_.traces.back();
            if (a.key == kConceptName && !seen_case_id_) {
                t.case_id = a.value;
                seen_case_id_ = true;
            } else {
                t.attributes.push_back(std::move(a));
            }
            return;
        }
        if (parent == Scope::event) {
            if (a.key == kConceptName && !seen_activity_) {
                event_.activity = a.value;
                seen_activity_ = true;
            } else if (a.key == kTimestamp && a.type == "date" && !seen_timestamp_) {
                event_.timestamp = *parse_timestamp(a.value);
                seen_timestamp_ = true;
            } else {
                event_.attributes.push_back(std::move(a));
            }
        }
    }

    XML_Parser parser_;
    EventLog log_;
    std::vector<Frame> stack_;
    Event event_;
    bool seen_activity_ = false;
    bool seen_timestamp_ = false;
    bool seen_case_id_ = false;
    std::string error_;
};

struct ParserDeleter {
    void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

EventLog parse_xes(std::string_view text) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter> parser(XML_ParserCreate("UTF-8"));
    if (!parser) throw Error("cannot allocate XML parser");
    XesReader reader(parser.get());
    XML_SetUserData(parser.get(), &reader);
    XML_SetElementHandler(parser.get(), &XesReader::on_start, &XesReader::on_end);

    auto status = XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE);
    if (!reader.error().empty()) throw ParseError(reader.error());
    if (status != XML_STATUS_OK) {
        throw ParseError(fmt::format("xes line {}: malformed XML: {}", XML_GetCurrentLineNumber(parser.get()),
                                     XML_ErrorString(XML_GetErrorCode(parser.get()))));
    }
    return reader.take();
}

void write_xes(const EventLog& log, const std::filesystem::path& path) {
    try {
        write_file_atomic(path, to_xes(log));
    } catch (const IoError& e) {
        throw IoError(fmt::format("writing xes {}: {}", path.string(), e.what()));
    }
}

EventLog read_xes(const std::filesystem::path& path) {
    std::string text = read_file(path);
    try {
        return parse_xes(text);
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace abspm::eventlog
