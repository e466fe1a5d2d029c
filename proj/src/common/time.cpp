#include "abspm/time.hpp"

#include <charconv>
#include <cstdio>

#include <fmt/format.h>

namespace abspm {

namespace chr = std::chrono;

namespace {

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

bool all_digits(std::string_view text) {
    if (text.empty()) return false;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

std::optional<Date> make_date(int y, int m, int d) {
    Date date{chr::year{y}, chr::month{static_cast<unsigned>(m)}, chr::day{static_cast<unsigned>(d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

}  // namespace

Timestamp at_midnight(Date d) {
    return chr::time_point_cast<chr::milliseconds>(chr::sys_days{d});
}

Date date_of(Timestamp t) {
    return Date{chr::floor<chr::days>(t)};
}

Date add_days(Date d, long days) {
    return Date{chr::sys_days{d} + chr::days{days}};
}

long days_between(Date from, Date to) {
    return static_cast<long>((chr::sys_days{to} - chr::sys_days{from}).count());
}

double days_between(Timestamp a, Timestamp b) {
    return static_cast<double>((b - a).count()) / kMillisPerDay;
}

std::string format_iso_date(Date d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                       static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

std::string format_dotted_date(Date d) {
    return fmt::format("{:02d}.{:02d}.{:04d}", static_cast<unsigned>(d.day()),
                       static_cast<unsigned>(d.month()), static_cast<int>(d.year()));
}

std::string format_iso_timestamp(Timestamp t) {
    auto day = chr::floor<chr::days>(t);
    chr::hh_mm_ss<chr::milliseconds> tod{t - day};
    return fmt::format("{}T{:02d}:{:02d}:{:02d}.{:03d}+00:00", format_iso_date(Date{day}),
                       tod.hours().count(), tod.minutes().count(), tod.seconds().count(),
                       tod.subseconds().count());
}

std::optional<Date> parse_date(std::string_view text) {
    int y = 0, m = 0, d = 0;
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        auto ys = text.substr(0, 4), ms = text.substr(5, 2), ds = text.substr(8, 2);
        if (!all_digits(ys) || !all_digits(ms) || !all_digits(ds)) return std::nullopt;
        if (!parse_int(ys, y) || !parse_int(ms, m) || !parse_int(ds, d)) return std::nullopt;
        return make_date(y, m, d);
    }
    if (text.size() == 10 && text[2] == '.' && text[5] == '.') {
        auto ds = text.substr(0, 2), ms = text.substr(3, 2), ys = text.substr(6, 4);
        if (!all_digits(ys) || !all_digits(ms) || !all_digits(ds)) return std::nullopt;
        if (!parse_int(ys, y) || !parse_int(ms, m) || !parse_int(ds, d)) return std::nullopt;
        return make_date(y, m, d);
    }
    return std::nullopt;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    if (text.size() < 10) return std::nullopt;
    auto date = parse_date(text.substr(0, 10));
    if (!date || text[4] != '-') return std::nullopt;
    Timestamp result = at_midnight(*date);
    std::string_view rest = text.substr(10);
    if (rest.empty()) return result;
    if (rest[0] != 'T' && rest[0] != ' ') return std::nullopt;
    rest.remove_prefix(1);

    auto take_two = [&](int& out) {
        if (rest.size() < 2 || !all_digits(rest.substr(0, 2))) return false;
        parse_int(rest.substr(0, 2), out);
        rest.remove_prefix(2);
        return true;
    };

    int hh = 0, mm = 0, ss = 0, ms = 0;
    if (!take_two(hh) || rest.empty() || rest[0] != ':') return std::nullopt;
    rest.remove_prefix(1);
    if (!take_two(mm)) return std::nullopt;
    if (!rest.empty() && rest[0] == ':') {
        rest.remove_prefix(1);
        if (!take_two(ss)) return std::nullopt;
        if (!rest.empty() && rest[0] == '.') {
            rest.remove_prefix(1);
            std::size_t n = 0;
            while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') ++n;
            if (n == 0) return std::nullopt;
            // keep millisecond precision, truncate the rest
            std::string frac(rest.substr(0, std::min<std::size_t>(n, 3)));
            frac.resize(3, '0');
            parse_int(frac, ms);
            rest.remove_prefix(n);
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    result += chr::hours{hh} + chr::minutes{mm} + chr::seconds{ss} + chr::milliseconds{ms};

    if (rest.empty() || rest == "Z") return result;
    if (rest.size() != 6 || (rest[0] != '+' && rest[0] != '-') || rest[3] != ':') return std::nullopt;
    int oh = 0, om = 0;
    if (!all_digits(rest.substr(1, 2)) || !all_digits(rest.substr(4, 2))) return std::nullopt;
    parse_int(rest.substr(1, 2), oh);
    parse_int(rest.substr(4, 2), om);
    auto offset = chr::hours{oh} + chr::minutes{om};
    // local = utc + offset
    if (rest[0] == '+') {
        result -= offset;
    } else {
        result += offset;
    }
    return result;
}

}  // namespace abspm
