#include "tvme/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace tvme {

std::string Date::str() const {
    char buf[16];
    if (has_day()) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    } else {
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    }
    return buf;
}

long day_number(const Date& d) {
    // Days-from-civil (proleptic Gregorian), epoch 1970-01-01.
    long y = d.year;
    const long m = d.month;
    const long dd = d.has_day() ? d.day : 1;
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const long yoe = y - era * 400;
    const long doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1;
    const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

bool is_missing(const std::string& cell) {
    if (cell.empty() || cell == ".") return true;
    std::string low(cell);
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return low == "na" || low == "nan" || low == "null";
}

int parse_int_field(std::string_view s, std::size_t line_no, const char* what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(s) + "'", line_no);
    }
    return value;
}

int days_in_month(int year, int month) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[month - 1];
}

// Accepts YYYY-MM or YYYY-MM-DD ('/' also allowed as separator). `format`
// pins which of the two is expected; empty means either.
Date parse_date(const std::string& cell, const std::string& format, std::size_t line_no) {
    std::vector<std::string_view> parts;
    std::string_view sv(cell);
    std::size_t start = 0;
    for (std::size_t i = 0; i <= sv.size(); ++i) {
        if (i == sv.size() || sv[i] == '-' || sv[i] == '/') {
            parts.push_back(sv.substr(start, i - start));
            start = i + 1;
        }
    }
    if (parts.size() != 2 && parts.size() != 3) {
        throw ParseError("invalid date '" + cell + "' (expected YYYY-MM or YYYY-MM-DD)", line_no);
    }
    if (format == "ym" && parts.size() != 2) {
        throw ParseError("date '" + cell + "' has a day component but the file started with YYYY-MM labels",
                         line_no);
    }
    if (format == "ymd" && parts.size() != 3) {
        throw ParseError("date '" + cell + "' lacks a day component but the file started with YYYY-MM-DD labels",
                         line_no);
    }
    Date d;
    d.year = parse_int_field(parts[0], line_no, "year");
    d.month = parse_int_field(parts[1], line_no, "month");
    if (d.month < 1 || d.month > 12) {
        throw ParseError("month out of range in date '" + cell + "'", line_no);
    }
    if (parts.size() == 3) {
        d.day = parse_int_field(parts[2], line_no, "day");
        if (d.day < 1 || d.day > days_in_month(d.year, d.month)) {
            throw ParseError("day out of range in date '" + cell + "'", line_no);
        }
    }
    return d;
}

double parse_value(const std::string& cell, std::size_t line_no, const std::string& market) {
    const std::string s = trim(cell);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty()) {
        throw ParseError("invalid number '" + cell + "' in column '" + market + "'", line_no);
    }
    return v;
}

// Dates must be strictly increasing and equally spaced: consecutive months,
// or a constant gap in days. Fills frequency/spacing_days on the panel.
void validate_calendar(PricePanel& panel) {
    const auto& dates = panel.dates;
    if (dates.size() < 2) return;
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (day_number(dates[t]) <= day_number(dates[t - 1]) &&
            dates[t].month_index() <= dates[t - 1].month_index()) {
            throw FrequencyError("dates not strictly increasing: " + dates[t - 1].str() + " then " +
                                 dates[t].str());
        }
    }
    if (!dates.front().has_day()) {
        panel.frequency = Frequency::monthly;
        for (std::size_t t = 1; t < dates.size(); ++t) {
            if (dates[t].month_index() != dates[t - 1].month_index() + 1) {
                throw FrequencyError("non-consecutive months: " + dates[t - 1].str() + " then " +
                                     dates[t].str());
            }
        }
        return;
    }
    const long gap0 = day_number(dates[1]) - day_number(dates[0]);
    bool constant_gap = true;
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (day_number(dates[t]) - day_number(dates[t - 1]) != gap0) {
            constant_gap = false;
            break;
        }
    }
    if (constant_gap && gap0 > 0) {
        panel.frequency = Frequency::fixed_days;
        panel.spacing_days = gap0;
        return;
    }
    // Day-labeled monthly data (month ends, mid-month stamps) is fine as long
    // as months advance one at a time.
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (dates[t].month_index() != dates[t - 1].month_index() + 1) {
            throw FrequencyError("irregular spacing between " + dates[t - 1].str() + " and " +
                                 dates[t].str());
        }
    }
    panel.frequency = Frequency::monthly;
}

PricePanel parse_panel_impl(std::istream& in, const CsvLayout& layout, const std::string& source,
                            bool require_positive) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError("empty input in " + source, 0);
    }
    ++line_no;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);  // UTF-8 BOM
    }
    const std::vector<std::string> header = split_csv_line(line);
    std::size_t date_col = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == layout.date_column) {
            date_col = j;
            break;
        }
    }
    if (date_col == header.size()) {
        throw ParseError("no '" + layout.date_column + "' column in header of " + source, 1);
    }

    std::vector<std::size_t> value_cols;
    std::vector<std::string> markets;
    if (layout.markets.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j == date_col) continue;
            if (header[j].empty()) {
                throw ParseError("unnamed column in header", 1);
            }
            value_cols.push_back(j);
            markets.push_back(header[j]);
        }
    } else {
        for (const std::string& name : layout.markets) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) {
                throw DomainError("dataio", "market '" + name + "' not found in " + source);
            }
            value_cols.push_back(static_cast<std::size_t>(it - header.begin()));
            markets.push_back(name);
        }
    }
    if (markets.empty()) {
        throw ParseError("no market columns in " + source, 1);
    }
    {
        std::unordered_set<std::string> seen;
        for (const std::string& name : markets) {
            if (!seen.insert(name).second) {
                throw ParseError("duplicate market column '" + name + "'", 1);
            }
        }
    }

    std::vector<Date> dates;
    std::vector<double> values;  // row-major staging
    std::string date_format = layout.date_format;
    std::size_t dropped = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "expected " << header.size() << " cells, got " << cells.size();
            throw ParseError(msg.str(), line_no);
        }
        bool incomplete = false;
        for (const std::size_t j : value_cols) {
            if (is_missing(cells[j])) {
                incomplete = true;
                if (!layout.drop_incomplete_rows) {
                    throw ParseError("missing value in column '" + header[j] + "'", line_no);
                }
            }
        }
        if (incomplete) {
            ++dropped;
            continue;
        }
        const Date d = parse_date(cells[date_col], date_format, line_no);
        if (date_format.empty()) {
            date_format = d.has_day() ? "ymd" : "ym";
        }
        dates.push_back(d);
        for (std::size_t c = 0; c < value_cols.size(); ++c) {
            const double v = parse_value(cells[value_cols[c]], line_no, markets[c]);
            if (!std::isfinite(v)) {
                throw ParseError("non-finite value in column '" + markets[c] + "'", line_no);
            }
            if (require_positive && v <= 0.0) {
                throw DomainError("dataio", "non-positive price " + cells[value_cols[c]] + " for market '" +
                                                markets[c] + "' at " + d.str());
            }
            values.push_back(v);
        }
    }
    if (dates.size() < 2) {
        throw InsufficientDataError("dataio",
                                    source + " has " + std::to_string(dates.size()) + " usable rows, need at least 2");
    }

    PricePanel panel;
    panel.dates = std::move(dates);
    panel.markets = std::move(markets);
    panel.rows_dropped = dropped;
    const Eigen::Index T = static_cast<Eigen::Index>(panel.dates.size());
    const Eigen::Index k = static_cast<Eigen::Index>(panel.markets.size());
    panel.prices.resize(T, k);
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index j = 0; j < k; ++j) {
            panel.prices(t, j) = values[static_cast<std::size_t>(t * k + j)];
        }
    }
    validate_calendar(panel);
    return panel;
}

}  // namespace

PricePanel parse_price_panel(std::istream& in, const CsvLayout& layout, const std::string& source) {
    return parse_panel_impl(in, layout, source, true);
}

PricePanel load_price_panel(const std::string& path, const CsvLayout& layout) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("dataio", "cannot open " + path);
    }
    return parse_panel_impl(in, layout, path, true);
}

ReturnsPanel to_log_returns(const PricePanel& panel) {
    const Eigen::Index T = panel.T_raw() - 1;
    ReturnsPanel out;
    out.markets = panel.markets;
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    out.returns.resize(T, panel.k());
    const Eigen::ArrayXXd logp = panel.prices.array().log();
    out.returns = (logp.bottomRows(T) - logp.topRows(T)).matrix();
    return out;
}

DescriptiveStats describe(const ReturnsPanel& returns) {
    const Eigen::Index T = returns.T();
    if (T < 2) {
        throw InsufficientDataError("dataio", "need at least 2 return observations for sd");
    }
    DescriptiveStats s;
    s.markets = returns.markets;
    s.n = T;
    s.mean = returns.returns.colwise().mean();
    const Eigen::MatrixXd centered = returns.returns.rowwise() - s.mean.transpose();
    s.sd = (centered.colwise().squaredNorm() / static_cast<double>(T - 1)).cwiseSqrt();
    s.min = returns.returns.colwise().minCoeff();
    s.max = returns.returns.colwise().maxCoeff();
    return s;
}

ReturnsPanel select_markets(const ReturnsPanel& panel, const std::vector<std::string>& markets) {
    if (markets.empty()) return panel;
    ReturnsPanel out;
    out.dates = panel.dates;
    out.markets = markets;
    out.returns.resize(panel.T(), static_cast<Eigen::Index>(markets.size()));
    for (std::size_t c = 0; c < markets.size(); ++c) {
        const auto it = std::find(panel.markets.begin(), panel.markets.end(), markets[c]);
        if (it == panel.markets.end()) {
            throw DomainError("dataio", "market '" + markets[c] + "' not in panel");
        }
        out.returns.col(static_cast<Eigen::Index>(c)) =
            panel.returns.col(it - panel.markets.begin());
    }
    return out;
}

ReturnsPanel synthetic_returns_panel(const Eigen::MatrixXd& returns, Date start) {
    ReturnsPanel out;
    out.returns = returns;
    int mi = start.month_index();
    out.dates.reserve(static_cast<std::size_t>(returns.rows()));
    for (Eigen::Index t = 0; t < returns.rows(); ++t, ++mi) {
        out.dates.push_back(Date{mi / 12, mi % 12 + 1, 0});
    }
    out.markets.reserve(static_cast<std::size_t>(returns.cols()));
    for (Eigen::Index j = 0; j < returns.cols(); ++j) {
        out.markets.push_back("m" + std::to_string(j + 1));
    }
    return out;
}

ReturnsPanel load_returns_panel(const std::string& path, const CsvLayout& layout) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("dataio", "cannot open " + path);
    }
    PricePanel raw = parse_panel_impl(in, layout, path, false);
    ReturnsPanel out;
    out.dates = std::move(raw.dates);
    out.markets = std::move(raw.markets);
    out.returns = std::move(raw.prices);
    return out;
}

}  // namespace tvme
