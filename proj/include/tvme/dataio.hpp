#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "tvme/errors.hpp"

namespace tvme {

// Calendar label of one observation. Monthly data carries no day-of-month.
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 0 for plain YYYY-MM labels

    bool has_day() const { return day > 0; }
    int month_index() const { return year * 12 + (month - 1); }
    std::string str() const;

    friend auto operator<=>(const Date&, const Date&) = default;
};

// Serial day number (days since 1970-01-01), valid for any Gregorian date.
long day_number(const Date& d);

enum class Frequency { monthly, fixed_days };

// How to read a price CSV: which column holds dates, optional market subset,
// and what to do with rows that have missing cells.
struct CsvLayout {
    std::string date_column = "date";
    std::string date_format;               // "", "ym", or "ymd"; "" = auto-detect
    std::vector<std::string> markets;      // subset to keep; empty = all
    bool drop_incomplete_rows = false;     // default: reject files with gaps
};

// Aligned multi-market price-index series. All prices strictly positive,
// dates strictly increasing and equally spaced at `frequency`.
struct PricePanel {
    std::vector<Date> dates;
    std::vector<std::string> markets;
    Eigen::MatrixXd prices;  // T_raw x k
    Frequency frequency = Frequency::monthly;
    long spacing_days = 0;       // gap for Frequency::fixed_days
    std::size_t rows_dropped = 0;

    Eigen::Index T_raw() const { return prices.rows(); }
    Eigen::Index k() const { return prices.cols(); }
};

// Per-period log returns; row t is ln(p[t+1]) - ln(p[t]), dated at the later
// price.
struct ReturnsPanel {
    std::vector<Date> dates;
    std::vector<std::string> markets;
    Eigen::MatrixXd returns;  // T x k

    Eigen::Index T() const { return returns.rows(); }
    Eigen::Index k() const { return returns.cols(); }
};

struct DescriptiveStats {
    std::vector<std::string> markets;
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;   // sample standard deviation, divisor T-1
    Eigen::VectorXd min;
    Eigen::VectorXd max;
    Eigen::Index n = 0;
};

PricePanel load_price_panel(const std::string& path, const CsvLayout& layout = {});

// Stream-based core of load_price_panel; `source` names the input in errors.
PricePanel parse_price_panel(std::istream& in, const CsvLayout& layout = {},
                             const std::string& source = "<stream>");

ReturnsPanel to_log_returns(const PricePanel& panel);

DescriptiveStats describe(const ReturnsPanel& returns);

// Column subset in the given order; throws DomainError on unknown names.
ReturnsPanel select_markets(const ReturnsPanel& panel, const std::vector<std::string>& markets);

// Reads a CSV of the same shape as a price panel but holding returns
// directly (values may be negative; dates validated the same way).
ReturnsPanel load_returns_panel(const std::string& path, const CsvLayout& layout = {});

// Wraps a bare matrix as a panel with generated monthly dates and market
// names m1..mk. For simulations and tests.
ReturnsPanel synthetic_returns_panel(const Eigen::MatrixXd& returns, Date start = {2000, 1, 0});

}  // namespace tvme
