#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tvme/dataio.hpp"
#include "tvme/rng.hpp"

using tvme::CsvLayout;
using tvme::parse_price_panel;

namespace {

tvme::PricePanel parse(const std::string& csv, CsvLayout layout = {}) {
    std::istringstream in(csv);
    return parse_price_panel(in, layout, "test.csv");
}

}  // namespace

TEST_CASE("doubling prices give log-2 returns") {
    const auto panel = parse(
        "date,US\n"
        "2001-01,100\n"
        "2001-02,200\n"
        "2001-03,400\n");
    REQUIRE(panel.T_raw() == 3);
    const auto ret = tvme::to_log_returns(panel);
    REQUIRE(ret.T() == 2);
    CHECK(ret.returns(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(ret.returns(1, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    // Returns are dated at the later price.
    CHECK(ret.dates[0].str() == "2001-02");
    CHECK(ret.dates[1].str() == "2001-03");

    const auto st = tvme::describe(ret);
    CHECK(st.n == 2);
    CHECK(st.mean(0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(st.sd(0) == doctest::Approx(0.0));
    CHECK(st.min(0) == doctest::Approx(st.max(0)));
}

TEST_CASE("two-point standard deviation matches |a-b|/sqrt(2)") {
    Eigen::MatrixXd r(2, 1);
    r << 0.03, -0.01;
    const auto st = tvme::describe(tvme::synthetic_returns_panel(r));
    CHECK(st.sd(0) == doctest::Approx(0.04 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(st.mean(0) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("describe agrees with two-pass scalar statistics") {
    auto gen = tvme::rng::make_generator(11);
    std::normal_distribution<double> nd(0.001, 0.05);
    Eigen::MatrixXd r(250, 4);
    for (Eigen::Index t = 0; t < r.rows(); ++t)
        for (Eigen::Index j = 0; j < r.cols(); ++j) r(t, j) = nd(gen);

    const auto st = tvme::describe(tvme::synthetic_returns_panel(r));
    const auto ref = oracles::naive_stats(r);
    for (int j = 0; j < 4; ++j) {
        CHECK(st.mean(j) == doctest::Approx(ref.mean[j]).epsilon(1e-12));
        CHECK(st.sd(j) == doctest::Approx(ref.sd[j]).epsilon(1e-12));
        CHECK(st.min(j) == doctest::Approx(ref.min[j]));
        CHECK(st.max(j) == doctest::Approx(ref.max[j]));
    }
}

TEST_CASE("CSV round-trip preserves prices exactly") {
    auto gen = tvme::rng::make_generator(12);
    std::lognormal_distribution<double> ld(4.5, 0.3);
    const int T = 40, k = 3;
    Eigen::MatrixXd p(T, k);
    for (int t = 0; t < T; ++t)
        for (int j = 0; j < k; ++j) p(t, j) = ld(gen);

    std::ostringstream csv;
    csv << "date,A,B,C\n";
    int y = 1995, mo = 7;
    char buf[64];
    for (int t = 0; t < T; ++t) {
        std::snprintf(buf, sizeof buf, "%04d-%02d", y, mo);
        csv << buf;
        for (int j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof buf, ",%.17g", p(t, j));
            csv << buf;
        }
        csv << "\n";
        if (++mo > 12) { mo = 1; ++y; }
    }
    const auto panel = parse(csv.str());
    REQUIRE(panel.T_raw() == T);
    REQUIRE(panel.k() == k);
    CHECK((panel.prices - p).cwiseAbs().maxCoeff() == 0.0);
    CHECK(panel.frequency == tvme::Frequency::monthly);
    CHECK(panel.dates.front().str() == "1995-07");
    CHECK(panel.dates.back().str() == "1998-10");
}

TEST_CASE("market subset and ordering") {
    const std::string csv =
        "date,US,CA,GB\n"
        "2001-01,1,10,100\n"
        "2001-02,2,20,200\n";
    CsvLayout layout;
    layout.markets = {"GB", "US"};
    const auto panel = parse(csv, layout);
    REQUIRE(panel.markets == std::vector<std::string>{"GB", "US"});
    CHECK(panel.prices(0, 0) == 100);
    CHECK(panel.prices(0, 1) == 1);

    const auto ret = tvme::to_log_returns(parse(csv));
    const auto sel = tvme::select_markets(ret, {"CA"});
    REQUIRE(sel.k() == 1);
    CHECK(sel.returns(0, 0) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS((void)tvme::select_markets(ret, {"XX"}), tvme::DomainError);
    CsvLayout missing;
    missing.markets = {"US", "XX"};
    CHECK_THROWS_AS(parse(csv, missing), tvme::DomainError);
}

TEST_CASE("returns are invariant to rescaling the index") {
    const std::string a =
        "date,US\n2001-01,50\n2001-02,55\n2001-03,52\n";
    const std::string b =
        "date,US\n2001-01,5000\n2001-02,5500\n2001-03,5200\n";
    const auto ra = tvme::to_log_returns(parse(a));
    const auto rb = tvme::to_log_returns(parse(b));
    CHECK((ra.returns - rb.returns).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("malformed cells are rejected with the offending line") {
    const std::string bad_number =
        "date,US\n2001-01,100\n2001-02,1o1\n";
    try {
        parse(bad_number);
        FAIL("expected ParseError");
    } catch (const tvme::ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("US") != std::string::npos);
    }

    CHECK_THROWS_AS(parse("date,US\n2001-01,100\n2001-02\n"), tvme::ParseError);
    CHECK_THROWS_AS(parse("date,US\n2001-01,0\n2001-02,100\n"), tvme::DomainError);
    CHECK_THROWS_AS(parse("date,US\n2001-01,-3\n2001-02,100\n"), tvme::DomainError);
    CHECK_THROWS_AS(parse("date,US,US\n2001-01,1,2\n2001-02,2,3\n"), tvme::ParseError);
    CHECK_THROWS_AS(parse("date,US\n2001-01,100\n"), tvme::InsufficientDataError);
    CHECK_THROWS_AS(parse("when,US\n2001-01,1\n2001-02,2\n"), tvme::ParseError);
}

TEST_CASE("missing cells: reject by default, drop on request") {
    const std::string csv =
        "date,US,CA\n"
        "2001-01,100,10\n"
        "2001-02,110,\n"
        "2001-03,121,12\n"
        "2001-04,133,13\n";
    CHECK_THROWS_AS(parse(csv), tvme::ParseError);

    CsvLayout drop;
    drop.drop_incomplete_rows = true;
    // Dropping the gap row must not silently create a calendar hole either;
    // monthly data with a dropped interior row is no longer evenly spaced.
    CHECK_THROWS_AS(parse(csv, drop), tvme::FrequencyError);

    const std::string tail_gap =
        "date,US,CA\n"
        "2001-01,100,10\n"
        "2001-02,110,11\n"
        "2001-03,121,.\n";
    const auto panel = parse(tail_gap, drop);
    CHECK(panel.T_raw() == 2);
    CHECK(panel.rows_dropped == 1);
}

TEST_CASE("calendar validation") {
    CHECK_THROWS_AS(parse("date,US\n2001-01,1\n2001-03,2\n"), tvme::FrequencyError);
    CHECK_THROWS_AS(parse("date,US\n2001-02,1\n2001-01,2\n"), tvme::FrequencyError);
    CHECK_THROWS_AS(parse("date,US\n2001-01,1\n2001-01,2\n"), tvme::FrequencyError);

    // Year boundary is fine.
    const auto wrap = parse("date,US\n2000-12,1\n2001-01,2\n");
    CHECK(wrap.frequency == tvme::Frequency::monthly);

    // Day-labelled data: constant 7-day spacing.
    const auto weekly = parse(
        "date,US\n"
        "2001-01-05,1\n"
        "2001-01-12,2\n"
        "2001-01-19,3\n");
    CHECK(weekly.frequency == tvme::Frequency::fixed_days);
    CHECK(weekly.spacing_days == 7);

    CHECK_THROWS_AS(parse("date,US\n2001-01-05,1\n2001-01-12,2\n2001-01-20,3\n"),
                    tvme::FrequencyError);

    // Mixing date formats is a parse error, not a calendar error.
    CHECK_THROWS_AS(parse("date,US\n2001-01-05,1\n2001-02,2\n"), tvme::ParseError);
}

TEST_CASE("header quirks: BOM, quotes, reordered date column") {
    const std::string csv =
        "\xEF\xBB\xBF\"US\",date\n"
        "3,2001-01\n"
        "4,2001-02\n";
    const auto panel = parse(csv);
    REQUIRE(panel.markets == std::vector<std::string>{"US"});
    CHECK(panel.prices(1, 0) == 4);
}

TEST_CASE("returns CSV may hold negative values") {
    const auto file = std::string("/tmp/tvme_test_returns.csv");
    {
        std::ofstream out(file);
        out << "date,US\n2001-01,-0.02\n2001-02,0.05\n";
    }
    const auto ret = tvme::load_returns_panel(file);
    REQUIRE(ret.T() == 2);
    CHECK(ret.returns(0, 0) == doctest::Approx(-0.02));
    std::remove(file.c_str());
}

TEST_CASE("synthetic panel generates a monthly calendar") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(14, 2);
    const auto panel = tvme::synthetic_returns_panel(r, {1999, 11, 0});
    REQUIRE(panel.markets == std::vector<std::string>{"m1", "m2"});
    CHECK(panel.dates[0].str() == "1999-11");
    CHECK(panel.dates[2].str() == "2000-01");
    CHECK(panel.dates[13].str() == "2000-12");
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS((void)tvme::load_price_panel("/nonexistent/panel.csv"), tvme::IoError);
}
