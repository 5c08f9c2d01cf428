#include "tvme/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "tvme/errors.hpp"

namespace tvme::svg {

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Scale {
    double x0, x1, y0, y1;  // pixel box
    Eigen::Index T;
    double ymax;

    double x(Eigen::Index t) const {
        if (T < 2) return (x0 + x1) / 2.0;
        return x0 + (x1 - x0) * static_cast<double>(t) / static_cast<double>(T - 1);
    }
    double y(double v) const { return y1 - (y1 - y0) * (v / ymax); }
};

// Emits one polyline per run of finite points; isolated points become dots.
void emit_series(std::ostringstream& out, const Eigen::VectorXd& v, const Scale& sc,
                 const std::string& style, double cap) {
    std::vector<std::pair<double, double>> run;
    const auto flush = [&] {
        if (run.size() >= 2) {
            out << "  <polyline fill=\"none\" " << style << " points=\"";
            for (std::size_t i = 0; i < run.size(); ++i) {
                if (i) out << ' ';
                out << num(run[i].first) << ',' << num(run[i].second);
            }
            out << "\"/>\n";
        } else if (run.size() == 1) {
            out << "  <circle " << style << " cx=\"" << num(run[0].first) << "\" cy=\""
                << num(run[0].second) << "\" r=\"2\"/>\n";
        }
        run.clear();
    };
    for (Eigen::Index t = 0; t < v.size(); ++t) {
        if (std::isfinite(v(t))) {
            run.emplace_back(sc.x(t), sc.y(std::min(v(t), cap)));
        } else {
            flush();
        }
    }
    flush();
}

}  // namespace

std::string render_zeta_plot(const efficiency::ZetaSeries& series, const PlotOptions& opts) {
    if (!series.has_bands()) {
        throw DomainError("plot", "series has no confidence band attached");
    }
    const Eigen::Index T = series.T();
    const double cap = std::isfinite(opts.display_cap) ? opts.display_cap
                                                       : std::numeric_limits<double>::max();

    double ymax = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        if (std::isfinite(series.zeta(t))) ymax = std::max(ymax, std::min(series.zeta(t), cap));
        ymax = std::max(ymax, std::min(series.band_hi(t), cap));
    }
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.05;

    Scale sc;
    sc.x0 = 56.0;
    sc.x1 = static_cast<double>(opts.width) - 16.0;
    sc.y0 = 28.0;
    sc.y1 = static_cast<double>(opts.height) - 36.0;
    sc.T = T;
    sc.ymax = ymax;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
        << opts.height << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opts.title.empty()) {
        out << "  <text x=\"" << num((sc.x0 + sc.x1) / 2.0)
            << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
            << xml_escape(opts.title) << "</text>\n";
    }

    // Axes and ticks.
    out << "  <line x1=\"" << num(sc.x0) << "\" y1=\"" << num(sc.y1) << "\" x2=\"" << num(sc.x1)
        << "\" y2=\"" << num(sc.y1) << "\" stroke=\"#333\"/>\n";
    out << "  <line x1=\"" << num(sc.x0) << "\" y1=\"" << num(sc.y0) << "\" x2=\"" << num(sc.x0)
        << "\" y2=\"" << num(sc.y1) << "\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = ymax * static_cast<double>(i) / 4.0;
        const double yy = sc.y(v);
        char lab[32];
        std::snprintf(lab, sizeof(lab), "%.3g", v);
        out << "  <line x1=\"" << num(sc.x0 - 4) << "\" y1=\"" << num(yy) << "\" x2=\"" << num(sc.x0)
            << "\" y2=\"" << num(yy) << "\" stroke=\"#333\"/>\n";
        out << "  <text x=\"" << num(sc.x0 - 8) << "\" y=\"" << num(yy + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << lab
            << "</text>\n";
    }
    const int n_xticks = std::min<Eigen::Index>(6, T);
    for (int i = 0; i < n_xticks; ++i) {
        const Eigen::Index t =
            n_xticks < 2 ? 0 : (T - 1) * static_cast<Eigen::Index>(i) / (n_xticks - 1);
        const double xx = sc.x(t);
        out << "  <line x1=\"" << num(xx) << "\" y1=\"" << num(sc.y1) << "\" x2=\"" << num(xx)
            << "\" y2=\"" << num(sc.y1 + 4) << "\" stroke=\"#333\"/>\n";
        out << "  <text x=\"" << num(xx) << "\" y=\"" << num(sc.y1 + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << xml_escape(series.dates[static_cast<std::size_t>(t)].str()) << "</text>\n";
    }

    const std::string band_style =
        "stroke=\"#c0392b\" stroke-width=\"1.2\" stroke-dasharray=\"7 5\"";
    emit_series(out, series.band_lo, sc, band_style, cap);
    emit_series(out, series.band_hi, sc, band_style, cap);
    emit_series(out, series.zeta, sc, "stroke=\"#1a4f8a\" stroke-width=\"1.6\"", cap);
    out << "</svg>\n";
    return out.str();
}

void write_zeta_plot(const efficiency::ZetaSeries& series, const std::string& path,
                     const PlotOptions& opts) {
    const std::string body = render_zeta_plot(series, opts);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("plot", "cannot write " + path);
    }
    out << body;
    if (!out.good()) {
        throw IoError("plot", "write failed for " + path);
    }
}

}  // namespace tvme::svg
