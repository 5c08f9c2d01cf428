#pragma once

#include <limits>
#include <string>

#include "tvme/efficiency.hpp"

namespace tvme::svg {

struct PlotOptions {
    int width = 960;
    int height = 420;
    // Display-only ceiling for exploding zeta values; stored data is never
    // capped. Non-finite means no cap.
    double display_cap = std::numeric_limits<double>::infinity();
    std::string title;
};

// Self-contained SVG: solid zeta polyline, dashed band polylines, date axis.
// Missing zeta points split the polyline into separate segments.
std::string render_zeta_plot(const efficiency::ZetaSeries& series, const PlotOptions& opts = {});

void write_zeta_plot(const efficiency::ZetaSeries& series, const std::string& path,
                     const PlotOptions& opts = {});

}  // namespace tvme::svg
