#pragma once
#include <optional>
#include <string>
#include <vector>

#include "cmllab/curve.hpp"

namespace cmllab {

// SVG snapshot of one forest depth: the unit square with the fold lines and
// the diagonal dashed, and every component at that depth drawn as a polyline
// colored by its cell. Output is byte-stable for a given forest (fixed
// precision, no timestamps), so images can be hash-compared across replays.
// Throws std::invalid_argument when the forest has no such depth.
std::string svg_forest(const ComponentForest& forest, std::size_t depth, double width = 640);

// Post-burn-in distance samples of one scan column.
struct BifurcationCloud {
    double c = 0;
    std::vector<double> dists;
};

// Scatter of the scan: coupling on the horizontal axis, log10 of the
// distance samples on the vertical (floored at 1e-16 so synchronized runs
// stay on the canvas). An estimated onset, when given, is drawn as a dashed
// vertical. Byte-stable like svg_forest.
std::string svg_bifurcation(const std::vector<BifurcationCloud>& clouds,
                            std::optional<double> c_star = std::nullopt, double width = 800,
                            double height = 480);

} // namespace cmllab
