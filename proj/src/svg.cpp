#include "cmllab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cmllab {

namespace {

// all geometry goes through these so the byte-stability promise rests on
// snprintf alone
std::string num(double v, int prec = 2) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

void line(std::string& out, double x1, double y1, double x2, double y2, const char* style) {
    out += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" " + style + "/>\n";
}

void text_at(std::string& out, double x, double y, const std::string& s) {
    out += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
           "\" font-family=\"monospace\" font-size=\"11\" fill=\"#444\">" + s + "</text>\n";
}

const char* kCellColors[4] = {"#1b6ca8", "#c23b22", "#2e8540", "#8a5fbf"};

} // namespace

std::string svg_forest(const ComponentForest& forest, std::size_t depth, double width) {
    if (depth >= forest.levels.size())
        throw std::invalid_argument("svg_forest: depth " + std::to_string(depth) +
                                    " out of range (forest has " +
                                    std::to_string(forest.levels.size()) + " levels)");
    const double margin = 32;
    const double side = width - 2 * margin;
    auto px = [&](double u) { return margin + u * side; };
    auto py = [&](double v) { return margin + (1.0 - v) * side; }; // y grows upward

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
           num(width, 0) + "\" viewBox=\"0 0 " + num(width, 0) + " " + num(width, 0) + "\">\n";
    out += "<rect x=\"" + num(px(0)) + "\" y=\"" + num(py(1)) + "\" width=\"" + num(side) +
           "\" height=\"" + num(side) + "\" fill=\"white\" stroke=\"#333\"/>\n";

    const char* dashed = "stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"5,4\"";
    line(out, px(0.5), py(0), px(0.5), py(1), dashed); // fold lines at the kink
    line(out, px(0), py(0.5), px(1), py(0.5), dashed);
    line(out, px(0), py(0), px(1), py(1), dashed); // diagonal

    for (const CurveComponent& comp : forest.levels[depth]) {
        const auto& pts = comp.curve.pts();
        if (pts.size() < 2) continue;
        std::string d = "M " + num(px(pts[0].x)) + " " + num(py(pts[0].y));
        for (std::size_t i = 1; i < pts.size(); ++i)
            d += " L " + num(px(pts[i].x)) + " " + num(py(pts[i].y));
        out += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" +
               kCellColors[comp.cell & 3] + "\" stroke-width=\"1.5\"/>\n";
    }

    text_at(out, margin, width - 8,
            "depth " + std::to_string(depth) + ", " +
                std::to_string(forest.levels[depth].size()) + " components");
    out += "</svg>\n";
    return out;
}

std::string svg_bifurcation(const std::vector<BifurcationCloud>& clouds,
                            std::optional<double> c_star, double width, double height) {
    const double ml = 56, mr = 16, mt = 16, mb = 40; // margins leave room for labels
    double c_lo = 0, c_hi = 1;
    if (!clouds.empty()) {
        c_lo = clouds.front().c;
        c_hi = clouds.front().c;
        for (const BifurcationCloud& cl : clouds) {
            c_lo = std::min(c_lo, cl.c);
            c_hi = std::max(c_hi, cl.c);
        }
        if (c_hi == c_lo) { // single column still needs an extent
            c_lo -= 0.01;
            c_hi += 0.01;
        }
    }
    const double lg_lo = -16, lg_hi = 0; // log10 distance range
    auto px = [&](double c) { return ml + (c - c_lo) / (c_hi - c_lo) * (width - ml - mr); };
    auto py = [&](double lg) {
        return mt + (lg_hi - lg) / (lg_hi - lg_lo) * (height - mt - mb);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
           num(height, 0) + "\" viewBox=\"0 0 " + num(width, 0) + " " + num(height, 0) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(width, 0) + "\" height=\"" + num(height, 0) +
           "\" fill=\"white\"/>\n";
    const char* axis = "stroke=\"#333\" stroke-width=\"1\"";
    line(out, ml, mt, ml, height - mb, axis);
    line(out, ml, height - mb, width - mr, height - mb, axis);
    for (int lg = 0; lg >= -16; lg -= 4) {
        line(out, ml - 4, py(lg), ml, py(lg), axis);
        text_at(out, 4, py(lg) + 4, "1e" + std::to_string(lg));
    }
    text_at(out, width / 2 - 40, height - 8, "coupling c");

    for (const BifurcationCloud& cl : clouds) {
        const double x = px(cl.c);
        for (double d : cl.dists) {
            double lg = std::log10(std::max(d, 1e-16));
            lg = std::clamp(lg, lg_lo, lg_hi);
            out += "<circle cx=\"" + num(x) + "\" cy=\"" + num(py(lg)) +
                   "\" r=\"1.2\" fill=\"#1b6ca8\" fill-opacity=\"0.35\"/>\n";
        }
    }

    if (c_star && *c_star >= c_lo && *c_star <= c_hi) {
        line(out, px(*c_star), mt, px(*c_star), height - mb,
             "stroke=\"#c23b22\" stroke-width=\"1\" stroke-dasharray=\"5,4\"");
        text_at(out, px(*c_star) + 4, mt + 12, "c* = " + num(*c_star, 4));
    }
    out += "</svg>\n";
    return out;
}

} // namespace cmllab
