#include "cmllab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "cmllab/orbit.hpp"

namespace cmllab {

namespace {

constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

// unit-tangent deviation allowed by the slope classifier; see the header
// note on why this sits above the rounding floor of mapped short edges
constexpr double kSlopeTol = 1e-9;

std::uint32_t cell_bits(double x, double y, double kink) {
    return (x >= kink ? 1u : 0u) | (y >= kink ? 2u : 0u);
}

int classify_slope(const std::vector<CurvePoint>& pts) {
    const double inv_sqrt2 = 0.70710678118654752440;
    int cls = 0;
    double tx = 0, ty = 0; // locked target direction
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double dx = pts[i + 1].x - pts[i].x;
        double dy = pts[i + 1].y - pts[i].y;
        double n = std::hypot(dx, dy);
        double ux = dx / n, uy = dy / n;
        if (i == 0) {
            double sp = (ux + uy > 0) ? 1.0 : -1.0;
            double sm = (ux - uy > 0) ? 1.0 : -1.0;
            double dplus = std::hypot(ux - sp * inv_sqrt2, uy - sp * inv_sqrt2);
            double dminus = std::hypot(ux - sm * inv_sqrt2, uy + sm * inv_sqrt2);
            if (dplus <= dminus && dplus <= kSlopeTol) {
                cls = 1;
                tx = sp * inv_sqrt2;
                ty = sp * inv_sqrt2;
            } else if (dminus < dplus && dminus <= kSlopeTol) {
                cls = -1;
                tx = sm * inv_sqrt2;
                ty = -sm * inv_sqrt2;
            } else {
                return 0;
            }
        } else if (std::hypot(ux - tx, uy - ty) > kSlopeTol) {
            return 0;
        }
    }
    return cls;
}

Polyline first_crossing_edge(const Polyline& curve) {
    const auto& p = curve.pts();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double d0 = p[i].x - p[i].y, d1 = p[i + 1].x - p[i + 1].y;
        double a0 = p[i].x + p[i].y - 1, a1 = p[i + 1].x + p[i + 1].y - 1;
        bool hit = d0 == 0 || d1 == 0 || (d0 < 0) != (d1 < 0) || a0 == 0 || a1 == 0 ||
                   (a0 < 0) != (a1 < 0);
        if (hit) return Polyline({p[i], p[i + 1]});
    }
    throw std::logic_error("first_crossing_edge: no edge meets the diagonal lines");
}

struct Interval {
    double a = 0, b = 0;
};

// sorted disjoint interval list minus one candidate, appending what survives
std::vector<Interval> subtract_claimed(const std::vector<Interval>& claimed, Interval cand) {
    std::vector<Interval> out;
    double cur = cand.a;
    for (const auto& c : claimed) {
        if (c.b <= cand.a) continue;
        if (c.a >= cand.b) break;
        if (c.a > cur) out.push_back({cur, std::min(c.a, cand.b)});
        cur = std::max(cur, c.b);
        if (cur >= cand.b) break;
    }
    if (cur < cand.b) out.push_back({cur, cand.b});
    return out;
}

void insert_claimed(std::vector<Interval>& claimed, const std::vector<Interval>& add) {
    claimed.insert(claimed.end(), add.begin(), add.end());
    std::sort(claimed.begin(), claimed.end(), [](const Interval& x, const Interval& y) {
        return x.a < y.a;
    });
    std::vector<Interval> merged;
    for (const auto& c : claimed) {
        if (!merged.empty() && c.a <= merged.back().b) {
            merged.back().b = std::max(merged.back().b, c.b);
        } else {
            merged.push_back(c);
        }
    }
    claimed = std::move(merged);
}

// t-intervals of one single-cell component where |x - y| <= width
std::vector<Interval> band_intervals(const Polyline& curve, double width) {
    std::vector<Interval> out;
    const auto& p = curve.pts();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double w0 = p[i].x - p[i].y, w1 = p[i + 1].x - p[i + 1].y;
        double ta = p[i].t, tb = p[i + 1].t;
        double ulo, uhi;
        if (w0 == w1) {
            if (std::abs(w0) > width) continue;
            ulo = 0;
            uhi = 1;
        } else {
            double u1 = (-width - w0) / (w1 - w0);
            double u2 = (width - w0) / (w1 - w0);
            ulo = std::max(0.0, std::min(u1, u2));
            uhi = std::min(1.0, std::max(u1, u2));
            if (uhi < ulo) continue;
        }
        Interval iv{ta + ulo * (tb - ta), ta + uhi * (tb - ta)};
        if (!out.empty() && iv.a <= out.back().b) {
            out.back().b = std::max(out.back().b, iv.b);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

DepthStats level_stats(const std::vector<CurveComponent>& level) {
    DepthStats s;
    s.components = level.size();
    for (const auto& comp : level) {
        s.total_length += comp.curve.length();
        s.max_range_of_angles = std::max(s.max_range_of_angles, range_of_angles(comp.curve));
    }
    return s;
}

} // namespace

Polyline::Polyline(std::vector<CurvePoint> pts) : pts_(std::move(pts)) {
    if (pts_.size() < 2) throw std::invalid_argument("polyline needs at least 2 vertices");
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
        if (pts_[i].x == pts_[i + 1].x && pts_[i].y == pts_[i + 1].y)
            throw std::invalid_argument("polyline has a repeated vertex");
        if (!(pts_[i + 1].t > pts_[i].t))
            throw std::invalid_argument("polyline parameters must strictly increase");
        length_ += std::hypot(pts_[i + 1].x - pts_[i].x, pts_[i + 1].y - pts_[i].y);
    }
    slope_class_ = classify_slope(pts_);
}

Polyline Polyline::segment(double x0, double y0, double x1, double y1) {
    double len = std::hypot(x1 - x0, y1 - y0);
    return Polyline({{x0, y0, 0.0}, {x1, y1, len}});
}

Polyline Polyline::from_points(const std::vector<std::pair<double, double>>& xy) {
    std::vector<CurvePoint> pts;
    pts.reserve(xy.size());
    double t = 0;
    for (std::size_t i = 0; i < xy.size(); ++i) {
        if (i > 0) t += std::hypot(xy[i].first - xy[i - 1].first, xy[i].second - xy[i - 1].second);
        pts.push_back({xy[i].first, xy[i].second, t});
    }
    return Polyline(std::move(pts));
}

CurvePoint point_at_arclength(const Polyline& curve, double s) {
    const auto& p = curve.pts();
    if (s <= 0) return p.front();
    double acc = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double elen = std::hypot(p[i + 1].x - p[i].x, p[i + 1].y - p[i].y);
        if (s <= acc + elen) {
            double u = (s - acc) / elen;
            return {p[i].x + u * (p[i + 1].x - p[i].x), p[i].y + u * (p[i + 1].y - p[i].y),
                    p[i].t + u * (p[i + 1].t - p[i].t)};
        }
        acc += elen;
    }
    return p.back();
}

bool is_simple(const Polyline& curve) {
    const auto& p = curve.pts();
    auto cross = [](const CurvePoint& o, const CurvePoint& a, const CurvePoint& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    auto on_box = [](const CurvePoint& a, const CurvePoint& b, const CurvePoint& q) {
        return q.x >= std::min(a.x, b.x) && q.x <= std::max(a.x, b.x) &&
               q.y >= std::min(a.y, b.y) && q.y <= std::max(a.y, b.y);
    };
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        for (std::size_t j = i + 2; j + 1 < p.size(); ++j) {
            const CurvePoint &a = p[i], &b = p[i + 1], &c = p[j], &d = p[j + 1];
            double d1 = cross(c, d, a), d2 = cross(c, d, b);
            double d3 = cross(a, b, c), d4 = cross(a, b, d);
            if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
                ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
                return false;
            if ((d1 == 0 && on_box(c, d, a)) || (d2 == 0 && on_box(c, d, b)) ||
                (d3 == 0 && on_box(a, b, c)) || (d4 == 0 && on_box(a, b, d)))
                return false;
        }
    }
    return true;
}

SplitResult split_at_folds(const Polyline& curve, double kink) {
    SplitResult result;
    const auto& p = curve.pts();

    std::vector<CurvePoint> cur;
    std::uint32_t cur_cell = 0;

    auto close_piece = [&]() {
        if (cur.size() < 2) {
            if (!cur.empty()) ++result.dropped;
            return;
        }
        Polyline piece(cur);
        if (piece.length() < kSliverLength) {
            ++result.dropped;
            return;
        }
        result.pieces.push_back({std::move(piece), cur_cell});
    };

    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const CurvePoint &a = p[i], &b = p[i + 1];

        // fold crossings of this edge, strict side changes only
        struct Crossing {
            double u;
            std::uint32_t axes; // bit 0: x fold, bit 1: y fold
        };
        std::vector<Crossing> cross;
        double gx0 = a.x - kink, gx1 = b.x - kink;
        if ((gx0 < 0 && gx1 > 0) || (gx0 > 0 && gx1 < 0)) {
            double u = gx0 / (gx0 - gx1);
            if (u > 0 && u < 1) cross.push_back({u, 1u});
        }
        double gy0 = a.y - kink, gy1 = b.y - kink;
        if ((gy0 < 0 && gy1 > 0) || (gy0 > 0 && gy1 < 0)) {
            double u = gy0 / (gy0 - gy1);
            if (u > 0 && u < 1) cross.push_back({u, 2u});
        }
        std::sort(cross.begin(), cross.end(),
                  [](const Crossing& l, const Crossing& r) { return l.u < r.u; });
        if (cross.size() == 2 && cross[0].u == cross[1].u) {
            cross[0].axes |= cross[1].axes;
            cross.pop_back();
        }

        std::vector<double> us{0.0};
        std::vector<CurvePoint> verts{a};
        for (const auto& c : cross) {
            CurvePoint v;
            v.x = (c.axes & 1u) ? kink : a.x + c.u * (b.x - a.x);
            v.y = (c.axes & 2u) ? kink : a.y + c.u * (b.y - a.y);
            v.t = a.t + c.u * (b.t - a.t);
            us.push_back(c.u);
            verts.push_back(v);
        }
        us.push_back(1.0);
        verts.push_back(b);

        for (std::size_t s = 0; s + 1 < verts.size(); ++s) {
            const CurvePoint &va = verts[s], &vb = verts[s + 1];
            if (va.x == vb.x && va.y == vb.y) continue;
            double um = (us[s] + us[s + 1]) / 2;
            std::uint32_t cl = cell_bits(a.x + um * (b.x - a.x), a.y + um * (b.y - a.y), kink);
            if (cur.empty()) {
                cur = {va, vb};
                cur_cell = cl;
            } else if (cl == cur_cell) {
                if (!(vb.x == cur.back().x && vb.y == cur.back().y)) cur.push_back(vb);
            } else {
                close_piece();
                cur = {va, vb};
                cur_cell = cl;
            }
        }
    }
    close_piece();
    return result;
}

Polyline map_curve(const LatticeSystem& sys, const Polyline& piece, std::uint32_t cell,
                   double refine_h) {
    if (sys.m() != 2) throw std::invalid_argument("map_curve: curve machinery is m = 2 only");
    if (cell >= 4) throw std::invalid_argument("map_curve: cell index out of range");
    if (refine_h <= 0) throw std::invalid_argument("map_curve: refine_h must be positive");
    double kink = sys.map.kink();

    auto in_cell = [&](double v, int coord) {
        return ((cell >> coord) & 1u) ? v >= kink : v <= kink;
    };
    const auto& pts = piece.pts();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!in_cell(pts[i].x, 0) || !in_cell(pts[i].y, 1)) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "map_curve: vertex %zu outside cell %u", i, cell);
            throw std::invalid_argument(msg);
        }
    }

    // the branch update is affine for the tent variants, so their vertices
    // map one to one; the perturbed family is curved and needs refinement
    std::vector<CurvePoint> in;
    if (sys.map.kind() == MapKind::PerturbedTent) {
        double xlo = (cell & 1u) ? kink : 0.0, xhi = (cell & 1u) ? 1.0 : kink;
        double ylo = (cell & 2u) ? kink : 0.0, yhi = (cell & 2u) ? 1.0 : kink;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const CurvePoint &a = pts[i], &b = pts[i + 1];
            double elen = std::hypot(b.x - a.x, b.y - a.y);
            auto n = static_cast<std::size_t>(std::ceil(elen / refine_h));
            in.push_back(a);
            for (std::size_t k = 1; k < n; ++k) {
                double u = static_cast<double>(k) / static_cast<double>(n);
                // interpolation can overshoot the closed cell by an ulp
                double x = std::min(std::max(a.x + u * (b.x - a.x), xlo), xhi);
                double y = std::min(std::max(a.y + u * (b.y - a.y), ylo), yhi);
                in.push_back({x, y, a.t + u * (b.t - a.t)});
            }
        }
        in.push_back(pts.back());
    } else {
        in = pts;
    }

    std::vector<CurvePoint> out;
    out.reserve(in.size());
    for (const auto& v : in) {
        double x[2] = {v.x, v.y};
        double img[2];
        step_in_cell(sys, x, cell, img);
        if (!out.empty() && out.back().x == img[0] && out.back().y == img[1]) continue;
        out.push_back({img[0], img[1], v.t});
    }
    if (out.size() < 2) throw std::runtime_error("map_curve: image collapsed to a point");
    return Polyline(std::move(out));
}

ComponentForest iterate_curve(const LatticeSystem& sys, const Polyline& root, int depth,
                              const IterateOptions& opts) {
    if (sys.m() != 2) throw std::invalid_argument("iterate_curve: curve machinery is m = 2 only");
    if (depth < 0) throw std::invalid_argument("iterate_curve: depth must be nonnegative");
    for (const auto& v : root.pts())
        if (v.x < 0 || v.x > 1 || v.y < 0 || v.y > 1)
            throw std::invalid_argument("iterate_curve: root leaves the unit square");
    double kink = sys.map.kink();

    ComponentForest forest;
    SplitResult rs = split_at_folds(root, kink);
    forest.dropped_slivers += rs.dropped;
    std::vector<CurveComponent> level;
    for (auto& piece : rs.pieces) {
        double t0 = piece.curve.t_lo(), t1 = piece.curve.t_hi();
        level.push_back({std::move(piece.curve), piece.cell, kNoParent, t0, t1});
    }
    forest.stats.push_back(level_stats(level));
    forest.levels.push_back(std::move(level));

    for (int k = 1; k <= depth; ++k) {
        std::vector<CurveComponent> next;
        const auto& prev = forest.levels.back();
        for (std::size_t i = 0; i < prev.size() && !forest.aborted; ++i) {
            Polyline img = map_curve(sys, prev[i].curve, prev[i].cell, opts.refine_h);
            SplitResult sr = split_at_folds(img, kink);
            forest.dropped_slivers += sr.dropped;
            for (auto& piece : sr.pieces) {
                if (next.size() >= opts.component_cap) {
                    forest.aborted = true;
                    break;
                }
                double t0 = piece.curve.t_lo(), t1 = piece.curve.t_hi();
                next.push_back({std::move(piece.curve), piece.cell, i, t0, t1});
            }
        }
        if (forest.aborted) break; // partial level discarded; prefix stays consistent
        forest.stats.push_back(level_stats(next));
        forest.levels.push_back(std::move(next));
    }
    return forest;
}

double range_of_angles(const Polyline& curve) {
    const auto& p = curve.pts();
    std::vector<double> th;
    th.reserve(p.size() - 1);
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        th.push_back(std::atan2(p[i + 1].y - p[i].y, p[i + 1].x - p[i].x));
    if (th.size() < 2) return 0;
    std::sort(th.begin(), th.end());

    const double two_pi = 6.28318530717958647692;
    // the widest tangent pair has one leg nearest the other's antipode
    double widest = 0;
    for (double a : th) {
        double target = a + two_pi / 2;
        if (target > two_pi / 2) target -= two_pi;
        auto it = std::lower_bound(th.begin(), th.end(), target);
        std::size_t idx = static_cast<std::size_t>(it - th.begin());
        for (std::size_t cand : {idx % th.size(), (idx + th.size() - 1) % th.size()}) {
            double d = std::abs(th[cand] - a);
            d = std::min(d, two_pi - d);
            widest = std::max(widest, d);
        }
    }
    return 2 * std::sin(widest / 2);
}

bool meets_diagonals(const Polyline& curve) {
    const auto& p = curve.pts();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double d0 = p[i].x - p[i].y, d1 = p[i + 1].x - p[i + 1].y;
        if (d0 == 0 || d1 == 0 || (d0 < 0) != (d1 < 0)) return true;
        double a0 = p[i].x + p[i].y - 1, a1 = p[i + 1].x + p[i + 1].y - 1;
        if (a0 == 0 || a1 == 0 || (a0 < 0) != (a1 < 0)) return true;
    }
    return false;
}

double growth_excess(double c) {
    double lam = 2 * (1 - 2 * c);
    return lam * lam / (lam + 1) - 1;
}

GrowthOutcome growth_step(const LatticeSystem& sys, const Polyline& curve, double tol) {
    if (sys.m() != 2) throw std::invalid_argument("growth_step: curve machinery is m = 2 only");
    double len = curve.length();
    if (len < kGrowthLength * (1 - 1e-9))
        throw std::invalid_argument("growth_step: curve too short to drive growth");

    double kink = sys.map.kink();
    SplitResult base = split_at_folds(curve, kink);
    if (base.pieces.size() != 1)
        throw std::invalid_argument("growth_step: curve must lie in a single cell");

    if (sys.map.kind() == MapKind::PerturbedTent) {
        const auto& f = curve.pts().front();
        const auto& b = curve.pts().back();
        bool chord_ok = f.x != b.x && f.y != b.y &&
                        Polyline::segment(f.x, f.y, b.x, b.y).slope_class() != 0;
        if (!chord_ok || range_of_angles(curve) > 16 * sys.map.c2_perturbation() * len)
            throw std::invalid_argument("growth_step: curve too bent for the growth argument");
    } else if (curve.slope_class() == 0) {
        throw std::invalid_argument("growth_step: curve too bent for the growth argument");
    }

    double threshold = 1 + growth_excess(sys.c) - tol;
    GrowthOutcome out;

    if (meets_diagonals(curve)) {
        out.kind = GrowthKind::DiagonalHit;
        out.subcurve = first_crossing_edge(curve);
        out.depth = 0;
        return out;
    }

    Polyline img1 = map_curve(sys, base.pieces[0].curve, base.pieces[0].cell);
    if (meets_diagonals(img1)) {
        out.kind = GrowthKind::DiagonalHit;
        out.subcurve = first_crossing_edge(img1);
        out.depth = 1;
        return out;
    }

    SplitResult s1 = split_at_folds(img1, kink);
    if (s1.pieces.size() == 1) {
        double factor = img1.length() / len;
        if (factor >= threshold) {
            out.kind = GrowthKind::Grown;
            out.subcurve = std::move(img1);
            out.depth = 1;
            out.growth_factor = factor;
            return out;
        }
    } else if (s1.pieces.size() == 2) {
        std::size_t longest = s1.pieces[0].curve.length() >= s1.pieces[1].curve.length() ? 0 : 1;
        double factor = s1.pieces[longest].curve.length() / len;
        if (factor >= threshold) {
            out.kind = GrowthKind::Grown;
            out.subcurve = std::move(s1.pieces[longest].curve);
            out.depth = 1;
            out.growth_factor = factor;
            return out;
        }

        // both first-image pieces are short, so their own images must carry
        // the growth (or meet the diagonal lines)
        std::vector<Polyline> imgs2;
        for (const auto& piece : s1.pieces)
            imgs2.push_back(map_curve(sys, piece.curve, piece.cell));
        for (auto& img2 : imgs2) {
            if (meets_diagonals(img2)) {
                out.kind = GrowthKind::DiagonalHit;
                out.subcurve = first_crossing_edge(img2);
                out.depth = 2;
                return out;
            }
        }
        int best = -1;
        double best_len = 0;
        for (std::size_t i = 0; i < imgs2.size(); ++i) {
            if (split_at_folds(imgs2[i], kink).pieces.size() != 1) continue;
            if (imgs2[i].length() > best_len) {
                best = static_cast<int>(i);
                best_len = imgs2[i].length();
            }
        }
        if (best >= 0 && best_len / len >= threshold) {
            out.kind = GrowthKind::Grown;
            out.subcurve = std::move(imgs2[static_cast<std::size_t>(best)]);
            out.depth = 2;
            out.growth_factor = best_len / len;
            return out;
        }
    }

    out.kind = GrowthKind::Fail;
    out.depth = 2;
    out.trace = iterate_curve(sys, curve, 2);
    return out;
}

std::vector<PullbackHit> diagonal_pullback(const ComponentForest& forest, double eps) {
    if (eps <= 0) throw std::invalid_argument("diagonal_pullback: eps must be positive");
    double width = eps * std::sqrt(2.0); // dist_syn <= eps in coordinate form

    std::vector<PullbackHit> hits;
    std::vector<Interval> claimed;
    for (std::size_t d = 0; d < forest.levels.size(); ++d) {
        std::vector<Interval> fresh;
        for (const auto& comp : forest.levels[d]) {
            for (const auto& iv : band_intervals(comp.curve, width)) {
                for (const auto& rem : subtract_claimed(claimed, iv)) {
                    if (rem.b - rem.a <= 1e-15) continue;
                    fresh.push_back(rem);
                }
            }
        }
        if (fresh.empty()) continue;
        insert_claimed(claimed, fresh);
        // components abut at shared crossing parameters; merge those seams
        std::sort(fresh.begin(), fresh.end(),
                  [](const Interval& x, const Interval& y) { return x.a < y.a; });
        std::vector<Interval> merged;
        for (const auto& iv : fresh) {
            if (!merged.empty() && iv.a <= merged.back().b + 1e-12) {
                merged.back().b = std::max(merged.back().b, iv.b);
            } else {
                merged.push_back(iv);
            }
        }
        for (const auto& iv : merged) hits.push_back({iv.a, iv.b, static_cast<int>(d)});
    }
    return hits;
}

RegularPointReport regular_point_ratio(const LatticeSystem& sys, const Polyline& segment,
                                       std::optional<int> n, const RegularPointOptions& opts) {
    if (sys.m() != 2)
        throw std::invalid_argument("regular_point_ratio: curve machinery is m = 2 only");
    if (sys.map.kind() != MapKind::StandardTent)
        throw std::invalid_argument("regular_point_ratio: tally is calibrated for the standard tent");
    double lam = 2 * (1 - 2 * sys.c);
    if (lam <= 1)
        throw std::invalid_argument("regular_point_ratio: transverse factor must exceed 1");
    if (segment.slope_class() != 1)
        throw std::invalid_argument("regular_point_ratio: segment must have slope +1");
    if (segment.length() < kRegularLength * (1 - 1e-12))
        throw std::invalid_argument("regular_point_ratio: segment shorter than the minimum length");
    if (split_at_folds(segment, sys.map.kink()).pieces.size() != 1)
        throw std::invalid_argument("regular_point_ratio: segment must lie in a single cell");
    if (opts.gamma <= 0 || opts.samples == 0)
        throw std::invalid_argument("regular_point_ratio: bad sampling options");

    double x0[2] = {segment.pts().front().x, segment.pts().front().y};
    double d0 = dist_syn(x0, 2);
    if (d0 <= 0)
        throw std::invalid_argument("regular_point_ratio: segment touches the diagonal");

    RegularPointReport rep;
    rep.d_syn = d0;
    rep.samples = opts.samples;
    rep.slack = 3.0 / std::sqrt(static_cast<double>(opts.samples));

    if (n) {
        if (*n < 0) throw std::invalid_argument("regular_point_ratio: depth must be nonnegative");
        rep.n_used = *n;
    } else {
        double ratio = opts.gamma / d0;
        rep.n_used = ratio <= 1 ? 0 : static_cast<int>(std::floor(std::log(ratio) / std::log(lam)));
    }

    double budget = 0, band = d0;
    for (int j = 1; j <= rep.n_used; ++j) {
        band *= lam;
        budget += band / kRegularLength;
    }
    rep.bound = 1 - budget;

    const double sqrt2 = std::sqrt(2.0);
    std::size_t regular = 0;
    for (std::size_t i = 0; i < opts.samples; ++i) {
        double s = (static_cast<double>(i) + 0.5) / static_cast<double>(opts.samples);
        CurvePoint p = point_at_arclength(segment, s * segment.length());
        double x[2] = {p.x, p.y};
        double g = d0;
        bool ok = true;
        for (int j = 1; j <= rep.n_used; ++j) {
            double img[2];
            step(sys, x, img);
            x[0] = img[0];
            x[1] = img[1];
            g *= lam;
            double r = g * (1 + 1e-9); // absorb last-ulp orbit rounding
            if (dist_syn(x, 2) <= r && std::abs(x[0] + x[1] - 1) <= r * sqrt2) {
                ok = false;
                break;
            }
        }
        if (ok) ++regular;
    }
    rep.measured = static_cast<double>(regular) / static_cast<double>(opts.samples);
    rep.satisfied = rep.measured >= rep.bound - rep.slack;
    return rep;
}

Polyline reflect_into_cell(const Polyline& curve, std::uint32_t from_cell,
                           std::uint32_t target_cell) {
    if (from_cell >= 4 || target_cell >= 4)
        throw std::invalid_argument("reflect_into_cell: cell index out of range");
    std::uint32_t flip = from_cell ^ target_cell;
    std::vector<CurvePoint> pts = curve.pts();
    for (auto& v : pts) {
        if (flip & 1u) v.x = 1 - v.x;
        if (flip & 2u) v.y = 1 - v.y;
    }
    return Polyline(std::move(pts));
}

std::string forest_to_csv(const ComponentForest& forest) {
    std::string out = "depth,component,parent,cell,length,r_a\n";
    char buf[160];
    for (std::size_t d = 0; d < forest.levels.size(); ++d) {
        for (std::size_t i = 0; i < forest.levels[d].size(); ++i) {
            const auto& comp = forest.levels[d][i];
            std::snprintf(buf, sizeof buf, "%zu,%zu,", d, i);
            out += buf;
            if (comp.parent != kNoParent) {
                std::snprintf(buf, sizeof buf, "%zu", comp.parent);
                out += buf;
            }
            out += ',';
            if (comp.cell != kNoCell) {
                std::snprintf(buf, sizeof buf, "%u", comp.cell);
                out += buf;
            }
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", comp.curve.length(),
                          range_of_angles(comp.curve));
            out += buf;
        }
    }
    return out;
}

std::string forest_to_json(const ComponentForest& forest) {
    using nlohmann::ordered_json;

    // child index lists per level, keyed by parent index
    std::vector<std::vector<std::vector<std::size_t>>> kids(forest.levels.size());
    for (std::size_t d = 1; d < forest.levels.size(); ++d) {
        kids[d - 1].assign(forest.levels[d - 1].size(), {});
        for (std::size_t i = 0; i < forest.levels[d].size(); ++i)
            kids[d - 1][forest.levels[d][i].parent].push_back(i);
    }

    std::function<ordered_json(std::size_t, std::size_t)> build =
        [&](std::size_t depth, std::size_t idx) {
            const auto& comp = forest.levels[depth][idx];
            ordered_json node;
            node["depth"] = depth;
            node["index"] = idx;
            node["cell"] = comp.cell;
            node["t0"] = comp.t0;
            node["t1"] = comp.t1;
            node["length"] = comp.curve.length();
            node["r_a"] = range_of_angles(comp.curve);
            node["children"] = ordered_json::array();
            if (depth + 1 < forest.levels.size() && depth < kids.size() &&
                idx < kids[depth].size())
                for (std::size_t child : kids[depth][idx]) node["children"].push_back(build(depth + 1, child));
            return node;
        };

    ordered_json doc;
    doc["aborted"] = forest.aborted;
    doc["dropped_slivers"] = forest.dropped_slivers;
    doc["depths"] = forest.levels.size();
    doc["roots"] = ordered_json::array();
    if (!forest.levels.empty())
        for (std::size_t i = 0; i < forest.levels[0].size(); ++i)
            doc["roots"].push_back(build(0, i));
    return doc.dump(2);
}

} // namespace cmllab
