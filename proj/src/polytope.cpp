#include "cmllab/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "cmllab/orbit.hpp"
#include "cmllab/rng.hpp"
#include "cmllab/smallmat.hpp"

namespace cmllab {

namespace {

constexpr double kFeasTol = 1e-9;   // membership slack for enumerated points
constexpr double kPivotTol = 1e-12; // plane systems flatter than this are skipped
constexpr double kFaceTol = 1e-8;   // vertex-on-facet assignment

using Point = std::array<double, kMaxNodes>;

double dot(const Point& a, const double* b, std::size_t m) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += a[i] * b[i];
    return s;
}

Halfspace normalized(Halfspace h, std::size_t m) {
    double n2 = 0;
    for (std::size_t i = 0; i < m; ++i) n2 += h.n[i] * h.n[i];
    double len = std::sqrt(n2);
    if (len < kPivotTol) throw std::invalid_argument("halfspace has a zero normal");
    for (std::size_t i = 0; i < m; ++i) h.n[i] /= len;
    for (std::size_t i = m; i < kMaxNodes; ++i) h.n[i] = 0;
    h.b /= len;
    return h;
}

bool same_plane(const Halfspace& a, const Halfspace& b, std::size_t m) {
    if (std::abs(a.b - b.b) > 1e-9) return false;
    for (std::size_t i = 0; i < m; ++i)
        if (std::abs(a.n[i] - b.n[i]) > 1e-9) return false;
    return true;
}

// dense LU solve, m <= 8; returns false on a flat pivot
bool solve(std::size_t m, double a[kMaxNodes][kMaxNodes], double* rhs) {
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < kPivotTol) return false;
        if (piv != col) {
            for (std::size_t k = 0; k < m; ++k) std::swap(a[piv][k], a[col][k]);
            std::swap(rhs[piv], rhs[col]);
        }
        for (std::size_t r = col + 1; r < m; ++r) {
            double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < m; ++k) a[r][k] -= f * a[col][k];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t col = m; col-- > 0;) {
        for (std::size_t k = col + 1; k < m; ++k) rhs[col] -= a[col][k] * rhs[k];
        rhs[col] /= a[col][col];
    }
    return true;
}

// hull order for a set of points in convex position
void order_ccw(std::vector<Point>& pts) {
    if (pts.size() < 3) return;
    double cx = 0, cy = 0;
    for (const auto& p : pts) {
        cx += p[0];
        cy += p[1];
    }
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
    std::sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) {
        return std::atan2(a[1] - cy, a[0] - cx) < std::atan2(b[1] - cy, b[0] - cx);
    });
}

std::vector<Halfspace> cell_planes(std::size_t m, std::uint32_t cell) {
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < m; ++i) {
        Halfspace h;
        if ((cell >> i) & 1u) {
            h.n[i] = -1;
            h.b = -0.5;
        } else {
            h.n[i] = 1;
            h.b = 0.5;
        }
        hs.push_back(h);
    }
    return hs;
}

double shoelace_area(const std::vector<Point>& v) {
    if (v.size() < 3) return 0;
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& p = v[i];
        const Point& q = v[(i + 1) % v.size()];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return std::abs(s) / 2;
}

double facet_fan_volume(const std::vector<Halfspace>& hs, const std::vector<Point>& verts) {
    if (verts.size() < 4) return 0;
    Point g{};
    for (const auto& v : verts)
        for (std::size_t i = 0; i < 3; ++i) g[i] += v[i];
    for (std::size_t i = 0; i < 3; ++i) g[i] /= static_cast<double>(verts.size());

    double vol = 0;
    for (const auto& h : hs) {
        std::vector<Point> face;
        for (const auto& v : verts)
            if (std::abs(dot(v, h.n.data(), 3) - h.b) <= kFaceTol) face.push_back(v);
        if (face.size() < 3) continue;

        // planar basis, then angular order around the face mean
        std::size_t axis = 0;
        for (std::size_t i = 1; i < 3; ++i)
            if (std::abs(h.n[i]) < std::abs(h.n[axis])) axis = i;
        double u[3] = {-h.n[axis] * h.n[0], -h.n[axis] * h.n[1], -h.n[axis] * h.n[2]};
        u[axis] += 1;
        double ul = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        for (double& c : u) c /= ul;
        double w[3] = {h.n[1] * u[2] - h.n[2] * u[1], h.n[2] * u[0] - h.n[0] * u[2],
                       h.n[0] * u[1] - h.n[1] * u[0]};
        Point fc{};
        for (const auto& p : face)
            for (std::size_t i = 0; i < 3; ++i) fc[i] += p[i];
        for (std::size_t i = 0; i < 3; ++i) fc[i] /= static_cast<double>(face.size());
        std::sort(face.begin(), face.end(), [&](const Point& a, const Point& b) {
            double au = 0, aw = 0, bu = 0, bw = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                au += (a[i] - fc[i]) * u[i];
                aw += (a[i] - fc[i]) * w[i];
                bu += (b[i] - fc[i]) * u[i];
                bw += (b[i] - fc[i]) * w[i];
            }
            return std::atan2(aw, au) < std::atan2(bw, bu);
        });

        for (std::size_t i = 1; i + 1 < face.size(); ++i) {
            double e1[3], e2[3], e3[3];
            for (std::size_t k = 0; k < 3; ++k) {
                e1[k] = face[0][k] - g[k];
                e2[k] = face[i][k] - g[k];
                e3[k] = face[i + 1][k] - g[k];
            }
            double det = e1[0] * (e2[1] * e3[2] - e2[2] * e3[1]) -
                         e1[1] * (e2[0] * e3[2] - e2[2] * e3[0]) +
                         e1[2] * (e2[0] * e3[1] - e2[1] * e3[0]);
            vol += std::abs(det) / 6;
        }
    }
    return vol;
}

} // namespace

void ConvexRegion::enumerate_vertices() {
    verts_.clear();
    const std::size_t h = hs_.size();
    auto push_candidate = [&](const Point& p) {
        if (!contains(p.data(), kFeasTol)) return;
        for (const auto& q : verts_) {
            double d2 = 0;
            for (std::size_t i = 0; i < m_; ++i) d2 += (p[i] - q[i]) * (p[i] - q[i]);
            if (d2 < 1e-20) return;
        }
        verts_.push_back(p);
    };

    if (m_ == 2) {
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = i + 1; j < h; ++j) {
                double det = hs_[i].n[0] * hs_[j].n[1] - hs_[i].n[1] * hs_[j].n[0];
                if (std::abs(det) < kPivotTol) continue;
                Point p{};
                p[0] = (hs_[i].b * hs_[j].n[1] - hs_[j].b * hs_[i].n[1]) / det;
                p[1] = (hs_[i].n[0] * hs_[j].b - hs_[j].n[0] * hs_[i].b) / det;
                push_candidate(p);
            }
        }
        order_ccw(verts_);
    } else if (m_ == 3) {
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = i + 1; j < h; ++j) {
                for (std::size_t k = j + 1; k < h; ++k) {
                    double a[kMaxNodes][kMaxNodes];
                    double rhs[kMaxNodes] = {hs_[i].b, hs_[j].b, hs_[k].b};
                    for (std::size_t col = 0; col < 3; ++col) {
                        a[0][col] = hs_[i].n[col];
                        a[1][col] = hs_[j].n[col];
                        a[2][col] = hs_[k].n[col];
                    }
                    if (!solve(3, a, rhs)) continue;
                    Point p{};
                    p[0] = rhs[0];
                    p[1] = rhs[1];
                    p[2] = rhs[2];
                    push_candidate(p);
                }
            }
        }
    }
}

ConvexRegion ConvexRegion::from_halfspaces(std::size_t m, std::vector<Halfspace> hs,
                                           std::uint64_t seed) {
    if (m < 2 || m > kMaxNodes) throw std::invalid_argument("region dimension out of range");
    ConvexRegion r;
    r.m_ = m;
    r.seed_ = seed;
    for (auto& h : hs) {
        Halfspace nh = normalized(h, m);
        bool dup = false;
        for (const auto& e : r.hs_) dup = dup || same_plane(e, nh, m);
        if (!dup) r.hs_.push_back(nh);
    }

    if (m <= 3) {
        r.enumerate_vertices();
        for (const auto& v : r.verts_)
            for (std::size_t i = 0; i < m; ++i)
                if (v[i] < -kFeasTol || v[i] > 1 + kFeasTol)
                    throw std::invalid_argument("region leaves the unit cube");
        return r;
    }

    Rng rng(seed);
    std::size_t accepted = 0;
    for (std::size_t trial = 0; trial < kCloudProposals; ++trial) {
        Point p{};
        for (std::size_t i = 0; i < m; ++i) p[i] = rng.uniform();
        bool in = true;
        for (const auto& hsp : r.hs_) in = in && dot(p, hsp.n.data(), m) <= hsp.b;
        if (!in) continue;
        ++accepted;
        if (r.cloud_.size() < kCloudKeep) r.cloud_.push_back(p);
    }
    double p = static_cast<double>(accepted) / static_cast<double>(kCloudProposals);
    r.mc_volume_ = p;
    r.mc_se_ = std::sqrt(p * (1 - p) / static_cast<double>(kCloudProposals));
    return r;
}

ConvexRegion ConvexRegion::box(std::size_t m, const std::vector<double>& lo,
                               const std::vector<double>& hi, std::uint64_t seed) {
    if (lo.size() != m || hi.size() != m) throw std::invalid_argument("box bounds mismatch");
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(lo[i] < hi[i]) || lo[i] < -1e-12 || hi[i] > 1 + 1e-12)
            throw std::invalid_argument("box bounds must be ordered within [0,1]");
        Halfspace upper, lower;
        upper.n[i] = 1;
        upper.b = hi[i];
        lower.n[i] = -1;
        lower.b = -lo[i];
        hs.push_back(upper);
        hs.push_back(lower);
    }
    return from_halfspaces(m, std::move(hs), seed);
}

ConvexRegion ConvexRegion::cube(std::size_t m, double lo, double hi, std::uint64_t seed) {
    return box(m, std::vector<double>(m, lo), std::vector<double>(m, hi), seed);
}

ConvexRegion ConvexRegion::polygon(const std::vector<std::pair<double, double>>& pts,
                                   std::uint64_t seed) {
    // monotone chain; strictly convex turns only, so collinear inputs shrink
    std::vector<std::pair<double, double>> p = pts;
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) throw std::invalid_argument("polygon needs three distinct points");
    auto cross = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                    const std::pair<double, double>& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    std::size_t lower = k + 1;
    for (std::size_t i = p.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) throw std::invalid_argument("polygon hull is degenerate");

    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        auto [x0, y0] = hull[i];
        auto [x1, y1] = hull[(i + 1) % hull.size()];
        Halfspace h;
        h.n[0] = y1 - y0; // outward normal of a CCW edge
        h.n[1] = x0 - x1;
        h.b = h.n[0] * x0 + h.n[1] * y0;
        hs.push_back(h);
    }
    return from_halfspaces(2, std::move(hs), seed);
}

bool ConvexRegion::empty() const { return m_ <= 3 ? verts_.empty() : cloud_.empty(); }

bool ConvexRegion::contains(const double* x, double tol) const {
    for (const auto& h : hs_) {
        double s = 0;
        for (std::size_t i = 0; i < m_; ++i) s += h.n[i] * x[i];
        if (s > h.b + tol) return false;
    }
    return true;
}

std::optional<std::uint32_t> ConvexRegion::single_cell() const {
    const auto& pts = m_ <= 3 ? verts_ : cloud_;
    if (pts.empty()) return std::nullopt;
    Point mean{};
    for (const auto& p : pts)
        for (std::size_t i = 0; i < m_; ++i) mean[i] += p[i];
    std::uint32_t cell = 0;
    for (std::size_t i = 0; i < m_; ++i)
        if (mean[i] / static_cast<double>(pts.size()) >= 0.5) cell |= 1u << i;
    for (const auto& p : pts)
        for (std::size_t i = 0; i < m_; ++i) {
            bool right = (cell >> i) & 1u;
            if (right ? p[i] < 0.5 - kFeasTol : p[i] > 0.5 + kFeasTol) return std::nullopt;
        }
    return cell;
}

ConvexRegion ConvexRegion::intersect(const std::vector<Halfspace>& cuts) const {
    ConvexRegion r;
    r.m_ = m_;
    r.seed_ = seed_;
    r.hs_ = hs_;
    for (const auto& cut : cuts) {
        Halfspace nh = normalized(cut, m_);
        bool dup = false;
        for (const auto& e : r.hs_) dup = dup || same_plane(e, nh, m_);
        if (!dup) r.hs_.push_back(nh);
    }

    if (m_ <= 3) {
        r.enumerate_vertices();
        return r;
    }
    for (const auto& p : cloud_) {
        bool in = true;
        for (const auto& cut : cuts) in = in && dot(p, cut.n.data(), m_) <= cut.b;
        if (in) r.cloud_.push_back(p);
    }
    double frac = cloud_.empty()
                      ? 0.0
                      : static_cast<double>(r.cloud_.size()) / static_cast<double>(cloud_.size());
    r.mc_volume_ = mc_volume_ * frac;
    double fse = cloud_.empty() ? 0.0
                                : std::sqrt(frac * (1 - frac) / static_cast<double>(cloud_.size()));
    r.mc_se_ = std::sqrt(mc_se_ * frac * (mc_se_ * frac) + mc_volume_ * fse * (mc_volume_ * fse));
    return r;
}

VolumeResult volume(const ConvexRegion& region) {
    if (region.m() == 2) return {shoelace_area(region.vertices()), 0.0};
    if (region.m() == 3) return {facet_fan_volume(region.halfspaces(), region.vertices()), 0.0};
    return {region.mc_volume(), region.mc_std_error()};
}

std::vector<CellRegion> clip_to_cells(const ConvexRegion& region) {
    std::vector<CellRegion> out;
    const std::uint32_t cells = 1u << region.m();
    for (std::uint32_t cell = 0; cell < cells; ++cell) {
        ConvexRegion piece = region.intersect(cell_planes(region.m(), cell));
        if (piece.empty()) continue;
        out.push_back({cell, std::move(piece)});
    }
    return out;
}

ConvexRegion map_region(const LatticeSystem& sys, const ConvexRegion& piece, std::uint32_t cell) {
    const std::size_t m = sys.m();
    if (piece.m() != m) throw std::invalid_argument("map_region: dimension mismatch");
    if (cell >= (1u << m)) throw std::invalid_argument("map_region: cell index out of range");
    if (sys.map.kind() == MapKind::PerturbedTent)
        throw std::invalid_argument("map_region: affine branch images need a tent map");

    const auto& pts = piece.m() <= 3 ? piece.vertices() : piece.cloud();
    for (const auto& v : pts)
        for (std::size_t i = 0; i < m; ++i) {
            bool right = (cell >> i) & 1u;
            if (right ? v[i] < 0.5 - kFeasTol : v[i] > 0.5 + kFeasTol)
                throw std::invalid_argument("map_region: region leaves the stated cell");
        }

    // branch update as an affine map x' = M x + d
    SmallMat u = sys.update_matrix();
    double slope[kMaxNodes], off[kMaxNodes];
    for (std::size_t i = 0; i < m; ++i) {
        int branch = static_cast<int>((cell >> i) & 1u);
        slope[i] = sys.map.derivative_on_branch(0.25, branch);
        off[i] = sys.map.eval_on_branch(0.0, branch);
    }
    double d[kMaxNodes];
    for (std::size_t i = 0; i < m; ++i) {
        d[i] = 0;
        for (std::size_t j = 0; j < m; ++j) d[i] += u.at(i, j) * off[j];
    }

    ConvexRegion img;
    img.m_ = m;
    img.seed_ = piece.seed();

    for (const auto& h : piece.halfspaces()) {
        // pull the constraint back through the inverse: solve M^T y = n
        double a[kMaxNodes][kMaxNodes];
        double y[kMaxNodes];
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c2 = 0; c2 < m; ++c2) a[r][c2] = u.at(c2, r) * slope[r];
            y[r] = h.n[r];
        }
        if (!solve(m, a, y)) throw std::runtime_error("map_region: branch map is singular");
        Halfspace nh;
        double bd = h.b;
        for (std::size_t i = 0; i < m; ++i) {
            nh.n[i] = y[i];
            bd += y[i] * d[i];
        }
        nh.b = bd;
        img.hs_.push_back(normalized(nh, m));
    }

    auto map_point = [&](const Point& v) {
        Point w{};
        step_in_cell(sys, v.data(), cell, w.data());
        return w;
    };
    if (m <= 3) {
        for (const auto& v : piece.vertices()) img.verts_.push_back(map_point(v));
        if (m == 2) order_ccw(img.verts_);
    } else {
        for (const auto& v : piece.cloud()) img.cloud_.push_back(map_point(v));
        double detm = std::abs(mat_det(u));
        for (std::size_t i = 0; i < m; ++i) detm *= std::abs(slope[i]);
        img.mc_volume_ = piece.mc_volume() * detm;
        img.mc_se_ = piece.mc_std_error() * detm;
    }
    return img;
}

CenterPointOutcome center_point_check(const LatticeSystem& sys, const ConvexRegion& region) {
    std::optional<std::uint32_t> cell = region.single_cell();
    if (!cell)
        throw std::invalid_argument("center_point_check: region must sit in one closed cell");

    ConvexRegion image = map_region(sys, region, *cell);
    std::vector<CellRegion> pieces = clip_to_cells(image);

    CenterPointOutcome out;
    const std::uint32_t cells = 1u << sys.m();
    if (pieces.size() == cells) {
        out.all_cells_hit = true;
        double center[kMaxNodes];
        for (std::size_t i = 0; i < sys.m(); ++i) center[i] = 0.5;
        out.center_inside = image.contains(center);
        return out;
    }
    std::size_t at = 0;
    for (std::uint32_t c = 0; c < cells; ++c) {
        if (at < pieces.size() && pieces[at].cell == c) {
            ++at;
            continue;
        }
        out.missed_cells.push_back(c);
    }
    return out;
}

double mc_slack_99(std::size_t n) {
    if (n == 0) return 1;
    return std::sqrt(std::log(200.0) / (2 * static_cast<double>(n)));
}

EpsRatioResult eps_ratio_check(const ConvexRegion& region, double eps, std::size_t mc_samples) {
    if (eps <= 0) throw std::invalid_argument("eps_ratio_check: eps must be positive");
    const std::size_t m = region.m();
    double center[kMaxNodes];
    for (std::size_t i = 0; i < m; ++i) center[i] = 0.5;
    if (!region.contains(center))
        throw std::invalid_argument("eps_ratio_check: center point must lie in the region");

    EpsRatioResult out;
    out.bound = std::pow(static_cast<double>(m), -static_cast<double>(m) / 2) *
                std::pow(eps, static_cast<double>(m));

    if (m == 2) {
        // the band dist <= eps is the strip |x - y| <= eps sqrt(2)
        double inv = 1 / std::sqrt(2.0);
        Halfspace plus, minus;
        plus.n = {inv, -inv};
        plus.b = eps;
        minus.n = {-inv, inv};
        minus.b = eps;
        double denom = volume(region).value;
        if (denom <= 0) throw std::invalid_argument("eps_ratio_check: degenerate region");
        out.measured = volume(region.intersect({plus, minus})).value / denom;
        out.exact = true;
        out.satisfied = out.measured >= out.bound;
        return out;
    }

    std::size_t kept = 0, in_band = 0;
    if (m == 3) {
        Point lo{}, hi{};
        lo.fill(1);
        for (const auto& v : region.vertices())
            for (std::size_t i = 0; i < 3; ++i) {
                lo[i] = std::min(lo[i], v[i]);
                hi[i] = std::max(hi[i], v[i]);
            }
        Rng rng = Rng::stream(region.seed(), 0xd1a5u);
        for (std::size_t t = 0; t < mc_samples; ++t) {
            double p[3];
            for (std::size_t i = 0; i < 3; ++i) p[i] = rng.uniform(lo[i], hi[i]);
            if (!region.contains(p, 0.0)) continue;
            ++kept;
            if (dist_syn(p, 3) <= eps) ++in_band;
        }
    } else {
        for (const auto& p : region.cloud()) {
            ++kept;
            if (dist_syn(p.data(), m) <= eps) ++in_band;
        }
    }
    if (kept == 0) throw std::runtime_error("eps_ratio_check: no interior samples");
    out.measured = static_cast<double>(in_band) / static_cast<double>(kept);
    out.samples = kept;
    out.slack = mc_slack_99(kept);
    out.satisfied = out.measured >= out.bound - out.slack;
    return out;
}

std::string region_to_json(const ConvexRegion& region) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["m"] = region.m();
    if (region.m() <= 3) {
        ordered_json verts = ordered_json::array();
        for (const auto& v : region.vertices()) {
            ordered_json row = ordered_json::array();
            for (std::size_t i = 0; i < region.m(); ++i) row.push_back(v[i]);
            verts.push_back(row);
        }
        doc["vertices"] = verts;
    } else {
        ordered_json hs = ordered_json::array();
        for (const auto& h : region.halfspaces()) {
            ordered_json row;
            ordered_json n = ordered_json::array();
            for (std::size_t i = 0; i < region.m(); ++i) n.push_back(h.n[i]);
            row["n"] = n;
            row["b"] = h.b;
            hs.push_back(row);
        }
        doc["halfspaces"] = hs;
        doc["seed"] = region.seed();
        doc["cloud_size"] = region.cloud().size();
        doc["mc_volume"] = region.mc_volume();
        doc["mc_std_error"] = region.mc_std_error();
    }
    return doc.dump(2);
}

} // namespace cmllab
