#pragma once
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmllab/maps.hpp"

namespace cmllab {

// Planar curve machinery (m = 2 only). Curves are tracked through the
// lattice update by alternating fold-splitting at the branch lines
// x = kink / y = kink with the one-to-one branch extension on each closed
// cell. Multi-node geometry lives in the polytope module instead.

// Vertex with its parameter on the original root curve (arc-length units of
// the root). Splitting interpolates t, mapping carries it through unchanged,
// so every descendant knows which part of the root it came from.
struct CurvePoint {
    double x = 0;
    double y = 0;
    double t = 0;
};

// Immutable polyline with cached arc length and slope class.
//
// slope_class is +1 when every edge runs along (1,1)/sqrt(2), -1 along
// (1,-1)/sqrt(2), and 0 otherwise. Classification is orientation-blind (a
// reversed segment keeps its class) but rejects direction reversals inside
// one polyline. The tangent tolerance is 1e-9: image vertices of mapped
// pieces carry absolute rounding of a few 1e-16, which deflects measured
// unit tangents of 1e-5-scale edges by up to ~1e-11, so the nominal 1e-12
// would misclassify genuinely straight images. Curvature of the perturbed
// family shows up around 1e-6 per refined edge, well above the tolerance.
// Classification is unreliable below edge lengths of ~1e-6 and such curves
// report class 0.
class Polyline {
public:
    explicit Polyline(std::vector<CurvePoint> pts);

    // two-vertex segment with t running over [0, length]
    static Polyline segment(double x0, double y0, double x1, double y1);
    // vertices with cumulative arc-length parameters starting at 0
    static Polyline from_points(const std::vector<std::pair<double, double>>& xy);

    const std::vector<CurvePoint>& pts() const { return pts_; }
    std::size_t edges() const { return pts_.size() - 1; }
    double length() const { return length_; }
    int slope_class() const { return slope_class_; }
    double t_lo() const { return pts_.front().t; }
    double t_hi() const { return pts_.back().t; }

private:
    std::vector<CurvePoint> pts_;
    double length_ = 0;
    int slope_class_ = 0;
};

// Point at arc length s from the start, clamped to [0, length].
CurvePoint point_at_arclength(const Polyline& curve, double s);

// O(E^2) proper-intersection scan used by tests to audit outputs; inputs
// are trusted to be simple.
bool is_simple(const Polyline& curve);

// Pieces shorter than this are dropped by split_at_folds (counted, not kept).
constexpr double kSliverLength = 1e-15;

// cell marker for the forest root, which may span several cells
constexpr std::uint32_t kNoCell = 0xffffffffu;

// minimum input length for growth_step
constexpr double kGrowthLength = 0x1.0p-16;

// minimum segment length for the regular-point tally
constexpr double kRegularLength = 0x1.0p-8;

struct CellPiece {
    Polyline curve;
    std::uint32_t cell = 0; // bit i set = coordinate i on the right branch
};

struct SplitResult {
    std::vector<CellPiece> pieces; // in order along the input curve
    std::size_t dropped = 0;       // slivers below kSliverLength
};

// Cuts the curve at the fold lines x = kink and y = kink into maximal
// single-cell pieces. Crossing vertices get the fold coordinate exactly
// (the other coordinate and t by linear interpolation) and appear in both
// adjacent pieces, so piece lengths sum to the input length up to rounding.
// Sub-edges are assigned to the closed cell of their midpoint; a vertex
// sitting exactly on a fold therefore separates pieces only when the curve
// actually changes side there.
SplitResult split_at_folds(const Polyline& curve, double kink = 0.5);

// Image of a single-cell piece under the branch extension on `cell`.
// Tent variants map vertices only (the branch update is affine, so straight
// edges stay exact). The perturbed family first refines the piece so
// consecutive vertices are at most refine_h apart, bounding the chord error
// of the curved image. Throws std::invalid_argument when a vertex lies
// outside the closed cell.
Polyline map_curve(const LatticeSystem& sys, const Polyline& piece, std::uint32_t cell,
                   double refine_h = 1e-4);

struct CurveComponent {
    Polyline curve;
    std::uint32_t cell = 0;  // closed cell this component lies in
    std::size_t parent = 0;  // index into the previous depth's component list
    double t0 = 0, t1 = 0;   // root parameter interval covered by this component
};

struct DepthStats {
    std::size_t components = 0;
    double total_length = 0;
    double max_range_of_angles = 0;
};

struct ComponentForest {
    // levels[k] holds the single-cell pieces of the k-th image; level 0 is
    // the split of the root itself (its pieces carry no parent)
    std::vector<std::vector<CurveComponent>> levels;
    std::vector<DepthStats> stats;
    std::size_t dropped_slivers = 0;
    bool aborted = false; // component cap hit; forest is a valid prefix
};

struct IterateOptions {
    std::size_t component_cap = 1000000;
    double refine_h = 1e-4;
};

// Alternates split_at_folds and map_curve `depth` times starting from a
// simple root inside [0,1]^2. Root parameter intervals of the components at
// each depth partition the root up to dropped slivers.
ComponentForest iterate_curve(const LatticeSystem& sys, const Polyline& root, int depth,
                              const IterateOptions& opts = {});

// Largest Euclidean difference between two edge unit tangents, in [0, 2].
// Equals 2 sin(theta/2) for the widest tangent pair angle theta.
double range_of_angles(const Polyline& curve);

// true when some edge meets {x = y} or {x + y = 1} (touching counts)
bool meets_diagonals(const Polyline& curve);

// Guaranteed two-step relative length gain for slope +-1 segments:
// lambda^2/(lambda+1) - 1 with lambda = 2(1-2c).
double growth_excess(double c);

enum class GrowthKind { DiagonalHit, Grown, Fail };

// DiagonalHit: subcurve is an image edge meeting the diagonal lines, found
//   after `depth` applications (0 = the input itself already meets them).
// Grown: subcurve is a single-cell image piece at depth 1 or 2 with
//   length >= (1 + growth_excess(c) - tol) * input length; growth_factor is
//   the measured ratio.
// Fail: neither case materialized (not expected for tent systems); trace
//   carries the two-level forest for inspection and is empty otherwise.
struct GrowthOutcome {
    GrowthKind kind = GrowthKind::Fail;
    std::optional<Polyline> subcurve;
    int depth = 0;
    double growth_factor = 0;
    ComponentForest trace;
};

// One round of the grow-or-hit dichotomy for a single-cell slope +-1 curve
// of length >= kGrowthLength (perturbed inputs instead need a slope +-1
// chord and range_of_angles <= 16 * certified C2 bound * length). Examines
// the first image, and when it splits into two short pieces, the images of
// both pieces. Throws std::invalid_argument on short or bent inputs.
GrowthOutcome growth_step(const LatticeSystem& sys, const Polyline& curve, double tol = 1e-6);

struct PullbackHit {
    double t0 = 0, t1 = 0; // root parameter interval
    int depth = 0;         // first depth at which the interval sits within eps
};

// Root intervals whose depth-d images lie within dist_syn <= eps, claimed at
// the first depth that reaches the band (later depths only claim what is
// still free, so the returned intervals are pairwise disjoint). Sorted by
// (depth, t0).
std::vector<PullbackHit> diagonal_pullback(const ComponentForest& forest, double eps);

struct RegularPointOptions {
    std::size_t samples = 100000; // dense sample count M
    double gamma = 0x1.0p-11;     // target band; the default sits at an eighth
                                  // of kRegularLength, where the bound below
                                  // stays above 1/2
};

struct RegularPointReport {
    double measured = 0;    // fraction of samples regular through depth n_used
    double bound = 0;       // 1 - sum_{j=1..N} lambda^j d0 / kRegularLength
    int n_used = 0;
    double d_syn = 0;       // common diagonal distance of the segment
    std::size_t samples = 0;
    double slack = 0;       // sampling slack 3/sqrt(M)
    bool satisfied = false; // measured >= bound - slack
};

// Regularity tally for a slope +1 single-cell StandardTent segment of
// length >= kRegularLength at constant distance d0 > 0 from the diagonal.
// A sample is regular when none of its first N iterates enters the shrinking
// core band G~ at scale lambda^j d0 (within the band around the diagonal and
// within gamma_j * sqrt(2) of x + y = 1 in coordinate form). N defaults to
// floor(log_lambda(gamma / d0)), clamped at 0. Regular samples provably keep
// the exact per-step factor lambda on their diagonal distance through depth
// N. The G~ radius is inflated by a relative 1e-9 so boundary samples whose
// orbit distance differs from lambda^j d0 by last-ulp rounding still count
// as excluded; a failed bound is reported, never thrown.
RegularPointReport regular_point_ratio(const LatticeSystem& sys, const Polyline& segment,
                                       std::optional<int> n = std::nullopt,
                                       const RegularPointOptions& opts = {});

// Reflects coordinates across x = 1/2 for every bit where the two cells
// differ. For branch-symmetric maps (standard tent, even perturbations) the
// reflected curve has the same image as the original, which lets a
// multiply-folded piece be replaced by one single-cell representative.
Polyline reflect_into_cell(const Polyline& curve, std::uint32_t from_cell,
                           std::uint32_t target_cell);

// flat rows: depth,component,parent,cell,length,r_a (depth-0 rows: parent empty)
std::string forest_to_csv(const ComponentForest& forest);
// nested JSON document following parent links from the root
std::string forest_to_json(const ComponentForest& forest);

} // namespace cmllab
