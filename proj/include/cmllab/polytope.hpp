#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmllab/maps.hpp"

namespace cmllab {

// Closed halfspace n . x <= b. Normals are stored unit length, so b reads as
// the signed distance of the boundary plane from the origin.
struct Halfspace {
    std::array<double, kMaxNodes> n{};
    double b = 0;
};

// Monte Carlo sampling sizes for dimensions where exact geometry is off the
// table. The cloud keeps at most kCloudKeep accepted points; volume estimates
// always use the full proposal count.
inline constexpr std::size_t kCloudProposals = 1u << 18;
inline constexpr std::size_t kCloudKeep = 8192;

// Convex subset of [0,1]^m backed by a halfspace system.
//
// For m <= 3 the region also carries its vertex list, enumerated exactly from
// the system (all plane pairs or triples, filtered by feasibility), so areas
// and volumes are closed form. For m = 2 the vertices are kept in hull order.
//
// From m = 4 up the region instead caches a uniform sample cloud drawn by
// rejection from [0,1]^m with the stored seed. Emptiness, volume and clipping
// ratios then become Monte Carlo statements at the stored sample size, and
// derived regions (clips, affine images) reuse the parent's points so that
// piece volumes add up to the parent estimate exactly.
class ConvexRegion {
public:
    // axis-aligned box given by per-coordinate bounds
    static ConvexRegion box(std::size_t m, const std::vector<double>& lo,
                            const std::vector<double>& hi, std::uint64_t seed = 1);
    // box with the same bounds in every coordinate
    static ConvexRegion cube(std::size_t m, double lo, double hi, std::uint64_t seed = 1);
    // m = 2 convex hull of a point set; throws when the hull is degenerate
    static ConvexRegion polygon(const std::vector<std::pair<double, double>>& pts,
                                std::uint64_t seed = 1);
    static ConvexRegion from_halfspaces(std::size_t m, std::vector<Halfspace> hs,
                                        std::uint64_t seed = 1);

    std::size_t m() const { return m_; }
    const std::vector<Halfspace>& halfspaces() const { return hs_; }
    // exact vertices, m <= 3 only (empty for higher dimensions)
    const std::vector<std::array<double, kMaxNodes>>& vertices() const { return verts_; }
    // cached sample cloud, m >= 4 only
    const std::vector<std::array<double, kMaxNodes>>& cloud() const { return cloud_; }
    std::uint64_t seed() const { return seed_; }

    bool empty() const;
    bool contains(const double* x, double tol = 1e-9) const;

    // cell index (bit i = right of x_i = 1/2) when the whole region sits in
    // one closed cell, nullopt otherwise
    std::optional<std::uint32_t> single_cell() const;

    // Intersection with additional halfspaces. Exact re-enumeration for
    // m <= 3; sample filtering (and proportional volume scaling) for m >= 4.
    // The result may be empty; that is a value, not an error.
    ConvexRegion intersect(const std::vector<Halfspace>& cuts) const;

    // Monte Carlo bookkeeping, meaningful for m >= 4
    double mc_volume() const { return mc_volume_; }
    double mc_std_error() const { return mc_se_; }

private:
    ConvexRegion() = default;
    void enumerate_vertices();
    friend ConvexRegion map_region(const LatticeSystem&, const ConvexRegion&, std::uint32_t);

    std::size_t m_ = 0;
    std::vector<Halfspace> hs_;
    std::vector<std::array<double, kMaxNodes>> verts_;
    std::vector<std::array<double, kMaxNodes>> cloud_;
    std::uint64_t seed_ = 1;
    double mc_volume_ = 0;
    double mc_se_ = 0;
};

struct VolumeResult {
    double value = 0;
    double std_error = 0; // zero when the value is exact
};

// m = 2: shoelace over the hull-ordered vertices. m = 3: tetrahedra fanned
// from the centroid over each facet. m >= 4: the stored rejection estimate.
VolumeResult volume(const ConvexRegion& region);

struct CellRegion {
    std::uint32_t cell = 0;
    ConvexRegion region;
};

// Intersections with the 2^m orthant cells, ascending by cell index, empty
// pieces omitted. Piece volumes sum to the parent volume (exactly for the
// shared-sample Monte Carlo dimensions, to rounding for m <= 3). Requires
// region within [0,1]^m.
std::vector<CellRegion> clip_to_cells(const ConvexRegion& region);

// Image of a single-cell piece under the affine branch extension on `cell`.
// Vertices and sample points go through the same branch update the rest of
// the library uses; halfspaces are pulled back through the inverse, so
// membership stays exact in every dimension. Tent variants only. Throws on
// a perturbed map, a cell mismatch, or dimension mismatch.
ConvexRegion map_region(const LatticeSystem& sys, const ConvexRegion& piece, std::uint32_t cell);

struct CenterPointOutcome {
    bool all_cells_hit = false;
    bool center_inside = false;               // meaningful when all_cells_hit
    std::vector<std::uint32_t> missed_cells;  // empty when all_cells_hit
};

// Maps the region, clips the image to cells, and when every cell is hit
// tests whether the center (1/2, ..., 1/2) lies in the image. The underlying
// claim is that all-cells-hit forces the center inside, so a false
// center_inside among all_cells_hit outcomes is a reportable finding.
// Requires a region inside one closed cell.
CenterPointOutcome center_point_check(const LatticeSystem& sys, const ConvexRegion& region);

struct EpsRatioResult {
    double measured = 0;
    double bound = 0;  // m^{-m/2} eps^m
    double slack = 0;  // Monte Carlo 99% two-sided bound; zero when exact
    std::size_t samples = 0;
    bool exact = false;
    bool satisfied = false; // measured >= bound - slack
};

// Volume fraction of the region within distance eps of the diagonal,
// against the floor m^{-m/2} eps^m. Exact strip clipping for m = 2,
// rejection sampling otherwise (deterministic in the region's seed).
// Requires eps > 0 and the center point inside the region.
EpsRatioResult eps_ratio_check(const ConvexRegion& region, double eps,
                               std::size_t mc_samples = 1000000);

// two-sided 99% Hoeffding half-width for a frequency over n samples
double mc_slack_99(std::size_t n);

// vertex list (m <= 3) or halfspace system plus sampling summary (m >= 4)
std::string region_to_json(const ConvexRegion& region);

} // namespace cmllab
