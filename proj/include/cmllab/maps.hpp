#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmllab/smallmat.hpp"

namespace cmllab {

// Construction/validation failures (bad map parameters, asymmetric coupling,
// malformed config). The CLI maps this class to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A coordinate left [0,1] while stepping a system whose update weights are
// not all nonnegative. CLI exit code 3.
struct EscapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MapKind { StandardTent, GeneralTent, PerturbedTent };

// Sine-basis perturbation g(x) = sum_{k=1..K} a_k sin(k pi x), K <= 8.
// The basis vanishes at both endpoints, which the range certification uses.
struct PerturbationSpec {
    std::vector<double> coeffs; // a_1 .. a_K

    double eval(double x) const;
    double eval_derivative(double x) const;
    double c0_bound() const; // sum |a_k|            >= sup|g|
    double c1_bound() const; // sum |a_k| k pi       >= sup|g'|
    double c2_bound() const; // sum |a_k| (1 + k pi + (k pi)^2), certified C2 norm
};

// Caps enforced when a map is built. Tests may relax eta or disable the
// range check explicitly; the defaults reject anything outside the family
// the long-orbit claims are calibrated for.
struct MapOptions {
    double alpha_max = 0.05;    // |alpha_i| cap, general tent
    double s0_max = 0.1;        // flattening cap, perturbed tent
    double eta = 1e-3;          // cap for the certified C2 bound of g
    bool enforce_range = true;  // require f([0,1]) within [0,1]
};

// One-dimensional interior map. Piecewise throughout: the left branch is
// taken for x < kink, the right branch for x >= kink.
class InteriorMap1D {
public:
    static InteriorMap1D standard_tent();
    static InteriorMap1D general_tent(double alpha1, double alpha2, MapOptions opt = {});
    static InteriorMap1D perturbed_tent(double s0, PerturbationSpec g, MapOptions opt = {});

    MapKind kind() const { return kind_; }
    double kink() const { return kink_; }

    double eval(double x) const;            // domain-checked on [0,1]
    double eval_derivative(double x) const; // error exactly at the kink

    // branch-forced variants (0 = left branch, 1 = right); used by the
    // curve and region machinery to apply the one-to-one extension on a
    // closed half-cell
    double eval_on_branch(double x, int branch) const;
    double derivative_on_branch(double x, int branch) const;

    double slope_min() const { return nu_min_; } // certified inf |f'|
    double slope_max() const { return nu_max_; } // certified sup |f'|
    // certified perturbation bounds; zero for the tent variants
    double c1_perturbation() const { return g_c1_; }
    double c2_perturbation() const { return g_c2_; }
    bool range_certified() const { return range_ok_; }

    double alpha1() const { return alpha1_; }
    double alpha2() const { return alpha2_; }
    double s0() const { return s0_; }
    const PerturbationSpec& perturbation() const { return g_; }

private:
    InteriorMap1D() = default;

    MapKind kind_ = MapKind::StandardTent;
    double kink_ = 0.5;
    double alpha1_ = 0, alpha2_ = 0;     // general tent
    double s0_ = 0, slope_s_ = 2;        // perturbed tent: f0 slope 2 - s0
    double right_factor_ = 1;            // general tent right-branch scale
    PerturbationSpec g_;
    double g_c1_ = 0, g_c2_ = 0;
    double nu_min_ = 2, nu_max_ = 2;
    bool range_ok_ = true;
};

double eval_map(const InteriorMap1D& map, double x);
double eval_derivative(const InteriorMap1D& map, double x);

// Symmetric coupling template with zero row sums. Only the off-diagonal
// entries are applied (the update uses the graph form below), so the
// diagonal is implied by the rows summing to zero.
struct CouplingSpec {
    std::size_t m = 2;
    SmallMat A;

    static CouplingSpec all_to_all(std::size_t m);
    static CouplingSpec path(std::size_t m);
    // validates m, symmetry (1e-12), and row sums (1e-12)
    static CouplingSpec from_matrix(const SmallMat& a);
};

// Lattice of m coupled copies of one interior map,
//   x(n+1) = (I + cA) f(x(n)),
// applied row-wise in graph form: out_i = f_i + c sum_j A_ij (f_j - f_i).
// That form keeps equal-coordinate states equal bit-for-bit.
struct LatticeSystem {
    InteriorMap1D map;
    CouplingSpec coupling;
    double c = 0;
    bool nonneg_weights = false; // all entries of I + cA nonnegative
    double coupling_norm = 0;    // spectral norm of A
    std::uint64_t content_hash = 0;

    static LatticeSystem make(InteriorMap1D map, CouplingSpec coupling, double c);

    std::size_t m() const { return coupling.m; }
    SmallMat update_matrix() const; // I + cA with the implied diagonal
};

// One synchronous update. With nonneg_weights the image is clamped into
// [0,1] (a guard against last-ulp drift only; the exact image cannot leave).
// Without it, a coordinate outside [0,1] raises EscapeError.
// Off-diagonal states whose output pair lands exactly on a reflection line
// (out_j == s - out_i with s representable) are displaced by one ulp; this
// breaks a rounding-tie trap that would otherwise pin orbits to fold lines
// and absorb them into the diagonal. The diagonal itself and c = 0 are
// exempt, so equal coordinates still map bit-exactly and uncoupled nodes see
// the bare map. Deterministic: replays are bit-identical.
void step(const LatticeSystem& sys, const double* x, double* out);
std::vector<double> step(const LatticeSystem& sys, const std::vector<double>& x);

// Branch-forced update on the closed cell given by `cell` (bit i = right
// branch for coordinate i). No clamping: this is the affine/one-to-one
// branch extension used by the curve and region modules.
void step_in_cell(const LatticeSystem& sys, const double* x, std::uint32_t cell, double* out);

// bit i set iff x_i >= kink
std::uint32_t branch_signature(const LatticeSystem& sys, const double* x);
std::uint32_t branch_signature(const LatticeSystem& sys, const std::vector<double>& x);

// (I + cA) diag(f'(x_i)); error names every coordinate sitting on the kink
SmallMat jacobian(const LatticeSystem& sys, const double* x);
double jacobian_det(const LatticeSystem& sys, const double* x);

} // namespace cmllab
