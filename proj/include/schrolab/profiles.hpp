// profiles.hpp
//
// Initial-data Fourier profiles for the complex-time Schrodinger experiments
// and their L^2 / H^s norms.  Profiles are symbolic: every evaluator
// (norm quadrature, propagator, maximal sweep) picks its own resolution.
//
// Norm convention (Plancherel with the 2*pi on the frequency side):
//   ||f||_{H^s}^2 = (2 pi)^{-d} \int (1 + |xi|^2)^s |fhat(xi)|^2 dxi.

#pragma once

#include "schrolab/quadrature.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace schrolab {

using cplx = std::complex<double>;
using quad::Interval;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// -----------------------------------------------------------------------------
// Model parameters
// -----------------------------------------------------------------------------

struct ModelParams {
    int d = 2;
    double gamma = 2.0;
    double R = 1.0;
    double s = 0.0;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// -----------------------------------------------------------------------------
// Bumps
// -----------------------------------------------------------------------------

// exp(-1/(1-u^2)) on (-1, 1), zero elsewhere.
double mollifier(double u);

// \int_{-1}^{1} mollifier(u) du, computed once by tanh-sinh quadrature.
double mollifier_integral();

// Canonical one-dimensional bump: normalization * mollifier((x-center)/width).
struct Bump1D {
    double center = 0.0;
    double width = 1.0;
    double normalization = 1.0;

    // Unit-integral bump on [center - width, center + width].
    static Bump1D canonical(double center = 0.0, double width = 1.0);

    double operator()(double x) const
    {
        return normalization * mollifier((x - center) / width);
    }
    Interval support() const { return {center - width, center + width}; }
};

// Smooth 0 -> 1 transition on [0, 1] built from the cumulative integral of the
// mollifier.  Flat (all derivatives zero) at both ends.
double smooth_step(double x);

// Surface area of the unit sphere in R^d.
double sphere_area(int d);

// Radial bump: 1 on {1/2 <= |xi| <= 2}, 0 outside {inner <= |xi| <= outer}.
struct RadialBump {
    double inner = 1.0 / 3.0;
    double outer = 3.0;

    double profile(double r) const;
    double operator()(std::span<const double> xi) const;
};

// -----------------------------------------------------------------------------
// Counterexample parameters (the Case 3 scales)
// -----------------------------------------------------------------------------

struct CounterexampleConstants {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
    double delta0 = 0.0;
    double eps0 = 0.01;
    // Main-term calibration constant C_{delta0}; see counterexample.hpp.
    double c_delta0 = 0.0;

    static CounterexampleConstants defaults(int d, double gamma);
};

struct CounterexampleParams {
    ModelParams model;
    CounterexampleConstants k;
    double D = 0.0;        // R^{(d+gamma)/(2(d+1))}
    double Q = 0.0;        // R^{(gamma-1)(d-1)/(2(d+1))}
    double mu0 = 0.0;      // (4 pi)^{-d}
    double r_half = 0.0;   // R^{gamma/2}
    double lattice_scale = 0.0;  // R^{gamma/2} / D, also Q^{d/(d-1)}

    static CounterexampleParams make(const ModelParams& m);
    static CounterexampleParams make(const ModelParams& m, const CounterexampleConstants& k);

    // Checks every constant inequality and the scale identity.
    void validate() const;

    int d() const { return model.d; }
    double gamma() const { return model.gamma; }
    double R() const { return model.R; }

    // Lattice index range [ell_begin, ell_end) = [ceil(L), ceil(2L)).
    std::int64_t ell_begin() const;
    std::int64_t ell_end() const;
    std::int64_t lattice_count() const { return ell_end() - ell_begin(); }

    // Half widths of an Omega cell.
    double half_width_first() const;  // A_1 = pi c3 / (4Q)
    double half_width_rest() const;   // A_j = pi c4 / (mu0 Q^{d/(d-1)})

    // Admissible q range [4 mu0 Q, 4Q].
    double q_min() const { return 4.0 * mu0 * Q; }
    double q_max() const { return 4.0 * Q; }
};

// -----------------------------------------------------------------------------
// Spectrum descriptors
// -----------------------------------------------------------------------------

enum class SpectrumKind { plane_wave_surrogate, case1_product, case3_counterexample, annulus_bump, modulated };

std::string to_string(SpectrumKind k);

struct SupportAnnulus {
    double inner = 0.0;
    double outer = 0.0;
};

class SpectrumDescriptor;

struct PlaneWaveSpec {
    std::vector<double> xi0;
    double width = 1.0;
    double amplitude = 1.0;
};
struct Case1Spec {
    int d = 2;
    double R = 1.0;
};
struct Case3Spec {
    CounterexampleParams cp;
};
struct AnnulusSpec {
    int d = 2;
    double R = 1.0;
};
struct ModulatedSpec {
    std::shared_ptr<const SpectrumDescriptor> base;
    std::vector<double> l;
    double R = 1.0;
};

class SpectrumDescriptor {
public:
    using Params = std::variant<PlaneWaveSpec, Case1Spec, Case3Spec, AnnulusSpec, ModulatedSpec>;

    static SpectrumDescriptor plane_wave(std::vector<double> xi0, double width, double amplitude = 1.0);
    static SpectrumDescriptor case1(int d, double R);
    static SpectrumDescriptor case3(const CounterexampleParams& cp);
    static SpectrumDescriptor annulus(int d, double R);
    static SpectrumDescriptor modulated(const SpectrumDescriptor& base, std::vector<double> l, double R);

    SpectrumKind kind() const;
    int dimension() const;
    const Params& params() const { return params_; }

    // fhat(xi).  Throws std::invalid_argument on a dimension mismatch.
    cplx operator()(std::span<const double> xi) const;

    SupportAnnulus support() const;

    // Per-axis interval lists whose Cartesian product covers the support.
    std::vector<std::vector<Interval>> axis_cells() const;

    // Product form fhat(xi) = prod_j factor_j(xi_j), when it exists.
    bool separable() const;
    cplx axis_factor(int axis, double xi) const;

    // \int |fhat| over R^d.
    double l1_norm() const;

    // One-line "key=value;..." record; parse() inverts it.
    std::string serialize() const;
    static SpectrumDescriptor parse(const std::string& text);

private:
    explicit SpectrumDescriptor(Params p) : params_(std::move(p)) {}
    Params params_;
};

// spectrum_eval as a free function.
cplx spectrum_eval(const SpectrumDescriptor& f, std::span<const double> xi);

struct NormOptions {
    double rel_tol = 1e-10;
    int min_panels = 2;
    int max_panels = 1 << 10;
};

// ((2 pi)^{-d} \int |fhat|^2)^{1/2}.  Modulations return the base norm.
double l2_norm(const SpectrumDescriptor& f, const NormOptions& opt = {});

// ((2 pi)^{-d} \int (1+|xi|^2)^s |fhat|^2)^{1/2}.
double sobolev_norm(const SpectrumDescriptor& f, double s, const NormOptions& opt = {});

// Predicted H^s size of the Case 3 profile up to constants:
// R^{-1/4} (R^{gamma/2}/D)^{(d-1)/2} R^{gamma s/2}.
double case3_norm_prediction(const CounterexampleParams& cp, double s);

// Slope of log ||f||_{H^s} against log R for the Case 3 family.
double case3_norm_slope(int d, double gamma, double s);

}  // namespace schrolab
