// propagator.hpp
//
// The free Schrodinger evolution and the complex-time operator
//
//   P_gamma f(x,t) = (2 pi)^{-d} \int e^{i(x.xi + t|xi|^2)} e^{-t^gamma |xi|^2} fhat(xi) dxi
//
// evaluated two ways: by direct oscillation-aware tensor quadrature over the
// profile's support cells (any profile; the small-R oracle), and by the
// product form |I_1| * prod_j |I_j| of the Case 3 profile (the production
// path at counterexample scales).

#pragma once

#include "schrolab/profiles.hpp"

#include <cstdint>
#include <vector>

namespace schrolab {

struct SpaceTimePoint {
    std::vector<double> x;
    double t = 0.0;
};

struct DirectOptions {
    double rel_tol = 1e-9;
    // Per-cell minimum number of 20-point panels; also sets the spacing cap
    // (cell width / (20 * min_panels)).
    int min_panels = 2;
    std::size_t max_nodes = std::size_t{1} << 26;
};

// (2 pi)^{-d} \int e^{i(x.xi + t|xi|^2)} fhat(xi) dxi.
cplx evaluate_free(const SpectrumDescriptor& f, const SpaceTimePoint& p, const DirectOptions& opt = {});

// P_gamma f(x,t) by direct quadrature.  Requires gamma > 0 and t >= 0.
cplx evaluate_p_gamma(const SpectrumDescriptor& f, double gamma, const SpaceTimePoint& p,
                      const DirectOptions& opt = {});

// Pointwise majorant (2 pi)^{-d} \int e^{-t^gamma |xi|^2} |fhat(xi)| dxi of |P_gamma f(., t)|.
double p_gamma_majorant(const SpectrumDescriptor& f, double gamma, double t);

// -----------------------------------------------------------------------------

struct TailBoundCheck {
    double bound = 0.0;          // e^{-R^eps} R^{d/2} ||f||_2
    double sampled_sup = 0.0;    // max over sampled t of the pointwise majorant
    double t_lo = 0.0;           // R^{-2/gamma + eps}
    double constant = 10.0;
    bool holds = false;          // sampled_sup <= constant * bound
};

// Large-time piece of the maximal function: t in (R^{-2/gamma+eps}, 1).
TailBoundCheck dissipative_tail_bound(const SpectrumDescriptor& f, double gamma, double eps, double R,
                                      int samples = 64, double constant = 10.0);

// -----------------------------------------------------------------------------

struct TorusCoefficient {
    std::vector<std::int64_t> l;
    double t = 0.0;
    cplx value;
};

// C_l(t) = (2 pi)^{-d} \int_{[-pi,pi]^d} phi(xi) e^{-t^gamma R^2 |xi|^2} e^{-i xi.l} dxi
// with phi the radial bump.  Requires 0 < t <= R^{-2/gamma+eps}.
TorusCoefficient torus_coefficient(const std::vector<std::int64_t>& l, double t, double R, double gamma,
                                   double eps = 0.1);

struct DecayFit {
    double slope = 0.0;  // d log|C_l| / d log(1+|l|)
    double log_k = 0.0;  // intercept
};

// Fits |C_(n,0,...,0)(t)| against 1+n for n = 1..n_max.
DecayFit fit_coefficient_decay(int d, double t, double R, double gamma, int n_max = 64, double eps = 0.1);

// -----------------------------------------------------------------------------
// Case 3 product form
// -----------------------------------------------------------------------------

struct FactorizedEvaluation {
    cplx i1;
    std::vector<cplx> ij;
    double product_modulus = 0.0;
};

struct FactorizedOptions {
    int panels = 8;          // 20-point panels on each bump's [-1, 1]
    bool check_box = true;   // reject points outside the Omega* box
};

// True when x lies in [-c1 R^{g/2-1}, -c1 R^{g/2-1}/2] x [-c1, c1]^{d-1} and t >= 0.
bool in_counterexample_box(const CounterexampleParams& cp, const SpaceTimePoint& p);

FactorizedEvaluation factorized_evaluate(const CounterexampleParams& cp, const SpaceTimePoint& p,
                                         const FactorizedOptions& opt = {});

// h(ell) = \int phi(xi) e^{i[xi(x_j + 2 D t ell) + xi^2 t]} e^{-(xi + D ell)^2 t^gamma} dxi
cplx lattice_weight(const CounterexampleParams& cp, double x_j, double t, double ell, int panels = 8);

// Partial lattice sums S_j(u) for every integer u in (ell_begin, ell_end]:
// entry k is the sum over ell_begin <= ell < ell_begin + k + 1.
std::vector<cplx> axis_partial_sums(const CounterexampleParams& cp, double x_j, double t);

struct AbelSplit {
    cplx direct;        // I_j summed term by term
    cplx main;          // S_j(2R^{g/2}/D) * h(ell_end - 1)
    double e1_bound = 0.0;
    double residual = 0.0;  // |direct - main|
};

// Abel summation split of I_j into main term and E_j(1); axis is 1..d-1.
AbelSplit abel_main_plus_error(const CounterexampleParams& cp, const SpaceTimePoint& p, int axis,
                               int panels = 8);

}  // namespace schrolab
