// counterexample.hpp
//
// The Case 3 construction: rational anchors, the frequency-side set Omega and
// its spatial pull-back Omega*, the time selection t_x, the lattice sums and
// their error budgets, and the lower-bound scaling experiment.

#pragma once

#include "schrolab/profiles.hpp"
#include "schrolab/propagator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace schrolab {

using i64 = std::int64_t;

struct RationalAnchor {
    i64 q = 4;
    i64 a1 = 1;
    std::vector<i64> a_rest;

    bool operator==(const RationalAnchor&) const = default;
};

// q = 0 mod 4 inside [4 mu0 Q, 4Q].  Throws std::domain_error when empty.
std::vector<i64> admissible_moduli(const CounterexampleParams& cp);

bool anchor_admissible(const CounterexampleParams& cp, const RationalAnchor& a);

// Every admissible anchor when there are at most `limit`; otherwise `limit`
// of them chosen uniformly without replacement (seeded), in enumeration order.
std::vector<RationalAnchor> enumerate_anchors(const CounterexampleParams& cp, std::size_t limit,
                                              std::uint64_t seed = 0);

// Total number of admissible anchors.
double anchor_count(const CounterexampleParams& cp);

struct OmegaCell {
    RationalAnchor anchor;
    std::vector<double> half_widths;  // A_1, A_2, ..., A_d

    std::vector<double> centers() const;
    bool contains(const std::vector<double>& y) const;  // coordinates taken mod 2 pi
};

OmegaCell omega_cell(const CounterexampleParams& cp, const RationalAnchor& a);

// Distance between angles on the circle.
double circle_distance(double a, double b);

// Number of anchors whose cell contains y (y taken mod 2 pi).
double omega_multiplicity(const CounterexampleParams& cp, const std::vector<double>& y);

// |V_1(q)|: exact measure of the union of [2 pi a/q - A_1, 2 pi a/q + A_1] over
// a coprime to q, on the circle.
double v1_measure(const CounterexampleParams& cp, i64 q);

struct OmegaLowerBound {
    double bound = 0.0;
    double c_eps0 = 0.0;   // min_q |V_1(q)| Q^{eps0}
    double min_v1 = 0.0;
    i64 argmin_q = 0;
};

// c_{eps0} 2^{-d} 3^{1-d} c4^{d-1} Q^{-eps0}.
OmegaLowerBound omega_measure_lower(const CounterexampleParams& cp);

// 2^{-d} 3^{1-d} c4^{d-1}.
double v2_measure_lower(const CounterexampleParams& cp);

// Constructive re-derivation of the V_2 bound.  Every measure is normalised
// by (2 pi)^{d-1}.
struct V2Chain {
    double dirichlet_cover = 0.0;   // union of J(q; a) over 1 <= q <= Q
    double small_q_mass = 0.0;      // sum of |J(q; a)| over q < mu0 Q
    double tail_cover = 0.0;        // union over mu0 Q <= q <= Q
    double rescaled_cover = 0.0;    // union over q' = 4q, a' = 2a, in y/2 coordinates
    double v2_measure = 0.0;        // exact |V_2|
    double bound = 0.0;             // v2_measure_lower
    bool holds = false;             // every link of the chain
};

V2Chain v2_rescaling_chain(const CounterexampleParams& cp);

// -----------------------------------------------------------------------------
// Omega*
// -----------------------------------------------------------------------------

struct OmegaStarSample {
    std::vector<double> x;
    std::vector<double> y;
    RationalAnchor anchor;
    double multiplicity = 1.0;
};

struct OmegaStarSampling {
    std::vector<OmegaStarSample> samples;
    double preimage_volume = 0.0;   // sum over anchors of the preimage volume
    double measure_estimate = 0.0;  // preimage_volume * mean(1/multiplicity)
    double measure_stderr = 0.0;
    i64 reachable_moduli = 0;
};

// x_1 scale M_1 = D^2/(2 R^{gamma/2}); the other axes use D.
double first_axis_scale(const CounterexampleParams& cp);

// Anchor cell -> uniformly random periodic preimage in the box, anchors drawn
// in proportion to their preimage volume.  Throws std::domain_error when no
// anchor has a preimage in the box.
OmegaStarSampling sample_omega_star(const CounterexampleParams& cp, std::size_t n, std::uint64_t seed,
                                    unsigned workers = 1);

// Residue check of both congruences and box membership.
bool omega_star_sample_valid(const CounterexampleParams& cp, const OmegaStarSample& s, double tol = 1e-9);

// Exact |Omega*| by one-dimensional interval arithmetic.  Requires the first
// axis cells to be pairwise disjoint (throws std::domain_error otherwise).
double omega_star_measure_exact(const CounterexampleParams& cp);

// (c1^d / (4 (2 pi)^d)) * omega_measure_lower * R^{gamma/2-1}.
double omega_star_measure_lower(const CounterexampleParams& cp);

// -----------------------------------------------------------------------------
// Time selection and lattice sums
// -----------------------------------------------------------------------------

struct TimeSelection {
    double t = 0.0;
    double tau = 0.0;
    double s = 0.0;
};

TimeSelection select_time_detail(const CounterexampleParams& cp, const OmegaStarSample& sample);
double select_time(const CounterexampleParams& cp, const OmegaStarSample& sample);

struct LatticeSums {
    std::vector<cplx> per_axis;
    cplx product{1.0, 0.0};
};

// S_j(u) = sum_{ceil(L) <= ell < u} e^{i(D ell x_j + D^2 ell^2 t)}.
LatticeSums lattice_sum_S(const CounterexampleParams& cp, const std::vector<double>& x_rest, double t, double u);

// sum_{ceil(L) <= ell < u} e^{i(ell 2 pi a_j/q + ell^2 theta)} per axis.
std::vector<cplx> lattice_sum_S_tilde(const CounterexampleParams& cp, const RationalAnchor& a, double theta,
                                      double u);

// The same sum at theta = 2 pi a1/q with exact residues.
cplx lattice_sum_S_tilde_rational(const CounterexampleParams& cp, i64 q, i64 a1, i64 aj, i64 count);

// R^{gamma/2} / (D Q^{1/2}).
double main_term_scale(const CounterexampleParams& cp);

struct ErrorBudget {
    double e1_bound = 0.0;
    double e2_bound = 0.0;
    double threshold = 0.0;  // 2^{-(d+5)/2} main_term_scale^{d-1}
    bool e1_admissible = false;
    bool e2_admissible = false;
    bool admissible = false;
};

ErrorBudget error_budget(const CounterexampleParams& cp, double t);

struct MainTermCalibration {
    double c_delta0 = 0.0;   // max deviation / (R^{gamma/2-delta0} / (D Q^{1/2}))
    double max_deviation = 0.0;
    double max_modulus_ratio = 0.0;  // max |S~| / ((4 pi)^d main_term_scale)
    i64 argmax_q = 0, argmax_a1 = 0, argmax_aj = 0;
    i64 sums = 0;
};

// Exhaustive over admissible (q, a1, a_j) at theta = 2 pi a1/q and u = 2L.
MainTermCalibration calibrate_main_term(const CounterexampleParams& cp);

// Max of calibrate_main_term over R = 2^12, 2^14, 2^16, 2^18.
double calibrate_c_delta0(int d, double gamma);

// The value frozen into the default constants (d = 2, gamma = 2); zero for
// other (d, gamma), which are calibrated on demand.
double frozen_c_delta0(int d, double gamma);

// -----------------------------------------------------------------------------
// Lower-bound experiment
// -----------------------------------------------------------------------------

enum class BudgetPolicy { record, abort };

struct LowerBoundConfig {
    int d = 2;
    double gamma = 2.0;
    double s = 0.0;
    std::vector<double> ladder;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    int panels = 8;
    BudgetPolicy budget = BudgetPolicy::record;
    std::optional<CounterexampleConstants> constants;
};

struct LowerBoundRecord {
    double R = 0.0;
    double mean_modulus = 0.0;
    double mean_square = 0.0;
    double measure_estimate = 0.0;
    double measure_stderr = 0.0;
    double measure_exact = 0.0;  // NaN when the exact path does not apply
    double measure_lower = 0.0;
    double sobolev = 0.0;
    double ratio_estimate = 0.0;
    double e1_bound = 0.0;
    double e2_bound = 0.0;
    double e2_observed = 0.0;  // max_j | |S_j(2L)| - sqrt(2) L / q^{1/2} | over samples
    double threshold = 0.0;
    bool admissible = false;
    double min_i1 = 0.0;
    bool aborted = false;
    std::string diagnosis;
};

struct LowerBoundResult {
    double effective_gamma = 0.0;
    double c_delta0 = 0.0;
    std::vector<LowerBoundRecord> records;
    double ratio_slope = 0.0;
    double modulus_slope = 0.0;
    double target_ratio_slope = 0.0;    // d(gamma-1)/(2(d+1)) - gamma s/2
    double target_modulus_slope = 0.0;  // (gamma-1)(d-1)/4
};

// Largest c4 for which the c4 part of the E(2) bound takes at most half of
// the admissibility threshold.  The experiment uses it unless constants are
// given explicitly.
double budget_c4(int d);

// gamma > 2 reuses the gamma = 2 construction.
double effective_gamma(double gamma);

LowerBoundResult lower_bound_experiment(const LowerBoundConfig& cfg);

struct Case1Sanity {
    double min_normalized = 0.0;  // min (2 pi)^d |P g(x, 0)| over the sampled ball
    double max_normalized = 0.0;
    double radius = 0.0;
};

// Case 1 (gamma <= 1): at t = 0 the case1 profile stays of unit size on
// B(0, 1/(1000 R)).
Case1Sanity case1_sanity(int d, double R, std::size_t samples, std::uint64_t seed);

}  // namespace schrolab
