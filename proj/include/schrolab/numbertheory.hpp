// numbertheory.hpp
//
// Arithmetic kernels of the counterexample: complete and incomplete quadratic
// exponential sums, summation by parts, simultaneous Dirichlet approximation
// and the scaled-cube covering bound.

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace schrolab::nt {

using cplx = std::complex<double>;
using i64 = std::int64_t;

i64 gcd(i64 a, i64 b);
i64 mod(i64 x, i64 m);  // representative in [0, m)

// -----------------------------------------------------------------------------
// Gauss sums
// -----------------------------------------------------------------------------

struct GaussSumParams {
    i64 a = 0;
    i64 b = 0;
    i64 q = 1;
};

// sum_{l=1}^{q} e^{2 pi i (b l + a l^2) / q}, phases reduced mod q in integers.
cplx gauss_sum(const GaussSumParams& p);

enum class LawStatus { pass, fail, precondition };

struct GaussLawCheck {
    LawStatus status = LawStatus::precondition;
    double modulus = 0.0;
    double expected = 0.0;  // sqrt(2q)
    std::string reason;     // set when the hypotheses do not hold
};

// | |G| - sqrt(2q) | <= tol * sqrt(q) when gcd(a,q) = 1, 4 | q and b even.
GaussLawCheck gauss_modulus_law(const GaussSumParams& p, double tol = 1e-9);

struct GaussSweep {
    i64 checked = 0;
    i64 failures = 0;
    double max_deviation = 0.0;  // max | |G| - sqrt(2q) | / sqrt(q)
    double max_over_q = 0.0;     // max |G| / q over every residue triple visited
};

// Every q = 4, 8, ..., q_max, every a coprime to q, every even b mod q.
GaussSweep gauss_law_sweep(i64 q_max = 256, double tol = 1e-9);

// -----------------------------------------------------------------------------
// Weyl sums
// -----------------------------------------------------------------------------

struct WeylPhase {
    double alpha = 0.0;
    double beta = 0.0;
    i64 M = 0;
    i64 N = 1;
    i64 a = 0;  // rational anchor a/q of alpha
    i64 q = 1;

    // gcd(a, q) = 1, |alpha - a/q| <= 1/q^2, N >= 1.
    void validate() const;
};

// sum_{M <= n < M+N} e^{2 pi i (alpha n^2 + beta n)}.
cplx weyl_sum(const WeylPhase& w);

// Same sum for alpha = a/q and beta = b/c, with exact integer phases mod q c.
cplx weyl_sum_rational(i64 a, i64 q, i64 b, i64 c, i64 M, i64 N);

struct WeylBound {
    double value = 0.0;
    bool trivial = false;  // q = 1: (log q)^{1/2} vanishes, value is N
};

// (N q^{-1/2} + q^{1/2}) (log q)^{1/2}.
WeylBound weyl_bound_rhs(i64 N, i64 q);

struct WeylCalibration {
    double rho_small = 0.0;  // max |S| / rhs over N <= n_small
    double rho_large = 0.0;  // max over N <= n_large
    i64 q_max = 0, n_small = 0, n_large = 0;
    i64 argmax_q = 0, argmax_a = 0, argmax_N = 0, argmax_M = 0;
    double argmax_beta = 0.0;
    i64 sums = 0;
};

// Exhaustive over 2 <= q <= q_max, a coprime to q, beta in {0, 1/3, 1/2},
// M in {0, -floor(N/2)}, 1 <= N <= n_large.
WeylCalibration weyl_calibrate(i64 q_max = 64, i64 n_small = 256, i64 n_large = 4096, unsigned workers = 1);

// -----------------------------------------------------------------------------
// Summation by parts
// -----------------------------------------------------------------------------

struct AbelIdentity {
    cplx lhs;
    cplx rhs;
};

// a holds a_M, ..., a_{M+N}.  lhs = sum a_n h(n); rhs = A(M+N) h(M+N) minus
// the integral of A(u) h'(u) over [M, M+N], which for the step function A is
// sum_n A(n) (h(n+1) - h(n)).
AbelIdentity abel_sum_identity(std::span<const cplx> a, const std::function<cplx(double)>& h, i64 M);

// -----------------------------------------------------------------------------
// Counting and approximation
// -----------------------------------------------------------------------------

i64 totient(i64 q);

struct DirichletApprox {
    i64 q = 1;
    std::vector<i64> a;
};

// Smallest 1 <= q <= Q with |target_j - 2 pi a_j / q| <= 2 pi / (q Q^{1/n})
// for every j, n = target.size().
DirichletApprox dirichlet_simultaneous(std::span<const double> target, double Q);

// -----------------------------------------------------------------------------
// Scaled-cube covering
// -----------------------------------------------------------------------------

struct Cube {
    std::vector<double> center;
    double side = 1.0;
};

struct CubeFamily {
    std::vector<Cube> cubes;
    double c = 0.5;
};

struct VitaliCheck {
    double union_measure = 0.0;
    double scaled_union_measure = 0.0;
    double bound = 0.0;  // c^k 3^{-k} union_measure, k the cube dimension
    bool holds = false;
};

// Exact Lebesgue measure of a finite union of axis-aligned boxes
// (coordinate compression).  Boxes are given as [lo, hi] per axis.
double union_measure(const std::vector<std::vector<std::pair<double, double>>>& boxes);

VitaliCheck vitali_scaled_union(const CubeFamily& fam);

}  // namespace schrolab::nt
