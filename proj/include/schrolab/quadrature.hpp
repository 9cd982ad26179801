// quadrature.hpp
//
// Composite Gauss-Legendre rules on intervals and boxes, with a doubling
// refinement loop for adaptive use.  Node tables come from Boost.Math; the
// composite/tensor bookkeeping lives here because the propagator and the norm
// code both need batch access to nodes (one evaluation pass per rule).

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrolab::quad {

using cplx = std::complex<double>;

class quadrature_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

// Gauss-Legendre rule on [-1, 1]; `points` must be 20 or 30.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const Rule& gauss_legendre(int points = 20);

// Nodes and weights of a composite rule: `panels` equal panels on [lo, hi].
struct Nodes {
    std::vector<double> x;
    std::vector<double> w;
};
Nodes composite_nodes(Interval iv, int panels, const Rule& rule = gauss_legendre());

template <class F>
auto composite(F&& f, Interval iv, int panels, const Rule& rule = gauss_legendre())
{
    using T = decltype(f(0.0));
    T acc{};
    const double h = iv.width() / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = iv.lo + (p + 0.5) * h;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            acc += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    }
    return acc * (0.5 * h);
}

struct AdaptiveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-300;
    int min_panels = 4;
    int max_panels = 1 << 16;
};

// Doubles the panel count until two successive composite estimates agree.
template <class F>
auto adaptive(F&& f, Interval iv, const AdaptiveOptions& opt = {})
{
    int panels = opt.min_panels;
    auto prev = composite(f, iv, panels);
    while (true) {
        panels *= 2;
        auto cur = composite(f, iv, panels);
        const double diff = std::abs(cur - prev);
        if (diff <= opt.rel_tol * std::abs(cur) || diff <= opt.abs_tol)
            return cur;
        if (panels >= opt.max_panels)
            throw quadrature_error("adaptive quadrature did not converge on [" +
                                   std::to_string(iv.lo) + ", " + std::to_string(iv.hi) +
                                   "], last difference " + std::to_string(diff));
        prev = cur;
    }
}

}  // namespace schrolab::quad
