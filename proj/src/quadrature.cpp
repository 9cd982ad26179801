#include "schrolab/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace schrolab::quad {

namespace {

template <int N>
Rule expand_boost_rule()
{
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& abscissa = G::abscissa();
    const auto& weight = G::weights();
    Rule r;
    // Boost stores the non-negative half; N is even for the rules used here.
    for (std::size_t i = abscissa.size(); i-- > 0;) {
        r.nodes.push_back(-abscissa[i]);
        r.weights.push_back(weight[i]);
    }
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        r.nodes.push_back(abscissa[i]);
        r.weights.push_back(weight[i]);
    }
    return r;
}

}  // namespace

const Rule& gauss_legendre(int points)
{
    static const Rule r20 = expand_boost_rule<20>();
    static const Rule r30 = expand_boost_rule<30>();
    switch (points) {
    case 20: return r20;
    case 30: return r30;
    default: throw std::invalid_argument("gauss_legendre: supported sizes are 20 and 30");
    }
}

Nodes composite_nodes(Interval iv, int panels, const Rule& rule)
{
    if (panels < 1) throw std::invalid_argument("composite_nodes: panels must be >= 1");
    Nodes out;
    out.x.reserve(panels * rule.nodes.size());
    out.w.reserve(panels * rule.nodes.size());
    const double h = iv.width() / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = iv.lo + (p + 0.5) * h;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            out.x.push_back(mid + 0.5 * h * rule.nodes[k]);
            out.w.push_back(0.5 * h * rule.weights[k]);
        }
    }
    return out;
}

}  // namespace schrolab::quad
