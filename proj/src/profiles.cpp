#include "schrolab/profiles.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace schrolab {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why)
{
    throw std::invalid_argument(field + ": " + why);
}

// pow() rounding must not flip a ceiling on an exact integer lattice bound.
double snap_to_integer(double x)
{
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x))) return r;
    return x;
}

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(v[i]);
    }
    return out;
}

// Cumulative integral of the mollifier at 4096 knots; smooth_step() adds the
// partial cell by a 7-point Gauss rule, exact to rounding on such short cells.
struct StepTable {
    static constexpr int cells = 4096;
    std::array<double, cells + 1> value{};

    StepTable()
    {
        const auto& rule = quad::gauss_legendre(20);
        const double total = mollifier_integral();
        double acc = 0.0;
        value[0] = 0.0;
        for (int i = 0; i < cells; ++i) {
            const double a = -1.0 + 2.0 * i / cells;
            const double b = -1.0 + 2.0 * (i + 1) / cells;
            acc += quad::composite([](double u) { return mollifier(u); }, {a, b}, 1, rule);
            value[i + 1] = acc / total;
        }
        value[cells] = 1.0;
    }
};

const StepTable& step_table()
{
    static const StepTable t;
    return t;
}

}  // namespace

// -----------------------------------------------------------------------------

void ModelParams::validate() const
{
    if (d < 1) bad_field("d", "dimension must be >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) bad_field("gamma", "must be a positive finite real");
    if (!(R >= 1.0) || !std::isfinite(R)) bad_field("R", "must be a finite real >= 1");
    if (!(s >= 0.0) || !std::isfinite(s)) bad_field("s", "must be a finite real >= 0");
}

double mollifier(double u)
{
    const double v = 1.0 - u * u;
    if (v <= 0.0) return 0.0;
    return std::exp(-1.0 / v);
}

double mollifier_integral()
{
    static const double value = [] {
        boost::math::quadrature::tanh_sinh<double> integrator;
        return integrator.integrate([](double u) { return mollifier(u); }, -1.0, 1.0);
    }();
    return value;
}

Bump1D Bump1D::canonical(double center, double width)
{
    if (!(width > 0.0)) bad_field("width", "must be positive");
    return {center, width, 1.0 / (width * mollifier_integral())};
}

double smooth_step(double x)
{
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const auto& t = step_table();
    const int i = std::min(static_cast<int>(x * StepTable::cells), StepTable::cells - 1);
    const double a = -1.0 + 2.0 * i / StepTable::cells;
    const double b = 2.0 * x - 1.0;
    const double part = boost::math::quadrature::gauss<double, 7>::integrate([](double u) { return mollifier(u); }, a, b);
    return std::min(1.0, t.value[i] + part / mollifier_integral());
}

double sphere_area(int d)
{
    return 2.0 * std::pow(pi, d / 2.0) / std::tgamma(d / 2.0);
}

double RadialBump::profile(double r) const
{
    if (r <= inner || r >= outer) return 0.0;
    if (r < 0.5) return smooth_step((r - inner) / (0.5 - inner));
    if (r <= 2.0) return 1.0;
    return smooth_step((outer - r) / (outer - 2.0));
}

double RadialBump::operator()(std::span<const double> xi) const
{
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    return profile(std::sqrt(r2));
}

// -----------------------------------------------------------------------------

CounterexampleConstants CounterexampleConstants::defaults(int d, double gamma)
{
    CounterexampleConstants k;
    k.c0 = std::ldexp(1.0, -(d + 2));
    k.c1 = k.c0 / 4.0;
    k.c2 = k.c1 / 4.0;
    k.c3 = std::min(k.c2 / 4.0, 1.0 / two_pi) / 2.0;
    k.c4 = 1.0 / 8.0;
    k.delta0 = (gamma - 1.0) / (8.0 * (d + 1));
    k.eps0 = 0.01;
    // calibrate_c_delta0(2, 2), frozen; other (d, gamma) calibrate on demand.
    k.c_delta0 = (d == 2 && gamma == 2.0) ? 0.36661006111569067 : 0.0;
    return k;
}

CounterexampleParams CounterexampleParams::make(const ModelParams& m)
{
    auto k = CounterexampleConstants::defaults(m.d, m.gamma);
    return make(m, k);
}

CounterexampleParams CounterexampleParams::make(const ModelParams& m, const CounterexampleConstants& k)
{
    m.validate();
    CounterexampleParams cp;
    cp.model = m;
    cp.k = k;
    const double d = m.d;
    const double g = m.gamma;
    cp.D = std::pow(m.R, (d + g) / (2.0 * (d + 1.0)));
    cp.Q = std::pow(m.R, (g - 1.0) * (d - 1.0) / (2.0 * (d + 1.0)));
    cp.mu0 = std::pow(4.0 * pi, -d);
    cp.r_half = std::pow(m.R, g / 2.0);
    cp.lattice_scale = snap_to_integer(std::pow(m.R, d * (g - 1.0) / (2.0 * (d + 1.0))));
    cp.validate();
    return cp;
}

void CounterexampleParams::validate() const
{
    model.validate();
    const int dd = model.d;
    const double g = model.gamma;
    if (dd < 2) bad_field("d", "counterexample requires d >= 2");
    if (!(g > 1.0 && g <= 2.0)) bad_field("gamma", "counterexample construction requires 1 < gamma <= 2");
    if (!(k.c0 > 0.0 && k.c0 < std::ldexp(1.0, -(dd + 1)))) bad_field("c0", "must lie in (0, 2^-(d+1))");
    if (!(k.c1 / 2.0 < k.c0 / 4.0)) bad_field("c1", "must satisfy c1/2 < c0/4");
    if (!(k.c2 > 0.0 && k.c2 < k.c1 / 2.0)) bad_field("c2", "must satisfy 0 < c2 < c1/2");
    if (!(k.c3 > 0.0 && k.c3 < std::min(k.c2 / 4.0, 1.0 / two_pi)))
        bad_field("c3", "must satisfy 0 < c3 < min(c2/4, 1/(2 pi))");
    if (!(k.c4 > 0.0 && k.c4 < 0.5)) bad_field("c4", "must lie in (0, 1/2)");
    if (!(k.delta0 > 0.0 && k.delta0 < (g - 1.0) / (4.0 * (dd + 1))))
        bad_field("delta0", "must satisfy 0 < delta0 < (gamma-1)/(4(d+1))");
    if (!(k.eps0 > 0.0)) bad_field("eps0", "must be positive");
    if (!(k.c_delta0 >= 0.0)) bad_field("c_delta0", "must be non-negative");
    const double lhs = std::pow(Q, static_cast<double>(dd) / (dd - 1));
    if (std::abs(lhs - lattice_scale) > 1e-12 * lattice_scale)
        bad_field("Q", "scale identity Q^{d/(d-1)} = R^{gamma/2}/D violated");
}

std::int64_t CounterexampleParams::ell_begin() const
{
    return static_cast<std::int64_t>(std::ceil(lattice_scale));
}

std::int64_t CounterexampleParams::ell_end() const
{
    return static_cast<std::int64_t>(std::ceil(snap_to_integer(2.0 * lattice_scale)));
}

double CounterexampleParams::half_width_first() const
{
    return pi * k.c3 / (4.0 * Q);
}

double CounterexampleParams::half_width_rest() const
{
    return pi * k.c4 / (mu0 * lattice_scale);
}

// -----------------------------------------------------------------------------

std::string to_string(SpectrumKind k)
{
    switch (k) {
    case SpectrumKind::plane_wave_surrogate: return "plane-wave-surrogate";
    case SpectrumKind::case1_product: return "case1-product";
    case SpectrumKind::case3_counterexample: return "case3-counterexample";
    case SpectrumKind::annulus_bump: return "annulus-bump";
    case SpectrumKind::modulated: return "modulated";
    }
    return "unknown";
}

SpectrumDescriptor SpectrumDescriptor::plane_wave(std::vector<double> xi0, double width, double amplitude)
{
    if (xi0.empty()) bad_field("xi0", "must have at least one component");
    if (!(width > 0.0)) bad_field("width", "must be positive");
    return SpectrumDescriptor(PlaneWaveSpec{std::move(xi0), width, amplitude});
}

SpectrumDescriptor SpectrumDescriptor::case1(int d, double R)
{
    if (d < 1) bad_field("d", "dimension must be >= 1");
    if (!(R >= 1.0)) bad_field("R", "must be >= 1");
    return SpectrumDescriptor(Case1Spec{d, R});
}

SpectrumDescriptor SpectrumDescriptor::case3(const CounterexampleParams& cp)
{
    cp.validate();
    return SpectrumDescriptor(Case3Spec{cp});
}

SpectrumDescriptor SpectrumDescriptor::annulus(int d, double R)
{
    if (d < 1) bad_field("d", "dimension must be >= 1");
    if (!(R >= 1.0)) bad_field("R", "must be >= 1");
    return SpectrumDescriptor(AnnulusSpec{d, R});
}

SpectrumDescriptor SpectrumDescriptor::modulated(const SpectrumDescriptor& base, std::vector<double> l, double R)
{
    if (static_cast<int>(l.size()) != base.dimension()) bad_field("l", "shift dimension must match the base profile");
    if (!(R > 0.0)) bad_field("R", "must be positive");
    return SpectrumDescriptor(ModulatedSpec{std::make_shared<const SpectrumDescriptor>(base), std::move(l), R});
}

SpectrumKind SpectrumDescriptor::kind() const
{
    return static_cast<SpectrumKind>(params_.index());
}

int SpectrumDescriptor::dimension() const
{
    return std::visit(
        [](const auto& p) -> int {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PlaneWaveSpec>) return static_cast<int>(p.xi0.size());
            else if constexpr (std::is_same_v<T, Case3Spec>) return p.cp.d();
            else if constexpr (std::is_same_v<T, ModulatedSpec>) return p.base->dimension();
            else return p.d;
        },
        params_);
}

namespace {

double case3_comb(const CounterexampleParams& cp, double xi)
{
    static const Bump1D phi = Bump1D::canonical();
    const std::int64_t lo = std::max<std::int64_t>(cp.ell_begin(), static_cast<std::int64_t>(std::floor((xi - 1.0) / cp.D)));
    const std::int64_t hi = std::min<std::int64_t>(cp.ell_end() - 1, static_cast<std::int64_t>(std::ceil((xi + 1.0) / cp.D)));
    double acc = 0.0;
    for (std::int64_t l = lo; l <= hi; ++l) acc += phi(xi - cp.D * static_cast<double>(l));
    return acc;
}

std::vector<Interval> merge_intervals(std::vector<Interval> v)
{
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.lo <= out.back().hi) out.back().hi = std::max(out.back().hi, iv.hi);
        else out.push_back(iv);
    }
    return out;
}

}  // namespace

bool SpectrumDescriptor::separable() const
{
    if (const auto* m = std::get_if<ModulatedSpec>(&params_)) return m->base->separable();
    return !std::holds_alternative<AnnulusSpec>(params_);
}

cplx SpectrumDescriptor::axis_factor(int axis, double xi) const
{
    static const Bump1D phi = Bump1D::canonical();
    return std::visit(
        [&](const auto& p) -> cplx {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PlaneWaveSpec>) {
                const double amp = axis == 0 ? p.amplitude : 1.0;
                return amp * phi((xi - p.xi0[axis]) / p.width) / p.width;
            } else if constexpr (std::is_same_v<T, Case1Spec>) {
                return phi(xi / p.R) / p.R;
            } else if constexpr (std::is_same_v<T, Case3Spec>) {
                const auto& cp = p.cp;
                if (axis == 0) {
                    const double sq = std::sqrt(cp.R());
                    return phi((xi - cp.r_half) / sq) / sq;
                }
                return case3_comb(cp, xi);
            } else if constexpr (std::is_same_v<T, ModulatedSpec>) {
                return std::polar(1.0, xi * p.l[axis] / p.R) * p.base->axis_factor(axis, xi);
            } else {
                throw std::logic_error("axis_factor: annulus-bump profile is not separable");
            }
        },
        params_);
}

cplx SpectrumDescriptor::operator()(std::span<const double> xi) const
{
    if (static_cast<int>(xi.size()) != dimension())
        throw std::invalid_argument("spectrum_eval: xi has dimension " + std::to_string(xi.size()) +
                                    ", profile has " + std::to_string(dimension()));
    if (const auto* a = std::get_if<AnnulusSpec>(&params_)) {
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        return RadialBump{}.profile(std::sqrt(r2) / a->R);
    }
    if (const auto* m = std::get_if<ModulatedSpec>(&params_)) {
        if (!m->base->separable()) {
            double phase = 0.0;
            for (std::size_t j = 0; j < xi.size(); ++j) phase += xi[j] * m->l[j];
            return std::polar(1.0, phase / m->R) * (*m->base)(xi);
        }
    }
    cplx acc = 1.0;
    for (int j = 0; j < static_cast<int>(xi.size()); ++j) {
        acc *= axis_factor(j, xi[j]);
        if (acc == 0.0) break;
    }
    return acc;
}

SupportAnnulus SpectrumDescriptor::support() const
{
    return std::visit(
        [](const auto& p) -> SupportAnnulus {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PlaneWaveSpec>) {
                double n2 = 0.0;
                for (double v : p.xi0) n2 += v * v;
                const double spread = std::sqrt(static_cast<double>(p.xi0.size())) * p.width;
                return {std::max(0.0, std::sqrt(n2) - spread), std::sqrt(n2) + spread};
            } else if constexpr (std::is_same_v<T, Case1Spec>) {
                return {0.0, std::sqrt(static_cast<double>(p.d)) * p.R};
            } else if constexpr (std::is_same_v<T, Case3Spec>) {
                const auto& cp = p.cp;
                const double sq = std::sqrt(cp.R());
                const double far = cp.D * static_cast<double>(cp.ell_end() - 1) + 1.0;
                const double first = cp.r_half + sq;
                return {std::max(0.0, cp.r_half - sq), std::sqrt(first * first + (cp.d() - 1) * far * far)};
            } else if constexpr (std::is_same_v<T, AnnulusSpec>) {
                const RadialBump b;
                return {b.inner * p.R, b.outer * p.R};
            } else {
                return p.base->support();
            }
        },
        params_);
}

std::vector<std::vector<Interval>> SpectrumDescriptor::axis_cells() const
{
    return std::visit(
        [](const auto& p) -> std::vector<std::vector<Interval>> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PlaneWaveSpec>) {
                std::vector<std::vector<Interval>> out;
                for (double c : p.xi0) out.push_back({{c - p.width, c + p.width}});
                return out;
            } else if constexpr (std::is_same_v<T, Case1Spec>) {
                return std::vector<std::vector<Interval>>(p.d, {{-p.R, p.R}});
            } else if constexpr (std::is_same_v<T, Case3Spec>) {
                const auto& cp = p.cp;
                const double sq = std::sqrt(cp.R());
                std::vector<std::vector<Interval>> out;
                out.push_back({{cp.r_half - sq, cp.r_half + sq}});
                std::vector<Interval> comb;
                for (std::int64_t l = cp.ell_begin(); l < cp.ell_end(); ++l)
                    comb.push_back({cp.D * static_cast<double>(l) - 1.0, cp.D * static_cast<double>(l) + 1.0});
                comb = merge_intervals(std::move(comb));
                for (int j = 1; j < cp.d(); ++j) out.push_back(comb);
                return out;
            } else if constexpr (std::is_same_v<T, AnnulusSpec>) {
                const double r = RadialBump{}.outer * p.R;
                return std::vector<std::vector<Interval>>(p.d, {{-r, r}});
            } else {
                return p.base->axis_cells();
            }
        },
        params_);
}

cplx spectrum_eval(const SpectrumDescriptor& f, std::span<const double> xi)
{
    return f(xi);
}

// -----------------------------------------------------------------------------
// Norms
// -----------------------------------------------------------------------------

namespace {

// \int w(xi) |fhat(xi)|^p over the tensor cells at a fixed panel count.
template <class Weight>
double tensor_estimate(const SpectrumDescriptor& f, int panels, int power, Weight&& weight, bool weight_is_one)
{
    const int d = f.dimension();
    const auto cells = f.axis_cells();
    std::vector<quad::Nodes> axis_nodes(d);
    for (int j = 0; j < d; ++j) {
        for (const auto& iv : cells[j]) {
            auto n = quad::composite_nodes(iv, panels);
            axis_nodes[j].x.insert(axis_nodes[j].x.end(), n.x.begin(), n.x.end());
            axis_nodes[j].w.insert(axis_nodes[j].w.end(), n.w.begin(), n.w.end());
        }
    }
    auto magnitude = [power](cplx v) { return power == 2 ? std::norm(v) : std::abs(v); };

    if (f.separable()) {
        std::vector<std::vector<double>> axis_vals(d);
        for (int j = 0; j < d; ++j) {
            axis_vals[j].resize(axis_nodes[j].x.size());
            for (std::size_t i = 0; i < axis_nodes[j].x.size(); ++i)
                axis_vals[j][i] = axis_nodes[j].w[i] * magnitude(f.axis_factor(j, axis_nodes[j].x[i]));
        }
        if (weight_is_one) {
            double prod = 1.0;
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (double v : axis_vals[j]) s += v;
                prod *= s;
            }
            return prod;
        }
        // Tensor walk with the coupling weight.
        std::vector<std::size_t> idx(d, 0);
        std::vector<double> xi(d);
        double acc = 0.0;
        while (true) {
            double v = 1.0;
            for (int j = 0; j < d; ++j) {
                xi[j] = axis_nodes[j].x[idx[j]];
                v *= axis_vals[j][idx[j]];
            }
            if (v != 0.0) acc += v * weight(std::span<const double>(xi));
            int j = d - 1;
            while (j >= 0 && ++idx[j] == axis_nodes[j].x.size()) idx[j--] = 0;
            if (j < 0) break;
        }
        return acc;
    }

    std::vector<std::size_t> idx(d, 0);
    std::vector<double> xi(d);
    double acc = 0.0;
    while (true) {
        double w = 1.0;
        for (int j = 0; j < d; ++j) {
            xi[j] = axis_nodes[j].x[idx[j]];
            w *= axis_nodes[j].w[idx[j]];
        }
        const double m = magnitude(f(std::span<const double>(xi)));
        if (m != 0.0) acc += w * m * (weight_is_one ? 1.0 : weight(std::span<const double>(xi)));
        int j = d - 1;
        while (j >= 0 && ++idx[j] == axis_nodes[j].x.size()) idx[j--] = 0;
        if (j < 0) break;
    }
    return acc;
}

// Annulus profiles are radial: \int g(|xi|) dxi = |S^{d-1}| \int r^{d-1} g(r) dr.
template <class Radial>
double annulus_integral(const AnnulusSpec& a, int panels, Radial&& g)
{
    const RadialBump phi;
    const auto n = quad::composite_nodes({phi.inner * a.R, phi.outer * a.R}, panels);
    double acc = 0.0;
    for (std::size_t k = 0; k < n.x.size(); ++k) acc += n.w[k] * std::pow(n.x[k], a.d - 1) * g(n.x[k], phi.profile(n.x[k] / a.R));
    return acc * sphere_area(a.d);
}

template <class Weight>
double converged_integral(const SpectrumDescriptor& f, int power, Weight&& weight, bool weight_is_one,
                          const NormOptions& opt)
{
    if (const auto* a = std::get_if<AnnulusSpec>(&f.params())) {
        auto g = [&](double r, double v) {
            const double m = power == 2 ? v * v : std::abs(v);
            if (weight_is_one) return m;
            std::vector<double> xi(a->d, 0.0);
            xi[0] = r;
            return m * weight(std::span<const double>(xi));
        };
        int panels = std::max(opt.min_panels, 8);
        double prev = annulus_integral(*a, panels, g);
        while (true) {
            panels *= 2;
            const double cur = annulus_integral(*a, panels, g);
            if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur)) return cur;
            if (panels >= 64 * opt.max_panels)
                throw quad::quadrature_error("norm quadrature did not reach relative tolerance for annulus-bump");
            prev = cur;
        }
    }
    int panels = opt.min_panels;
    double prev = tensor_estimate(f, panels, power, weight, weight_is_one);
    while (true) {
        panels *= 2;
        const double cur = tensor_estimate(f, panels, power, weight, weight_is_one);
        if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur)) return cur;
        if (panels >= opt.max_panels)
            throw quad::quadrature_error("norm quadrature did not reach relative tolerance " +
                                         fmt_double(opt.rel_tol) + " for " + to_string(f.kind()));
        prev = cur;
    }
}

}  // namespace

double SpectrumDescriptor::l1_norm() const
{
    return converged_integral(*this, 1, [](std::span<const double>) { return 1.0; }, true, NormOptions{});
}

double l2_norm(const SpectrumDescriptor& f, const NormOptions& opt)
{
    if (const auto* m = std::get_if<ModulatedSpec>(&f.params())) return l2_norm(*m->base, opt);
    const double integral = converged_integral(f, 2, [](std::span<const double>) { return 1.0; }, true, opt);
    return std::sqrt(integral * std::pow(two_pi, -f.dimension()));
}

double sobolev_norm(const SpectrumDescriptor& f, double s, const NormOptions& opt)
{
    if (!(s >= 0.0)) bad_field("s", "Sobolev index must be >= 0");
    if (s == 0.0) return l2_norm(f, opt);
    if (const auto* m = std::get_if<ModulatedSpec>(&f.params())) return sobolev_norm(*m->base, s, opt);
    auto weight = [s](std::span<const double> xi) {
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        return std::pow(1.0 + r2, s);
    };
    const double integral = converged_integral(f, 2, weight, false, opt);
    return std::sqrt(integral * std::pow(two_pi, -f.dimension()));
}

double case3_norm_prediction(const CounterexampleParams& cp, double s)
{
    return std::pow(cp.R(), -0.25) * std::pow(cp.lattice_scale, (cp.d() - 1) / 2.0) *
           std::pow(cp.R(), cp.gamma() * s / 2.0);
}

double case3_norm_slope(int d, double gamma, double s)
{
    return -0.25 + (d - 1) / 2.0 * (gamma / 2.0 - (d + gamma) / (2.0 * (d + 1))) + gamma * s / 2.0;
}

// -----------------------------------------------------------------------------
// Serialization
// -----------------------------------------------------------------------------

std::string SpectrumDescriptor::serialize() const
{
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PlaneWaveSpec>) {
                return "kind=plane-wave-surrogate;d=" + std::to_string(p.xi0.size()) + ";xi0=" + join(p.xi0) +
                       ";width=" + fmt_double(p.width) + ";amplitude=" + fmt_double(p.amplitude);
            } else if constexpr (std::is_same_v<T, Case1Spec>) {
                return "kind=case1-product;d=" + std::to_string(p.d) + ";R=" + fmt_double(p.R);
            } else if constexpr (std::is_same_v<T, Case3Spec>) {
                const auto& cp = p.cp;
                return "kind=case3-counterexample;d=" + std::to_string(cp.d()) + ";gamma=" + fmt_double(cp.gamma()) +
                       ";R=" + fmt_double(cp.R()) + ";s=" + fmt_double(cp.model.s) + ";c0=" + fmt_double(cp.k.c0) +
                       ";c1=" + fmt_double(cp.k.c1) + ";c2=" + fmt_double(cp.k.c2) + ";c3=" + fmt_double(cp.k.c3) +
                       ";c4=" + fmt_double(cp.k.c4) + ";delta0=" + fmt_double(cp.k.delta0) +
                       ";eps0=" + fmt_double(cp.k.eps0) + ";c_delta0=" + fmt_double(cp.k.c_delta0);
            } else if constexpr (std::is_same_v<T, AnnulusSpec>) {
                return "kind=annulus-bump;d=" + std::to_string(p.d) + ";R=" + fmt_double(p.R);
            } else {
                return "kind=modulated;R=" + fmt_double(p.R) + ";l=" + join(p.l) + ";base={" + p.base->serialize() +
                       "}";
            }
        },
        params_);
}

namespace {

std::map<std::string, std::string> split_record(const std::string& text)
{
    std::map<std::string, std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t eq = text.find('=', i);
        if (eq == std::string::npos) throw std::invalid_argument("descriptor record: missing '=' near '" + text.substr(i) + "'");
        std::string key = text.substr(i, eq - i);
        std::size_t j = eq + 1;
        int depth = 0;
        while (j < text.size() && !(depth == 0 && text[j] == ';')) {
            if (text[j] == '{') ++depth;
            if (text[j] == '}') --depth;
            ++j;
        }
        std::string value = text.substr(eq + 1, j - eq - 1);
        if (value.size() >= 2 && value.front() == '{' && value.back() == '}') value = value.substr(1, value.size() - 2);
        if (!out.emplace(key, value).second) throw std::invalid_argument("descriptor record: duplicate key '" + key + "'");
        i = j + 1;
    }
    return out;
}

double num(const std::map<std::string, std::string>& m, const std::string& key)
{
    auto it = m.find(key);
    if (it == m.end()) throw std::invalid_argument("descriptor record: missing field '" + key + "'");
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("descriptor record: field '" + key + "' is not a number");
    return v;
}

std::vector<double> nums(const std::map<std::string, std::string>& m, const std::string& key)
{
    auto it = m.find(key);
    if (it == m.end()) throw std::invalid_argument("descriptor record: missing field '" + key + "'");
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

SpectrumDescriptor SpectrumDescriptor::parse(const std::string& text)
{
    const auto m = split_record(text);
    auto kind = m.find("kind");
    if (kind == m.end()) throw std::invalid_argument("descriptor record: missing field 'kind'");
    const std::string& k = kind->second;
    if (k == "plane-wave-surrogate") return plane_wave(nums(m, "xi0"), num(m, "width"), num(m, "amplitude"));
    if (k == "case1-product") return case1(static_cast<int>(num(m, "d")), num(m, "R"));
    if (k == "annulus-bump") return annulus(static_cast<int>(num(m, "d")), num(m, "R"));
    if (k == "case3-counterexample") {
        ModelParams mp{static_cast<int>(num(m, "d")), num(m, "gamma"), num(m, "R"), num(m, "s")};
        CounterexampleConstants c;
        c.c0 = num(m, "c0");
        c.c1 = num(m, "c1");
        c.c2 = num(m, "c2");
        c.c3 = num(m, "c3");
        c.c4 = num(m, "c4");
        c.delta0 = num(m, "delta0");
        c.eps0 = num(m, "eps0");
        c.c_delta0 = num(m, "c_delta0");
        return case3(CounterexampleParams::make(mp, c));
    }
    if (k == "modulated") {
        auto base = m.find("base");
        if (base == m.end()) throw std::invalid_argument("descriptor record: missing field 'base'");
        return modulated(parse(base->second), nums(m, "l"), num(m, "R"));
    }
    throw std::invalid_argument("descriptor record: unknown kind '" + k + "'");
}

}  // namespace schrolab
