#include "schrolab/counterexample.hpp"

#include "schrolab/numbertheory.hpp"
#include "schrolab/parallel.hpp"
#include "schrolab/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace schrolab {

namespace {

using Segment = std::pair<double, double>;

double wrap_angle(double a)
{
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

// Pieces of [c - h, c + h] mod 2 pi inside [0, 2 pi).
void circle_pieces(double c, double h, std::vector<Segment>& out)
{
    if (2.0 * h >= two_pi) {
        out.emplace_back(0.0, two_pi);
        return;
    }
    const double lo = wrap_angle(c - h);
    const double hi = lo + 2.0 * h;
    if (hi <= two_pi) {
        out.emplace_back(lo, hi);
    } else {
        out.emplace_back(lo, two_pi);
        out.emplace_back(0.0, hi - two_pi);
    }
}

double union_length(std::vector<Segment> iv)
{
    std::sort(iv.begin(), iv.end());
    double total = 0.0, lo = 0.0, hi = 0.0;
    bool open = false;
    for (const auto& [a, b] : iv) {
        if (!(b > a)) continue;
        if (!open || a > hi) {
            if (open) total += hi - lo;
            lo = a;
            hi = b;
            open = true;
        } else {
            hi = std::max(hi, b);
        }
    }
    if (open) total += hi - lo;
    return total;
}

// Copies [c - h + 2 pi k, c + h + 2 pi k] clipped to [lo, hi].
void periodic_segments(double c, double h, double lo, double hi, std::vector<Segment>& out)
{
    const double k0 = std::floor((lo - c - h) / two_pi);
    const double k1 = std::ceil((hi - c + h) / two_pi);
    for (double k = k0; k <= k1; k += 1.0) {
        const double a = std::max(lo, c - h + two_pi * k);
        const double b = std::min(hi, c + h + two_pi * k);
        if (b > a) out.emplace_back(a, b);
    }
}

double segments_length(const std::vector<Segment>& s)
{
    double total = 0.0;
    for (const auto& [a, b] : s) total += b - a;
    return total;
}

std::vector<i64> coprime_residues(i64 q)
{
    std::vector<i64> out;
    for (i64 a = 1; a <= q; ++a)
        if (nt::gcd(a, q) == 1) out.push_back(a);
    return out;
}

std::vector<i64> even_residues(i64 q)
{
    std::vector<i64> out;
    for (i64 a = 2; a <= q / 2; a += 2) out.push_back(a);
    return out;
}

// Number of b in `residues` with |y - 2 pi b / q| <= h on the circle.
i64 count_near(double y, double h, i64 q, const std::vector<i64>& residues)
{
    i64 n = 0;
    for (i64 b : residues)
        if (circle_distance(y, two_pi * static_cast<double>(b) / static_cast<double>(q)) <= h) ++n;
    return n;
}

double box_half_width(const CounterexampleParams& cp)
{
    return cp.k.c1 * std::pow(cp.R(), cp.gamma() / 2.0 - 1.0);
}

std::size_t pick(const std::vector<double>& cumulative, double u)
{
    const double target = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(i, cumulative.size() - 1);
}

// Torus boxes [c_i - h_i, c_i + h_i] split at the 2 pi seam.
void torus_box(const std::vector<double>& c, const std::vector<double>& h,
               std::vector<std::vector<Segment>>& out)
{
    std::vector<std::vector<Segment>> axes(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) circle_pieces(c[i], h[i], axes[i]);
    std::vector<std::size_t> idx(c.size(), 0);
    while (true) {
        std::vector<Segment> box(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) box[i] = axes[i][idx[i]];
        out.push_back(std::move(box));
        std::size_t i = 0;
        while (i < c.size() && ++idx[i] == axes[i].size()) idx[i++] = 0;
        if (i == c.size()) break;
    }
}

// Boxes centred at 2 pi a / q for every a in `residues`^k, half width h.
void grid_boxes(i64 q, const std::vector<i64>& residues, int k, double h,
                std::vector<std::vector<Segment>>& out)
{
    if (residues.empty()) return;
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    const std::vector<double> hw(static_cast<std::size_t>(k), h);
    std::vector<double> c(static_cast<std::size_t>(k));
    while (true) {
        for (int i = 0; i < k; ++i) c[i] = two_pi * static_cast<double>(residues[idx[i]]) / static_cast<double>(q);
        torus_box(c, hw, out);
        int i = 0;
        while (i < k && ++idx[i] == residues.size()) idx[i++] = 0;
        if (i == k) break;
    }
}

double normalized_union(const std::vector<std::vector<Segment>>& boxes, int k)
{
    return nt::union_measure(boxes) / std::pow(two_pi, k);
}

}  // namespace

// -----------------------------------------------------------------------------

double circle_distance(double a, double b)
{
    const double r = wrap_angle(a - b);
    return std::min(r, two_pi - r);
}

std::vector<i64> admissible_moduli(const CounterexampleParams& cp)
{
    std::vector<i64> out;
    const double lo = cp.q_min() * (1.0 - 1e-12);
    const double hi = cp.q_max() * (1.0 + 1e-12);
    for (i64 q = 4; static_cast<double>(q) <= hi; q += 4)
        if (static_cast<double>(q) >= lo) out.push_back(q);
    if (out.empty()) {
        std::ostringstream os;
        os << "no q = 0 mod 4 in [4 mu0 Q, 4Q] = [" << cp.q_min() << ", " << cp.q_max() << "] at R = " << cp.R()
           << "; R is too small for the construction";
        throw std::domain_error(os.str());
    }
    return out;
}

bool anchor_admissible(const CounterexampleParams& cp, const RationalAnchor& a)
{
    const double q = static_cast<double>(a.q);
    if (a.q <= 0 || a.q % 4 != 0) return false;
    if (q < cp.q_min() * (1.0 - 1e-12) || q > cp.q_max() * (1.0 + 1e-12)) return false;
    if (a.a1 < 1 || a.a1 > a.q || nt::gcd(a.a1, a.q) != 1) return false;
    if (static_cast<int>(a.a_rest.size()) != cp.d() - 1) return false;
    for (i64 b : a.a_rest)
        if (b % 2 != 0 || b < 2 || b > a.q / 2) return false;
    return true;
}

double anchor_count(const CounterexampleParams& cp)
{
    double total = 0.0;
    for (i64 q : admissible_moduli(cp))
        total += static_cast<double>(nt::totient(q)) * std::pow(static_cast<double>(q / 4), cp.d() - 1);
    return total;
}

std::vector<RationalAnchor> enumerate_anchors(const CounterexampleParams& cp, std::size_t limit,
                                              std::uint64_t seed)
{
    const auto qs = admissible_moduli(cp);
    const int k = cp.d() - 1;
    std::vector<std::uint64_t> block;
    std::uint64_t total = 0;
    for (i64 q : qs) {
        std::uint64_t n = static_cast<std::uint64_t>(nt::totient(q));
        for (int i = 0; i < k; ++i) n *= static_cast<std::uint64_t>(q / 4);
        block.push_back(n);
        total += n;
    }

    std::vector<std::uint64_t> chosen;
    if (total <= limit) {
        chosen.resize(total);
        std::iota(chosen.begin(), chosen.end(), std::uint64_t{0});
    } else {
        // Floyd's algorithm: a uniform subset of size `limit`.
        Rng rng(seed, 0x616e63686f72ULL);
        std::unordered_set<std::uint64_t> picked;
        for (std::uint64_t j = total - limit; j < total; ++j) {
            const std::uint64_t v = rng.below(j + 1);
            if (!picked.insert(v).second) picked.insert(j);
        }
        chosen.assign(picked.begin(), picked.end());
        std::sort(chosen.begin(), chosen.end());
    }

    std::vector<RationalAnchor> out;
    out.reserve(chosen.size());
    std::size_t b = 0;
    std::uint64_t offset = 0;
    std::vector<i64> units = coprime_residues(qs[0]);
    for (std::uint64_t idx : chosen) {
        while (idx >= offset + block[b]) {
            offset += block[b++];
            units = coprime_residues(qs[b]);
        }
        const i64 q = qs[b];
        std::uint64_t r = idx - offset;
        RationalAnchor a;
        a.q = q;
        a.a_rest.resize(static_cast<std::size_t>(k));
        const std::uint64_t base = static_cast<std::uint64_t>(q / 4);
        for (int i = k - 1; i >= 0; --i) {
            a.a_rest[static_cast<std::size_t>(i)] = 2 * static_cast<i64>(r % base + 1);
            r /= base;
        }
        a.a1 = units[r];
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<double> OmegaCell::centers() const
{
    std::vector<double> c;
    c.push_back(two_pi * static_cast<double>(anchor.a1) / static_cast<double>(anchor.q));
    for (i64 b : anchor.a_rest) c.push_back(two_pi * static_cast<double>(b) / static_cast<double>(anchor.q));
    return c;
}

bool OmegaCell::contains(const std::vector<double>& y) const
{
    const auto c = centers();
    if (y.size() != c.size()) throw std::invalid_argument("OmegaCell::contains: dimension mismatch");
    for (std::size_t i = 0; i < c.size(); ++i)
        if (circle_distance(y[i], c[i]) > half_widths[i]) return false;
    return true;
}

OmegaCell omega_cell(const CounterexampleParams& cp, const RationalAnchor& a)
{
    if (!anchor_admissible(cp, a)) throw std::invalid_argument("omega_cell: anchor is not admissible");
    OmegaCell cell;
    cell.anchor = a;
    cell.half_widths.push_back(cp.half_width_first());
    for (int j = 1; j < cp.d(); ++j) cell.half_widths.push_back(cp.half_width_rest());
    return cell;
}

double omega_multiplicity(const CounterexampleParams& cp, const std::vector<double>& y)
{
    if (static_cast<int>(y.size()) != cp.d()) throw std::invalid_argument("omega_multiplicity: dimension mismatch");
    const double a1w = cp.half_width_first();
    const double ajw = cp.half_width_rest();
    double total = 0.0;
    for (i64 q : admissible_moduli(cp)) {
        const double qd = static_cast<double>(q);
        // Candidates for a1 lie within a1w * q / (2 pi) + 1 of y1 q / (2 pi).
        const double centre = y[0] * qd / two_pi;
        const i64 lo = static_cast<i64>(std::floor(centre - a1w * qd / two_pi)) - 1;
        const i64 hi = static_cast<i64>(std::ceil(centre + a1w * qd / two_pi)) + 1;
        i64 n1 = 0;
        for (i64 a = lo; a <= hi && a - lo < q; ++a) {
            const i64 r = nt::mod(a, q) == 0 ? q : nt::mod(a, q);
            if (nt::gcd(r, q) == 1 && circle_distance(y[0], two_pi * static_cast<double>(r) / qd) <= a1w) ++n1;
        }
        if (n1 == 0) continue;
        double prod = static_cast<double>(n1);
        const auto evens = even_residues(q);
        for (int j = 1; j < cp.d() && prod > 0.0; ++j) prod *= static_cast<double>(count_near(y[j], ajw, q, evens));
        total += prod;
    }
    return total;
}

double v1_measure(const CounterexampleParams& cp, i64 q)
{
    std::vector<Segment> pieces;
    for (i64 a : coprime_residues(q))
        circle_pieces(two_pi * static_cast<double>(a) / static_cast<double>(q), cp.half_width_first(), pieces);
    return union_length(std::move(pieces));
}

OmegaLowerBound omega_measure_lower(const CounterexampleParams& cp)
{
    OmegaLowerBound out;
    out.min_v1 = std::numeric_limits<double>::infinity();
    for (i64 q : admissible_moduli(cp)) {
        const double v = v1_measure(cp, q);
        if (v < out.min_v1) {
            out.min_v1 = v;
            out.argmin_q = q;
        }
    }
    out.c_eps0 = out.min_v1 * std::pow(cp.Q, cp.k.eps0);
    out.bound = out.c_eps0 * v2_measure_lower(cp) * std::pow(cp.Q, -cp.k.eps0);
    return out;
}

double v2_measure_lower(const CounterexampleParams& cp)
{
    const int d = cp.d();
    return std::ldexp(1.0, -d) * std::pow(3.0, 1 - d) * std::pow(cp.k.c4, d - 1);
}

V2Chain v2_rescaling_chain(const CounterexampleParams& cp)
{
    const int k = cp.d() - 1;
    const double root = std::pow(cp.Q, 1.0 / k);
    const i64 q_top = static_cast<i64>(std::floor(cp.Q * (1.0 + 1e-12)));
    const double q_small = cp.mu0 * cp.Q;

    V2Chain out;
    std::vector<std::vector<Segment>> all, tail, rescaled;
    for (i64 q = 1; q <= q_top; ++q) {
        std::vector<i64> res(static_cast<std::size_t>(q));
        std::iota(res.begin(), res.end(), i64{0});
        const double h = two_pi / (static_cast<double>(q) * root);
        grid_boxes(q, res, k, h, all);
        if (static_cast<double>(q) < q_small) {
            out.small_q_mass += std::pow(static_cast<double>(q), k) * std::pow(2.0 * h / two_pi, k);
        } else {
            grid_boxes(q, res, k, h, tail);
            // q' = 4q, a' = 2a: centres 2 pi a'/q' = pi a/q, half width 4 pi/(q' Q^{1/k}).
            std::vector<i64> doubled(res.size());
            for (std::size_t i = 0; i < res.size(); ++i) doubled[i] = 2 * res[i];
            grid_boxes(4 * q, doubled, k, pi / (static_cast<double>(q) * root), rescaled);
        }
    }
    out.dirichlet_cover = normalized_union(all, k);
    out.tail_cover = normalized_union(tail, k);
    out.rescaled_cover = normalized_union(rescaled, k);

    std::vector<std::vector<Segment>> v2;
    for (i64 q : admissible_moduli(cp)) grid_boxes(q, even_residues(q), k, cp.half_width_rest(), v2);
    out.v2_measure = normalized_union(v2, k);
    out.bound = v2_measure_lower(cp);
    out.holds = out.dirichlet_cover >= 1.0 - 1e-9 && out.small_q_mass < 0.5 && out.tail_cover >= 0.5 &&
                out.rescaled_cover >= std::ldexp(1.0, -cp.d()) && out.v2_measure >= out.bound;
    return out;
}

// -----------------------------------------------------------------------------

double first_axis_scale(const CounterexampleParams& cp)
{
    return cp.D * cp.D / (2.0 * cp.r_half);
}

namespace {

// Preimage geometry of the Omega cells inside the box.  Axis 1 uses
// u = -M1 x1 in [M1 w/2, M1 w]; the other axes use u = D x_j in [-D c1, D c1].
struct PreimageTable {
    struct Modulus {
        i64 q = 0;
        std::vector<i64> a1;
        std::vector<std::vector<Segment>> seg1;
        std::vector<double> cum1;
        std::vector<i64> aj;
        std::vector<std::vector<Segment>> segj;
        std::vector<double> cumj;
        double len1 = 0.0;   // x-measure of the axis-1 preimages
        double lenj = 0.0;   // x-measure of one rest-axis preimage (sum over a_j)
        double volume = 0.0;
    };
    std::vector<Modulus> moduli;
    std::vector<double> cum_volume;
    double volume = 0.0;
    double m1 = 0.0;
};

std::vector<double> cumulative_lengths(const std::vector<std::vector<Segment>>& segs)
{
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& s : segs) cum.push_back(acc += segments_length(s));
    return cum;
}

PreimageTable build_preimages(const CounterexampleParams& cp)
{
    PreimageTable t;
    t.m1 = first_axis_scale(cp);
    const double w = box_half_width(cp);
    const double u1_lo = t.m1 * w / 2.0, u1_hi = t.m1 * w;
    const double uj = cp.D * cp.k.c1;
    const int k = cp.d() - 1;
    double acc = 0.0;
    for (i64 q : admissible_moduli(cp)) {
        PreimageTable::Modulus m;
        m.q = q;
        const double qd = static_cast<double>(q);
        for (i64 a : coprime_residues(q)) {
            std::vector<Segment> s;
            periodic_segments(two_pi * static_cast<double>(a) / qd, cp.half_width_first(), u1_lo, u1_hi, s);
            if (s.empty()) continue;
            m.a1.push_back(a);
            m.seg1.push_back(std::move(s));
        }
        for (i64 a : even_residues(q)) {
            std::vector<Segment> s;
            periodic_segments(two_pi * static_cast<double>(a) / qd, cp.half_width_rest(), -uj, uj, s);
            if (s.empty()) continue;
            m.aj.push_back(a);
            m.segj.push_back(std::move(s));
        }
        if (m.a1.empty() || m.aj.empty()) continue;
        m.cum1 = cumulative_lengths(m.seg1);
        m.cumj = cumulative_lengths(m.segj);
        m.len1 = m.cum1.back() / t.m1;
        m.lenj = m.cumj.back() / cp.D;
        m.volume = m.len1 * std::pow(m.lenj, k);
        acc += m.volume;
        t.cum_volume.push_back(acc);
        t.moduli.push_back(std::move(m));
    }
    t.volume = acc;
    if (t.moduli.empty() || !(t.volume > 0.0)) {
        std::ostringstream os;
        os << "no Omega cell has a preimage in the box at R = " << cp.R() << " (first-axis arc "
           << u1_hi - u1_lo << " rad); c1 too small for this R";
        throw std::domain_error(os.str());
    }
    return t;
}

double draw_in_segments(const std::vector<Segment>& segs, Rng& rng)
{
    double total = segments_length(segs);
    double target = rng.uniform() * total;
    for (const auto& [a, b] : segs) {
        if (target <= b - a) return a + target;
        target -= b - a;
    }
    return segs.back().second;
}

}  // namespace

OmegaStarSampling sample_omega_star(const CounterexampleParams& cp, std::size_t n, std::uint64_t seed,
                                    unsigned workers)
{
    const PreimageTable table = build_preimages(cp);
    OmegaStarSampling out;
    out.preimage_volume = table.volume;
    out.reachable_moduli = static_cast<i64>(table.moduli.size());
    out.samples.resize(n);
    const int d = cp.d();

    parallel_for(n, workers, [&](std::size_t i) {
        Rng rng(seed, i);
        const auto& m = table.moduli[pick(table.cum_volume, rng.uniform())];
        OmegaStarSample s;
        s.anchor.q = m.q;
        const std::size_t i1 = pick(m.cum1, rng.uniform());
        s.anchor.a1 = m.a1[i1];
        const double u1 = draw_in_segments(m.seg1[i1], rng);
        s.x.push_back(-u1 / table.m1);
        s.y.push_back(wrap_angle(u1));
        for (int j = 1; j < d; ++j) {
            const std::size_t ij = pick(m.cumj, rng.uniform());
            s.anchor.a_rest.push_back(m.aj[ij]);
            const double u = draw_in_segments(m.segj[ij], rng);
            s.x.push_back(u / cp.D);
            s.y.push_back(wrap_angle(u));
        }
        s.multiplicity = std::max(1.0, omega_multiplicity(cp, s.y));
        out.samples[i] = std::move(s);
    });

    if (n > 0) {
        double sum = 0.0, sum2 = 0.0;
        for (const auto& s : out.samples) {
            const double w = 1.0 / s.multiplicity;
            sum += w;
            sum2 += w * w;
        }
        const double mean = sum / static_cast<double>(n);
        const double var = n > 1 ? std::max(0.0, (sum2 - sum * mean) / static_cast<double>(n - 1)) : 0.0;
        out.measure_estimate = table.volume * mean;
        out.measure_stderr = table.volume * std::sqrt(var / static_cast<double>(n));
    }
    return out;
}

bool omega_star_sample_valid(const CounterexampleParams& cp, const OmegaStarSample& s, double tol)
{
    if (static_cast<int>(s.x.size()) != cp.d() || s.y.size() != s.x.size()) return false;
    if (!in_counterexample_box(cp, {s.x, 0.0})) return false;
    if (circle_distance(s.y[0], -first_axis_scale(cp) * s.x[0]) > tol) return false;
    for (int j = 1; j < cp.d(); ++j)
        if (circle_distance(s.y[j], cp.D * s.x[j]) > tol) return false;
    return anchor_admissible(cp, s.anchor) && omega_cell(cp, s.anchor).contains(s.y);
}

double omega_star_measure_exact(const CounterexampleParams& cp)
{
    const auto qs = admissible_moduli(cp);
    std::vector<double> centres;
    for (i64 q : qs)
        for (i64 a : coprime_residues(q)) centres.push_back(two_pi * static_cast<double>(a) / static_cast<double>(q));
    std::sort(centres.begin(), centres.end());
    const double a1w = cp.half_width_first();
    for (std::size_t i = 0; i < centres.size(); ++i) {
        const double next = i + 1 < centres.size() ? centres[i + 1] : centres[0] + two_pi;
        if (next - centres[i] <= 2.0 * a1w)
            throw std::domain_error("omega_star_measure_exact: first-axis cells overlap");
    }

    const double m1 = first_axis_scale(cp);
    const double w = box_half_width(cp);
    const double uj = cp.D * cp.k.c1;
    double total = 0.0;
    for (i64 q : qs) {
        const double qd = static_cast<double>(q);
        std::vector<Segment> s1, sj;
        for (i64 a : coprime_residues(q)) periodic_segments(two_pi * a / qd, a1w, m1 * w / 2.0, m1 * w, s1);
        for (i64 a : even_residues(q)) periodic_segments(two_pi * a / qd, cp.half_width_rest(), -uj, uj, sj);
        total += segments_length(s1) / m1 * std::pow(union_length(std::move(sj)) / cp.D, cp.d() - 1);
    }
    return total;
}

double omega_star_measure_lower(const CounterexampleParams& cp)
{
    const int d = cp.d();
    return std::pow(cp.k.c1, d) / (4.0 * std::pow(two_pi, d)) * omega_measure_lower(cp).bound *
           std::pow(cp.R(), cp.gamma() / 2.0 - 1.0);
}

// -----------------------------------------------------------------------------

TimeSelection select_time_detail(const CounterexampleParams& cp, const OmegaStarSample& sample)
{
    if (static_cast<int>(sample.x.size()) != cp.d() || sample.y.empty())
        throw std::invalid_argument("select_time: sample dimension does not match d");
    const double target = two_pi * static_cast<double>(sample.anchor.a1) / static_cast<double>(sample.anchor.q);
    double s = wrap_angle(target - sample.y[0]);
    if (s > pi) s -= two_pi;
    TimeSelection out;
    out.s = s;
    out.tau = s / (cp.D * cp.D);
    const double window = cp.k.c2 * std::pow(cp.R(), -(cp.gamma() + 1.0) / 2.0);
    if (!(std::abs(out.tau) < window)) {
        std::ostringstream os;
        os << "select_time: |tau| = " << std::abs(out.tau) << " exceeds c2 R^{-(gamma+1)/2} = " << window;
        throw std::domain_error(os.str());
    }
    out.t = -sample.x[0] / (2.0 * cp.r_half) + out.tau;
    if (!(out.t > 0.0)) throw std::domain_error("select_time: selected time is not positive");
    return out;
}

double select_time(const CounterexampleParams& cp, const OmegaStarSample& sample)
{
    return select_time_detail(cp, sample).t;
}

LatticeSums lattice_sum_S(const CounterexampleParams& cp, const std::vector<double>& x_rest, double t, double u)
{
    if (static_cast<int>(x_rest.size()) != cp.d() - 1)
        throw std::invalid_argument("lattice_sum_S: x_rest must have d-1 entries");
    const i64 end = static_cast<i64>(std::ceil(u));
    const double theta = cp.D * cp.D * t;
    LatticeSums out;
    for (double xj : x_rest) {
        const double dx = cp.D * xj;
        cplx acc = 0.0;
        for (i64 l = cp.ell_begin(); l < end; ++l) {
            const double lf = static_cast<double>(l);
            acc += std::polar(1.0, lf * dx + lf * lf * theta);
        }
        out.per_axis.push_back(acc);
        out.product *= acc;
    }
    return out;
}

std::vector<cplx> lattice_sum_S_tilde(const CounterexampleParams& cp, const RationalAnchor& a, double theta, double u)
{
    const i64 end = static_cast<i64>(std::ceil(u));
    const double th = wrap_angle(theta);
    std::vector<cplx> out;
    for (i64 b : a.a_rest) {
        cplx acc = 0.0;
        for (i64 l = cp.ell_begin(); l < end; ++l) {
            const double lin = two_pi * static_cast<double>(nt::mod(l * b, a.q)) / static_cast<double>(a.q);
            const double quad_phase = wrap_angle(static_cast<double>(l) * static_cast<double>(l) * th);
            acc += std::polar(1.0, lin + quad_phase);
        }
        out.push_back(acc);
    }
    return out;
}

cplx lattice_sum_S_tilde_rational(const CounterexampleParams& cp, i64 q, i64 a1, i64 aj, i64 count)
{
    if (count <= 0) return 0.0;
    return nt::weyl_sum_rational(a1, q, aj, q, cp.ell_begin(), count);
}

double main_term_scale(const CounterexampleParams& cp)
{
    return cp.r_half / (cp.D * std::sqrt(cp.Q));
}

ErrorBudget error_budget(const CounterexampleParams& cp, double t)
{
    const int d = cp.d();
    const double m = main_term_scale(cp);
    const double fp = std::pow(4.0 * pi, d);
    ErrorBudget out;
    out.e1_bound = std::ldexp(1.0, d + 1) * std::pow(2.0 * fp, d - 2) * cp.R() * t * std::pow(m, d - 1);
    out.e2_bound = (std::ldexp(1.0, d - 1) - 1.0) *
                   (cp.k.c_delta0 * std::pow(cp.R(), -cp.k.delta0) + 12.0 * cp.k.c4 * fp * fp) * m *
                   std::pow(std::sqrt(2.0) * std::pow(4.0 * pi, d / 2.0) * m, d - 2);
    out.threshold = std::pow(2.0, -(d + 5) / 2.0) * std::pow(m, d - 1);
    out.e1_admissible = out.e1_bound <= out.threshold;
    out.e2_admissible = out.e2_bound <= out.threshold;
    out.admissible = out.e1_admissible && out.e2_admissible;
    return out;
}

MainTermCalibration calibrate_main_term(const CounterexampleParams& cp)
{
    MainTermCalibration out;
    const double m = main_term_scale(cp);
    const double scale = m * std::pow(cp.R(), -cp.k.delta0);
    const double fp = std::pow(4.0 * pi, cp.d());
    const i64 count = cp.lattice_count();
    for (i64 q : admissible_moduli(cp)) {
        const double expected = std::sqrt(2.0) * cp.lattice_scale / std::sqrt(static_cast<double>(q));
        for (i64 a1 : coprime_residues(q))
            for (i64 aj : even_residues(q)) {
                const double mod = std::abs(lattice_sum_S_tilde_rational(cp, q, a1, aj, count));
                const double dev = std::abs(mod - expected);
                ++out.sums;
                out.max_modulus_ratio = std::max(out.max_modulus_ratio, mod / (fp * m));
                if (dev > out.max_deviation) {
                    out.max_deviation = dev;
                    out.argmax_q = q;
                    out.argmax_a1 = a1;
                    out.argmax_aj = aj;
                }
            }
    }
    out.c_delta0 = out.max_deviation / scale;
    return out;
}

double calibrate_c_delta0(int d, double gamma)
{
    auto k = CounterexampleConstants::defaults(d, gamma);
    double c = 0.0;
    for (int e = 12; e <= 18; e += 2) {
        const auto cp = CounterexampleParams::make({d, gamma, std::ldexp(1.0, e), 0.0}, k);
        c = std::max(c, calibrate_main_term(cp).c_delta0);
    }
    return c;
}

double frozen_c_delta0(int d, double gamma)
{
    return CounterexampleConstants::defaults(d, gamma).c_delta0;
}

// -----------------------------------------------------------------------------

double budget_c4(int d)
{
    const double fp = std::pow(4.0 * pi, d);
    const double parts = std::ldexp(1.0, d - 1) - 1.0;
    const double growth = std::pow(std::sqrt(2.0) * std::pow(4.0 * pi, d / 2.0), d - 2);
    return std::pow(2.0, -(d + 7) / 2.0) / (parts * 12.0 * fp * fp * growth);
}

double effective_gamma(double gamma)
{
    return gamma > 2.0 ? 2.0 : gamma;
}

LowerBoundResult lower_bound_experiment(const LowerBoundConfig& cfg)
{
    if (cfg.ladder.size() < 4) throw std::invalid_argument("ladder: needs at least 4 R values");
    for (std::size_t i = 1; i < cfg.ladder.size(); ++i)
        if (!(cfg.ladder[i] > cfg.ladder[i - 1])) throw std::invalid_argument("ladder: must be increasing");
    if (cfg.samples == 0) throw std::invalid_argument("samples: must be positive");

    LowerBoundResult res;
    const double g = effective_gamma(cfg.gamma);
    res.effective_gamma = g;
    const int d = cfg.d;
    res.target_ratio_slope = d * (g - 1.0) / (2.0 * (d + 1.0)) - g * cfg.s / 2.0;
    res.target_modulus_slope = (g - 1.0) * (d - 1.0) / 4.0;

    CounterexampleConstants k = CounterexampleConstants::defaults(d, g);
    if (cfg.constants) {
        k = *cfg.constants;
    } else {
        k.c4 = budget_c4(d);
    }
    if (!(k.c_delta0 > 0.0)) {
        k.c_delta0 = calibrate_c_delta0(d, g);
    }
    res.c_delta0 = k.c_delta0;

    for (std::size_t idx = 0; idx < cfg.ladder.size(); ++idx) {
        LowerBoundRecord rec;
        rec.R = cfg.ladder[idx];
        rec.measure_exact = std::numeric_limits<double>::quiet_NaN();
        try {
            const auto cp = CounterexampleParams::make({d, g, rec.R, cfg.s}, k);
            const auto sampling = sample_omega_star(cp, cfg.samples, splitmix64(cfg.seed + idx), cfg.workers);
            const std::size_t n = sampling.samples.size();
            std::vector<double> modulus(n), e1(n), e2(n), i1(n);
            const double norm = std::pow(two_pi, -d);
            const double u_end = static_cast<double>(cp.ell_end());
            parallel_for(n, cfg.workers, [&](std::size_t i) {
                const auto& s = sampling.samples[i];
                const double t = select_time(cp, s);
                const auto fe = factorized_evaluate(cp, {s.x, t}, {cfg.panels, true});
                modulus[i] = norm * fe.product_modulus;
                i1[i] = std::abs(fe.i1);
                e1[i] = error_budget(cp, t).e1_bound;
                const std::vector<double> rest(s.x.begin() + 1, s.x.end());
                const auto sums = lattice_sum_S(cp, rest, t, u_end);
                const double expected =
                    std::sqrt(2.0) * cp.lattice_scale / std::sqrt(static_cast<double>(s.anchor.q));
                double worst = 0.0;
                for (const auto& v : sums.per_axis) worst = std::max(worst, std::abs(std::abs(v) - expected));
                e2[i] = worst;
            });
            double wsum = 0.0, msum = 0.0, m2sum = 0.0;
            rec.min_i1 = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                const double w = 1.0 / sampling.samples[i].multiplicity;
                wsum += w;
                msum += w * modulus[i];
                m2sum += w * modulus[i] * modulus[i];
                rec.e1_bound = std::max(rec.e1_bound, e1[i]);
                rec.e2_observed = std::max(rec.e2_observed, e2[i]);
                rec.min_i1 = std::min(rec.min_i1, i1[i]);
            }
            rec.mean_modulus = msum / wsum;
            rec.mean_square = m2sum / wsum;
            rec.measure_estimate = sampling.measure_estimate;
            rec.measure_stderr = sampling.measure_stderr;
            try {
                rec.measure_exact = omega_star_measure_exact(cp);
            } catch (const std::domain_error&) {
            }
            rec.measure_lower = omega_star_measure_lower(cp);
            rec.sobolev = sobolev_norm(SpectrumDescriptor::case3(cp), cfg.s);
            rec.ratio_estimate = std::sqrt(rec.measure_estimate) * rec.mean_modulus / rec.sobolev;
            const auto budget = error_budget(cp, 0.0);
            rec.e2_bound = budget.e2_bound;
            rec.threshold = budget.threshold;
            rec.admissible = rec.e1_bound <= rec.threshold && rec.e2_bound <= rec.threshold;
            if (!rec.admissible) {
                std::ostringstream os;
                os << "error budget inadmissible: E1 = " << rec.e1_bound << ", E2 = " << rec.e2_bound
                   << ", threshold = " << rec.threshold << "; observed E2 = " << rec.e2_observed;
                rec.diagnosis = os.str();
                if (cfg.budget == BudgetPolicy::abort) rec.aborted = true;
            }
        } catch (const std::domain_error& e) {
            rec.aborted = true;
            rec.diagnosis = e.what();
        }
        res.records.push_back(std::move(rec));
    }

    std::vector<double> r, ratio, modulus;
    for (const auto& rec : res.records)
        if (!rec.aborted) {
            r.push_back(rec.R);
            ratio.push_back(rec.ratio_estimate);
            modulus.push_back(rec.mean_modulus);
        }
    if (r.size() >= 2) {
        res.ratio_slope = fit_loglog(r, ratio).slope;
        res.modulus_slope = fit_loglog(r, modulus).slope;
    } else {
        res.ratio_slope = res.modulus_slope = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

Case1Sanity case1_sanity(int d, double R, std::size_t samples, std::uint64_t seed)
{
    const auto g = SpectrumDescriptor::case1(d, R);
    Case1Sanity out;
    out.radius = 1.0 / (1000.0 * R);
    out.min_normalized = std::numeric_limits<double>::infinity();
    Rng rng(seed);
    const double scale = std::pow(two_pi, d);
    for (std::size_t i = 0; i < samples; ++i) {
        std::vector<double> x(static_cast<std::size_t>(d));
        double r2;
        do {
            r2 = 0.0;
            for (auto& v : x) {
                v = rng.uniform(-out.radius, out.radius);
                r2 += v * v;
            }
        } while (r2 > out.radius * out.radius);
        const double v = scale * std::abs(evaluate_free(g, {x, 0.0}));
        out.min_normalized = std::min(out.min_normalized, v);
        out.max_normalized = std::max(out.max_normalized, v);
    }
    return out;
}

}  // namespace schrolab
