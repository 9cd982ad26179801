// maximal.hpp
//
// Time suprema of |P_gamma f| on a ball, the maximal ratio
// || sup_t |P_gamma f| ||_{L^2(B(0,1))} / ||f||_2, R-ladder sweeps and their
// log-log slopes against the threshold exponent.

#pragma once

#include "schrolab/counterexample.hpp"
#include "schrolab/profiles.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrolab {

struct TimeGrid {
    enum class Kind { hybrid, uniform, single };

    std::vector<double> t;  // strictly increasing, in (0, 1]
    Kind kind = Kind::single;
    std::size_t geometric = 0;
    std::size_t uniform = 0;
    std::size_t tail = 0;
    double spacing = 0.0;    // uniform-part spacing
    double R = 0.0;
    double spacing_factor = 0.0;
    std::size_t cap = 0;

    double t_min() const { return t.front(); }
    double t_max() const { return t.back(); }
    std::size_t count() const { return t.size(); }

    // `geometric` points in (0, R^-2], then spacing R^-2 * spacing_factor up
    // to 1 with at most `cap` points, then a geometric tail to 1.
    static TimeGrid hybrid(double R, std::size_t geometric = 64, double spacing_factor = 0.25,
                           std::size_t cap = std::size_t{1} << 14, std::size_t tail = 64);
    static TimeGrid uniform_grid(double t_min, double t_max, std::size_t count);
    static TimeGrid single(double t);

    // Twice as many points of every kind.
    TimeGrid refined() const;
    void validate() const;
};

struct SpaceGrid {
    double radius = 1.0;
    int count = 128;  // cells per axis over [-radius, radius]

    std::vector<double> axis() const;  // cell midpoints
    double spacing() const { return 2.0 * radius / count; }
    SpaceGrid refined() const { return {radius, 2 * count}; }
    void validate() const;
};

struct SupOptions {
    int golden_iterations = 30;
};

// max over the grid of |P_gamma f(x, t)|, then golden-section refinement on
// the two cells around the grid argmax.
double sup_over_time(const SpectrumDescriptor& f, double gamma, const std::vector<double>& x, const TimeGrid& tg,
                     const SupOptions& opt = {});

// Midpoint-rule L^2 norm over B(0, radius); values are the count^d grid
// samples in row-major order (last axis fastest).
double l2_ball_norm(const std::vector<double>& values, const SpaceGrid& g, int d);

struct MaximalOptions {
    int golden_iterations = 30;
    // The time scan stops once the pointwise majorant can no longer move the
    // L^2 norm of the running supremum by more than this relative amount.
    double truncation_tol = 1e-6;
    unsigned workers = 1;
};

struct MaximalResult {
    double ratio = 0.0;
    double sup_norm = 0.0;
    double f_norm = 0.0;
    std::size_t times_used = 0;
    bool truncated = false;
};

MaximalResult maximal_ratio(const SpectrumDescriptor& f, double gamma, const TimeGrid& tg, const SpaceGrid& sg,
                            const MaximalOptions& opt = {});

// min{d/(2(d+1)), (d/(d+1)) max(1 - 1/gamma, 0)}.
double theoretical_exponent(int d, double gamma);

// 1 + R^{d/(d+1)+eps} J^{d/(2(d+1))} for J <= 1/R, else R^{d/(2(d+1))+eps}.
double lemma1_bound(double R, double J_len, double eps, int d);

enum class FamilyKind { upper, extremal };

struct ScalingEntry {
    double R = 0.0;
    double ratio = 0.0;
    std::size_t time_points = 0;
    std::size_t times_used = 0;
    int space_count = 0;
    double seconds = 0.0;
};

struct ScalingReport {
    std::vector<ScalingEntry> entries;
    double fitted_slope = 0.0;
    double slope_stderr = 0.0;
    double target = 0.0;
    FamilyKind kind = FamilyKind::upper;
    bool verdict = false;  // slope <= target + tol (upper) or >= target - tol (extremal)
    double tolerance = 0.1;

    // Slope of the fit over the first i+1 entries (NaN for i = 0).
    std::vector<double> running_slopes() const;
};

// Sorts entries, fits the log-log slope and sets the verdict.
ScalingReport make_scaling_report(std::vector<ScalingEntry> entries, double target, FamilyKind kind,
                                  double tolerance = 0.1);

// The lower-bound experiment's ratios as a scaling report.
ScalingReport case3_scaling_report(const LowerBoundResult& r, int d);

struct SweepOptions {
    int space_count = 128;
    std::size_t geometric = 64;
    double spacing_factor = 0.25;
    std::size_t cap = std::size_t{1} << 14;
    std::size_t tail = 64;
    MaximalOptions maximal;
};

class SweepError : public std::runtime_error {
public:
    SweepError(const std::string& what, ScalingReport partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const ScalingReport& partial() const { return partial_; }

private:
    ScalingReport partial_;
};

// maximal_ratio at each R of a geometric ladder (>= 4 entries).  A failing
// entry throws SweepError carrying the entries completed so far.
ScalingReport exponent_sweep(const std::function<SpectrumDescriptor(double)>& family, double gamma, int d,
                             const std::vector<double>& ladder, FamilyKind kind, const SweepOptions& opt = {});

}  // namespace schrolab
