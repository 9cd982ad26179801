// regression.hpp
//
// Ordinary least squares for a straight line, and the log-log variant used
// for scaling exponents.

#pragma once

#include <vector>

namespace schrolab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    int n = 0;
};

// Throws std::invalid_argument on fewer than 2 points, mismatched sizes or a
// degenerate abscissa.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Fit of log(y) against log(x); every value must be positive.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace schrolab
