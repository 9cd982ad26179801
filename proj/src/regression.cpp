#include "schrolab/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace schrolab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("fit_line: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae are all equal");
    LineFit f;
    f.n = static_cast<int>(n);
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            ss += r * r;
        }
        f.slope_stderr = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (double v : x) {
        if (!(v > 0.0)) throw std::invalid_argument("fit_loglog: abscissa must be positive");
        lx.push_back(std::log(v));
    }
    for (double v : y) {
        if (!(v > 0.0)) throw std::invalid_argument("fit_loglog: ordinate must be positive");
        ly.push_back(std::log(v));
    }
    return fit_line(lx, ly);
}

}  // namespace schrolab
