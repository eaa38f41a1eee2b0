#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace metastab {

// Small numerical kit shared by the modules.  Everything here is plain
// double-precision on std::vector; no external dependencies.

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

/// Adaptive Simpson on [a,b] with an absolute tolerance.  Values of f must
/// be finite on the closed interval.  Throws QuadratureFailure only via the
/// _or_throw wrapper; this variant reports convergence in the result.
QuadResult adaptive_simpson(const std::function<double(double)>& f,
                            double a, double b, double abs_tol,
                            int max_depth = 48);

/// Same, but throws QuadratureFailure when the tolerance was not reached.
double integrate_or_throw(const std::function<double(double)>& f,
                          double a, double b, double abs_tol,
                          const char* what);

/// Thomas solve of a tridiagonal system.  lower[0] and upper[n-1] are unused.
/// diag is overwritten; rhs is overwritten with the solution.
void solve_tridiagonal(const std::vector<double>& lower,
                       std::vector<double>& diag,
                       const std::vector<double>& upper,
                       std::vector<double>& rhs);

/// Cubic Hermite table y(x) with prescribed node slopes.  Nodes must be
/// strictly increasing.  Evaluation outside the node range clamps to the
/// end values (callers handle tails themselves).
class HermiteTable {
public:
    HermiteTable() = default;
    HermiteTable(std::vector<double> x, std::vector<double> y,
                 std::vector<double> slope);

    double operator()(double x) const;
    /// dy/dx of the interpolant; 0 outside the node range (the value clamps).
    double derivative(double x) const;
    double front_x() const { return x_.front(); }
    double back_x() const { return x_.back(); }
    double front_y() const { return y_.front(); }
    double back_y() const { return y_.back(); }
    std::size_t size() const { return x_.size(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    const std::vector<double>& slopes() const { return m_; }

    /// Fritsch-Carlson style limiting: clip slopes so the interpolant cannot
    /// overshoot monotone data.  Call once after construction when the data
    /// is monotone.
    void limit_slopes_monotone();

private:
    std::vector<double> x_, y_, m_;
    std::size_t locate(double x) const;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_abs_residual = 0.0;
    double r_squared = 1.0;
};

/// Least-squares straight line through (x_i, y_i); needs >= 2 points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace metastab
