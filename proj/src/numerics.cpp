#include "metastab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "metastab/errors.hpp"

namespace metastab {

namespace {

struct SimpsonPanel {
    double a, b;
    double fa, fm, fb;
    double estimate;
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

// Recursive bisection with the classic 15x Richardson acceptance test.
double adapt(const std::function<double(double)>& f, const SimpsonPanel& p,
             double tol, int depth, bool& ok, double& err_acc) {
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    SimpsonPanel left{p.a, m, p.fa, flm, p.fm, simpson(p.a, m, p.fa, flm, p.fm)};
    SimpsonPanel right{m, p.b, p.fm, frm, p.fb, simpson(m, p.b, p.fm, frm, p.fb)};
    const double two = left.estimate + right.estimate;
    const double diff = two - p.estimate;
    if (std::abs(diff) <= 15.0 * tol || depth <= 0) {
        if (depth <= 0 && std::abs(diff) > 15.0 * tol) ok = false;
        err_acc += std::abs(diff) / 15.0;
        return two + diff / 15.0;
    }
    return adapt(f, left, 0.5 * tol, depth - 1, ok, err_acc) +
           adapt(f, right, 0.5 * tol, depth - 1, ok, err_acc);
}

} // namespace

QuadResult adaptive_simpson(const std::function<double(double)>& f,
                            double a, double b, double abs_tol, int max_depth) {
    QuadResult r;
    if (a == b) return r;
    const double fa = f(a);
    const double fm = f(0.5 * (a + b));
    const double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb)) {
        r.converged = false;
        r.value = std::nan("");
        return r;
    }
    SimpsonPanel whole{a, b, fa, fm, fb, simpson(a, b, fa, fm, fb)};
    bool ok = true;
    double err = 0.0;
    r.value = adapt(f, whole, std::abs(abs_tol), max_depth, ok, err);
    r.error_estimate = err;
    r.converged = ok && std::isfinite(r.value);
    return r;
}

double integrate_or_throw(const std::function<double(double)>& f,
                          double a, double b, double abs_tol,
                          const char* what) {
    QuadResult r = adaptive_simpson(f, a, b, abs_tol);
    if (!r.converged)
        throw QuadratureFailure(std::string("quadrature did not converge: ") + what);
    return r.value;
}

void solve_tridiagonal(const std::vector<double>& lower,
                       std::vector<double>& diag,
                       const std::vector<double>& upper,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

HermiteTable::HermiteTable(std::vector<double> x, std::vector<double> y,
                           std::vector<double> slope)
    : x_(std::move(x)), y_(std::move(y)), m_(std::move(slope)) {
    if (x_.size() < 2 || x_.size() != y_.size() || x_.size() != m_.size())
        throw std::invalid_argument("HermiteTable: bad node arrays");
    for (std::size_t i = 0; i + 1 < x_.size(); ++i)
        if (!(x_[i] < x_[i + 1]))
            throw std::invalid_argument("HermiteTable: nodes not increasing");
}

std::size_t HermiteTable::locate(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.begin()) return 0;
    std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
}

double HermiteTable::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t k = locate(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
}

double HermiteTable::derivative(double x) const {
    if (x <= x_.front() || x >= x_.back()) return 0.0;
    const std::size_t k = locate(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double d00 = (6 * t2 - 6 * t) / h;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = (-6 * t2 + 6 * t) / h;
    const double d11 = 3 * t2 - 2 * t;
    return d00 * y_[k] + d10 * m_[k] + d01 * y_[k + 1] + d11 * m_[k + 1];
}

void HermiteTable::limit_slopes_monotone() {
    // Slopes come from an exact derivative, so this rarely changes anything;
    // it guards against overshoot in intervals where the secants are tiny.
    const std::size_t n = x_.size();
    std::vector<double> sec(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        sec[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    for (std::size_t i = 0; i < n; ++i) {
        const double sl = (i == 0) ? sec[0] : sec[i - 1];
        const double sr = (i + 1 == n) ? sec[n - 2] : sec[i];
        if (sl * sr <= 0.0) {
            if (i > 0 && i + 1 < n) m_[i] = 0.0;
            continue;
        }
        const double cap = 3.0 * std::min(std::abs(sl), std::abs(sr));
        if (std::abs(m_[i]) > cap) m_[i] = (m_[i] < 0 ? -cap : cap);
    }
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InsufficientData("fit_line needs at least two samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw InsufficientData("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
        ss_res += r * r;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

} // namespace metastab
