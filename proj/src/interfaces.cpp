#include "metastab/interfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metastab/errors.hpp"
#include "metastab/numerics.hpp"

namespace metastab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Intervals = std::vector<std::pair<double, double>>;

Intervals merged(Intervals v) {
    std::sort(v.begin(), v.end());
    Intervals out;
    for (const auto& iv : v) {
        // pieces cut from adjacent cells abut up to rounding of x0 + t*h
        const double tol = 1e-12 * (1.0 + std::abs(iv.first));
        if (!out.empty() && iv.first <= out.back().second + tol)
            out.back().second = std::max(out.back().second, iv.second);
        else
            out.push_back(iv);
    }
    return out;
}

double distance_to(double p, const Intervals& Y) {
    // Y sorted and disjoint
    auto it = std::upper_bound(Y.begin(), Y.end(), p,
                               [](double v, const auto& iv) { return v < iv.first; });
    double best = kInf;
    if (it != Y.end()) best = it->first - p;
    if (it != Y.begin()) {
        const auto& prev = *std::prev(it);
        if (p <= prev.second) return 0.0;
        best = std::min(best, p - prev.second);
    }
    return best;
}

double directed(const Intervals& X, const Intervals& Y) {
    double worst = 0.0;
    // sup over X of dist(., Y): attained at interval endpoints of X or at
    // midpoints of Y's gaps that fall inside X
    for (const auto& iv : X) {
        worst = std::max({worst, distance_to(iv.first, Y),
                          distance_to(iv.second, Y)});
    }
    for (std::size_t j = 0; j + 1 < Y.size(); ++j) {
        const double mid = 0.5 * (Y[j].second + Y[j + 1].first);
        for (const auto& iv : X)
            if (iv.first <= mid && mid <= iv.second)
                worst = std::max(worst, distance_to(mid, Y));
    }
    return worst;
}

Intervals as_intervals(const InterfaceSet& s) {
    if (!s.extents.empty()) return merged(s.extents);
    Intervals out;
    out.reserve(s.positions.size());
    for (double p : s.positions) out.emplace_back(p, p);
    return merged(out);
}

} // namespace

Band default_band(const MaterialModel& model) {
    const double w = model.width();
    return {model.alpha() + 0.4 * w, model.alpha() + 0.6 * w};
}

InterfaceSet interface_of(const PhaseField& u, const Band& band,
                          double midlevel) {
    if (!(band.lo < band.hi))
        throw ConfigViolation("interface band must have lo < hi");
    const int n = static_cast<int>(u.values.size());
    InterfaceSet out;
    out.band = band;

    // midlevel crossings of the piecewise-linear interpolant
    for (int i = 0; i < n; ++i) {
        const double s = u.values[i] - midlevel;
        if (s == 0.0) {
            if (i == 0 || u.values[i - 1] != midlevel)
                out.positions.push_back(u.grid.x(i));
            continue;
        }
        if (i + 1 < n) {
            const double s1 = u.values[i + 1] - midlevel;
            if (s * s1 < 0.0) {
                const double t = s / (s - s1);
                out.positions.push_back(u.grid.x(i) + t * u.grid.h());
            }
        }
    }
    std::sort(out.positions.begin(), out.positions.end());

    // exact preimage of the band under the interpolant, cell by cell
    Intervals raw;
    for (int i = 0; i + 1 < n; ++i) {
        const double u0 = u.values[i], u1 = u.values[i + 1];
        const double x0 = u.grid.x(i), h = u.grid.h();
        if (u0 == u1) {
            if (band.lo <= u0 && u0 <= band.hi) raw.emplace_back(x0, x0 + h);
            continue;
        }
        double t0 = (band.lo - u0) / (u1 - u0);
        double t1 = (band.hi - u0) / (u1 - u0);
        if (t0 > t1) std::swap(t0, t1);
        t0 = std::max(t0, 0.0);
        t1 = std::min(t1, 1.0);
        if (t0 < t1) raw.emplace_back(x0 + t0 * h, x0 + t1 * h);
    }
    out.extents = merged(raw);
    return out;
}

InterfaceSet interface_of(const PhaseField& u, const MaterialModel& model) {
    return interface_of(u, default_band(model), model.midpoint());
}

double hausdorff(const Intervals& X, const Intervals& Y) {
    if (X.empty() || Y.empty())
        throw EmptyInput("hausdorff distance needs two nonempty sets");
    const Intervals mx = merged(X), my = merged(Y);
    return std::max(directed(mx, my), directed(my, mx));
}

double hausdorff(const InterfaceSet& X, const InterfaceSet& Y) {
    return hausdorff(as_intervals(X), as_intervals(Y));
}

namespace {

// Order-preserving minimum-displacement matching of the current positions
// into the previous live positions (layers cannot cross in 1D).  Returns,
// for each current position, the index into prev it matched.
std::vector<int> align(const std::vector<double>& prev,
                       const std::vector<double>& cur, double radius) {
    const std::size_t n = prev.size(), m = cur.size();
    std::vector<std::vector<double>> g(m + 1, std::vector<double>(n + 1, kInf));
    for (std::size_t j = 0; j <= n; ++j) g[0][j] = 0.0;
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = i; j <= n; ++j) {
            g[i][j] = g[i][j - 1];
            const double d = std::abs(cur[i - 1] - prev[j - 1]);
            if (d <= radius)
                g[i][j] = std::min(g[i][j], g[i - 1][j - 1] + d);
        }
    if (!std::isfinite(g[m][n]))
        return align(prev, cur, kInf);  // radius infeasible: fall back
    std::vector<int> match(m, -1);
    std::size_t i = m, j = n;
    while (i > 0) {
        if (g[i][j] == g[i][j - 1] && j > i) {
            --j;
        } else {
            match[i - 1] = static_cast<int>(j - 1);
            --i;
            --j;
        }
    }
    return match;
}

} // namespace

TrackReport track_layers(const RunRecord& record, const MaterialModel& model,
                         double delta1) {
    if (record.snapshots.empty())
        throw EmptyInput("cannot track layers of a run without snapshots");
    const Band band = default_band(model);
    const double mid = model.midpoint();

    TrackReport report;
    report.displacement_threshold = delta1;
    report.t_exceed = kInf;

    std::vector<InterfaceSet> sets;
    sets.reserve(record.snapshots.size());
    for (const Snapshot& s : record.snapshots) {
        PhaseField u{record.grid, s.u};
        sets.push_back(interface_of(u, band, mid));
        report.times.push_back(s.t);
        report.counts.push_back(static_cast<int>(sets.back().positions.size()));
    }

    const std::vector<double>& initial = sets.front().positions;
    const int N = static_cast<int>(initial.size());
    double min_gap = kInf;
    for (int j = 0; j + 1 < N; ++j)
        min_gap = std::min(min_gap, initial[j + 1] - initial[j]);
    const double match_radius = N >= 2 ? 0.5 * min_gap : kInf;

    // identity of each live layer = its index in the initial set
    std::vector<int> live_ids(N);
    std::vector<double> live_pos = initial;
    for (int j = 0; j < N; ++j) live_ids[j] = j;

    bool collapsed_before = false;
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const std::vector<double>& cur = sets[k].positions;

        if (k > 0 && !sets[k].empty() && report.t_exceed == kInf) {
            if (hausdorff(sets[k], sets.front()) > delta1)
                report.t_exceed = report.times[k];
        } else if (k > 0 && sets[k].empty() && report.t_exceed == kInf) {
            report.t_exceed = report.times[k];  // interface vanished entirely
        }

        std::vector<double> row(N, kNaN);
        if (k == 0) {
            for (int j = 0; j < N; ++j) row[j] = initial[j];
        } else if (!live_pos.empty() && cur.size() <= live_pos.size()) {
            // covers cur empty: every live layer groups into a vanished pair
            std::vector<int> match = align(live_pos, cur, match_radius);
            std::vector<char> used(live_pos.size(), 0);
            std::vector<int> next_ids;
            std::vector<double> next_pos;
            for (std::size_t i = 0; i < cur.size(); ++i) {
                const int j = match[i];
                used[j] = 1;
                row[live_ids[j]] = cur[i];
                next_ids.push_back(live_ids[j]);
                next_pos.push_back(cur[i]);
            }
            // vanished layers: group adjacent ones into pair events
            for (std::size_t j = 0; j < live_pos.size(); ++j) {
                if (used[j]) continue;
                CollapseEvent ev;
                ev.t = report.times[k];
                ev.first_index = live_ids[j];
                if (j + 1 < live_pos.size() && !used[j + 1]) {
                    ev.second_index = live_ids[j + 1];
                    ev.pre_gap = live_pos[j + 1] - live_pos[j];
                    used[j + 1] = 1;
                }
                report.events.push_back(ev);
                collapsed_before = true;
            }
            live_ids = std::move(next_ids);
            live_pos = std::move(next_pos);
        } else if (!cur.empty()) {
            // count grew (degenerate regimes): keep raw order, reset identities
            for (std::size_t i = 0; i < cur.size() && i < static_cast<std::size_t>(N); ++i)
                row[i] = cur[i];
            live_ids.resize(std::min<std::size_t>(cur.size(), N));
            live_pos.assign(cur.begin(),
                            cur.begin() + live_ids.size());
            for (std::size_t i = 0; i < live_ids.size(); ++i)
                live_ids[i] = static_cast<int>(i);
        } else {
            live_ids.clear();
            live_pos.clear();
        }

        if (!collapsed_before)
            for (std::size_t i = 0; i + 1 < cur.size(); ++i)
                if (cur[i + 1] - cur[i] < record.grid.h())
                    report.ambiguous = true;

        report.trajectories.push_back(std::move(row));
    }
    return report;
}

ScalingFit lifetime_scaling_fit(
    const std::vector<std::pair<double, double>>& samples, double radius,
    double lambda) {
    std::vector<double> inv_eps, log_t;
    for (const auto& [eps, t] : samples) {
        if (!(eps > 0.0) || !(t > 0.0) || !std::isfinite(t)) continue;
        inv_eps.push_back(1.0 / eps);
        log_t.push_back(std::log(t));
    }
    std::vector<double> distinct = inv_eps;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2)
        throw InsufficientData(
            "lifetime scaling needs collapses at two distinct epsilons");

    LineFit fit = fit_line(inv_eps, log_t);
    ScalingFit out;
    out.a_fit = fit.slope;
    out.intercept = fit.intercept;
    out.ceiling = lambda > 0.0 ? radius * std::sqrt(2.0 * lambda) : 0.0;
    out.check_exponent = 0.5 * out.ceiling;
    out.pass = out.ceiling > 0.0 && out.a_fit > 0.0;
    for (const auto& [eps, t] : samples) {
        out.epsilons.push_back(eps);
        out.collapse_times.push_back(t);
        if (!(t >= std::exp(out.check_exponent / eps))) out.pass = false;
    }
    return out;
}

} // namespace metastab
