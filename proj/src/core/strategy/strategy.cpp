#include "strategy/strategy.hpp"

#include "common/error.hpp"
#include "common/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace olymp::strategy {

double event_weight(const EventWeightInputs& in) {
    return in.alpha * in.hist_perf + in.beta * in.invest + in.gamma * in.coach_flow;
}

const CountryImpact& HostImpact::at(const std::string& noc) const {
    for (const auto& c : countries)
        if (c.noc == noc) return c;
    throw DomainError("host impact: no country " + noc);
}

HostImpact host_impact_sim(const HostSimInput& input) {
    std::map<std::string, double> pools;
    for (const auto& e : input.program) {
        if (!(e.pool >= 0.0) || !std::isfinite(e.pool)) throw DomainError("host_impact_sim: bad pool for " + e.event);
        if (!pools.emplace(e.event, e.pool).second) throw DomainError("host_impact_sim: duplicate event " + e.event);
    }
    // event -> noc -> score
    std::map<std::string, std::map<std::string, double>> score;
    for (const auto& a : input.affinities) {
        if (!(a.affinity >= 0.0 && a.affinity <= 1.0))
            throw DomainError("host_impact_sim: affinity of " + a.noc + " in " + a.event + " outside [0, 1]");
        const double w = event_weight(a.weight);
        if (!std::isfinite(w) || w < 0.0)
            throw DomainError("host_impact_sim: negative or non-finite event weight for " + a.noc + " in " + a.event);
        score[a.event][a.noc] += a.affinity * w;
    }

    std::map<std::string, double> delta;
    std::map<std::string, std::map<std::string, double>> contribution;  // noc -> event -> delta
    double pool_change = 0.0;
    for (const auto& c : input.changes) {
        double pool = 0.0, sign = 1.0;
        if (c.kind == ChangeKind::Removed) {
            auto it = pools.find(c.event);
            if (it == pools.end()) throw DomainError("host_impact_sim: cannot remove nonexistent event " + c.event);
            pool = it->second;
            sign = -1.0;
            pools.erase(it);
        } else {
            if (pools.count(c.event)) throw DomainError("host_impact_sim: event " + c.event + " is already in the program");
            if (!(c.pool >= 0.0) || !std::isfinite(c.pool)) throw DomainError("host_impact_sim: bad pool for " + c.event);
            pool = c.pool;
            pools.emplace(c.event, pool);
        }
        if (pool == 0.0) continue;
        const auto sit = score.find(c.event);
        double total = 0.0;
        if (sit != score.end())
            for (const auto& [noc, s] : sit->second) total += s;
        if (!(total > 0.0)) throw DomainError("host_impact_sim: no country has affinity for " + c.event);
        // Shares are assigned so the last country absorbs rounding and the pool is conserved exactly.
        double given = 0.0;
        const auto& by_noc = sit->second;
        auto last = std::prev(by_noc.end());
        while (last != by_noc.begin() && last->second == 0.0) --last;
        for (auto it = by_noc.begin(); it != by_noc.end(); ++it) {
            if (it->second == 0.0) continue;
            const double d = it == last ? pool - given : pool * it->second / total;
            given += d;
            delta[it->first] += sign * d;
            contribution[it->first][c.event] += sign * d;
        }
        pool_change += sign * pool;
    }

    HostImpact out;
    out.pool_change = pool_change;
    std::set<std::string> nocs;
    for (const auto& [noc, b] : input.baseline) nocs.insert(noc);
    for (const auto& [noc, d] : delta) nocs.insert(noc);
    double base_total = 0.0;
    for (const auto& noc : nocs) {
        CountryImpact ci;
        ci.noc = noc;
        if (auto it = input.baseline.find(noc); it != input.baseline.end()) ci.baseline = it->second;
        base_total += ci.baseline;
        if (auto it = delta.find(noc); it != delta.end()) ci.delta = it->second;
        ci.percent = ci.baseline > 0.0 ? 100.0 * ci.delta / ci.baseline : 0.0;
        double best = 0.0;
        for (const auto& [event, d] : contribution[noc])
            if (std::abs(d) > best) {
                best = std::abs(d);
                ci.major_event = event;
            }
        out.countries.push_back(std::move(ci));
    }
    out.total_percentage = base_total > 0.0 ? 100.0 * pool_change / base_total : 0.0;
    std::stable_sort(out.countries.begin(), out.countries.end(),
                     [](const CountryImpact& a, const CountryImpact& b) { return a.delta > b.delta; });
    return out;
}

std::string medal_band(double delta) {
    const double eps = 1e-9;
    const long lo = static_cast<long>(std::floor(delta + eps));
    const long hi = static_cast<long>(std::ceil(delta - eps));
    if (lo >= hi) return std::to_string(lo);
    if (lo < 0) return std::to_string(lo) + " to " + std::to_string(hi);
    return std::to_string(lo) + "-" + std::to_string(hi);
}

std::string format_impact_table(const HostImpact& impact) {
    std::ostringstream os;
    os << "Country,Predicted Additional Medals,Major Factors\n";
    for (const auto& c : impact.countries)
        os << c.noc << ',' << medal_band(c.delta) << ',' << (c.major_event.empty() ? "none" : c.major_event) << '\n';
    return os.str();
}

Applicability applicability(double gdp, double openness, double instability) {
    if (!std::isfinite(gdp) || !std::isfinite(openness) || !std::isfinite(instability))
        throw DomainError("applicability: non-finite input");
    Applicability a;
    a.f = 0.71 * gdp + 0.29 * openness - 0.15 * instability;
    a.applicable = a.f > kApplicabilityThreshold;
    return a;
}

void AllocationProblem::validate() const {
    const std::size_t n = w.size();
    if (n == 0) throw DomainError("allocation: no sports");
    if (alpha.size() != n || beta.size() != n) throw DomainError("allocation: w, alpha and beta lengths differ");
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("allocation: rho must lie in (0, 1)");
    if (!(budget > 0.0) || !std::isfinite(budget)) throw DomainError("allocation: budget must be positive");
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw DomainError("allocation: weights must be non-negative");
        if (!(alpha[i] > 0.0) || !(beta[i] > 0.0) || !std::isfinite(alpha[i]) || !std::isfinite(beta[i]))
            throw DomainError("allocation: elasticities must be positive");
        any = any || w[i] > 0.0;
    }
    if (!any) throw DomainError("allocation: all weights are zero");
    if (!(tolerance > 0.0) || max_iter < 1) throw DomainError("allocation: bad solver settings");
}

double allocation_objective(const AllocationProblem& p, const std::vector<double>& x, const std::vector<double>& y) {
    double f = 0.0;
    for (std::size_t i = 0; i < p.w.size(); ++i)
        f += p.w[i] * (p.alpha[i] * std::pow(x[i], p.rho) + p.beta[i] * std::pow(y[i], 1.0 - p.rho));
    return f;
}

std::vector<double> project_simplex(const std::vector<double>& v, double total) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - total) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) tau = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
    // Restore the exact budget lost to rounding on the largest coordinate.
    const double s = std::accumulate(out.begin(), out.end(), 0.0);
    auto big = std::max_element(out.begin(), out.end());
    *big += total - s;
    return out;
}

namespace {

struct Reduced {
    std::vector<std::size_t> idx;  // active sports
    std::vector<double> cx, cy;    // w alpha, w beta
    double rho;
    std::size_t m() const { return idx.size(); }

    double value(const std::vector<double>& z) const {
        double f = 0.0;
        for (std::size_t i = 0; i < m(); ++i)
            f += cx[i] * std::pow(z[i], rho) + cy[i] * std::pow(z[m() + i], 1.0 - rho);
        return f;
    }
    /// value(zn) - value(z) without cancellation between the two sums.
    double increment(const std::vector<double>& z, const std::vector<double>& zn) const {
        auto term = [](double c, double a, double b, double e) {
            return c * std::pow(a, e) * std::expm1(e * std::log1p((b - a) / a));
        };
        double d = 0.0;
        for (std::size_t i = 0; i < m(); ++i)
            d += term(cx[i], z[i], zn[i], rho) + term(cy[i], z[m() + i], zn[m() + i], 1.0 - rho);
        return d;
    }
    std::vector<double> gradient(const std::vector<double>& z, double floor) const {
        std::vector<double> g(2 * m());
        for (std::size_t i = 0; i < m(); ++i) {
            g[i] = cx[i] * rho * std::pow(std::max(z[i], floor), rho - 1.0);
            g[m() + i] = cy[i] * (1.0 - rho) * std::pow(std::max(z[m() + i], floor), -rho);
        }
        return g;
    }
};

double kkt_residual(const std::vector<double>& g) {
    const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    return (*hi - *lo) / mean;
}

} // namespace

Allocation optimize_allocation(const AllocationProblem& problem) {
    problem.validate();
    Reduced r;
    r.rho = problem.rho;
    for (std::size_t i = 0; i < problem.w.size(); ++i) {
        if (problem.w[i] == 0.0) continue;
        r.idx.push_back(i);
        r.cx.push_back(problem.w[i] * problem.alpha[i]);
        r.cy.push_back(problem.w[i] * problem.beta[i]);
    }
    const std::size_t m = r.m();
    const double B = problem.budget, floor = 1e-300;
    std::vector<double> z(2 * m, B / static_cast<double>(2 * m));
    double f = r.value(z);
    std::vector<double> g = r.gradient(z, floor);

    Allocation out;
    out.objective_trace.push_back(f);
    double step = B / (static_cast<double>(2 * m) * *std::max_element(g.begin(), g.end()));
    double res = kkt_residual(g);
    int it = 0;
    for (; it < problem.max_iter && res > problem.tolerance; ++it) {
        // Search along the segment from z to its projected gradient step; the
        // iterate stays strictly positive because the objective's slope is
        // infinite on the boundary.
        // The gradient is centred first; projection onto the simplex is
        // unchanged by a common shift and the centred form avoids cancellation.
        const double gbar = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        std::vector<double> trial(2 * m), zn(2 * m);
        for (std::size_t j = 0; j < z.size(); ++j) trial[j] = z[j] + step * (g[j] - gbar);
        const std::vector<double> target = project_simplex(trial, B);
        double dir = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) dir += (g[j] - gbar) * (target[j] - z[j]);
        const bool interior = *std::min_element(target.begin(), target.end()) > 0.0;
        double t = interior ? 1.0 : 0.5;
        double fn = f;
        bool accepted = false;
        for (int bt = 0; bt < 60 && dir > 0.0; ++bt, t *= 0.5) {
            for (std::size_t j = 0; j < z.size(); ++j) zn[j] = t == 1.0 ? target[j] : z[j] + t * (target[j] - z[j]);
            if (*std::min_element(zn.begin(), zn.end()) <= 0.0) continue;
            const double gain = r.increment(z, zn);
            fn = f + gain;
            if (gain >= 1e-4 * t * dir) {
                accepted = true;
                break;
            }
        }
        const double s = step * t;
        if (!accepted) break;
        std::vector<double> gn = r.gradient(zn, floor);
        double ss = 0.0, sy = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double dz = zn[j] - z[j], dg = gn[j] - g[j];
            ss += dz * dz;
            sy += dz * dg;
        }
        step = sy < 0.0 ? ss / -sy : s * 2.0;
        z = std::move(zn);
        g = std::move(gn);
        f = fn;
        out.objective_trace.push_back(f);
        res = kkt_residual(g);
    }

    out.x.assign(problem.w.size(), 0.0);
    out.y.assign(problem.w.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        out.x[r.idx[i]] = z[i];
        out.y[r.idx[i]] = z[m + i];
    }
    out.kkt_residual = res;
    out.iterations = it;
    if (res > problem.tolerance) {
        std::vector<double> last = out.x;
        last.insert(last.end(), out.y.begin(), out.y.end());
        throw NonConvergenceError("optimize_allocation: KKT residual " + std::to_string(res) + " above tolerance after " +
                                      std::to_string(it) + " iterations",
                                  std::move(last), res);
    }
    out.objective = allocation_objective(problem, out.x, out.y);
    const double sx = std::accumulate(out.x.begin(), out.x.end(), 0.0);
    const double sy = std::accumulate(out.y.begin(), out.y.end(), 0.0);
    out.ratio = sx / sy;
    return out;
}

double gdp_peak(double theta1, double theta2) {
    if (!std::isfinite(theta1) || !std::isfinite(theta2)) throw DomainError("gdp_peak: non-finite coefficient");
    if (!(theta2 > 0.0)) throw DomainError("gdp_peak: theta2 must be positive for an interior maximum");
    return theta1 / (2.0 * theta2);
}

std::map<std::string, double> read_baseline(std::istream& in, const std::string& source) {
    const auto t = csv::read_table(in, {"noc", "medals"}, source);
    std::map<std::string, double> out;
    for (std::size_t r = 0; r < t.size(); ++r)
        if (!out.emplace(t.text(r, "noc"), t.real(r, "medals")).second)
            throw ParseError(source, r + 1, "noc", "duplicate NOC " + t.text(r, "noc"));
    return out;
}

std::vector<ProgramEvent> read_program(std::istream& in, const std::string& source) {
    const auto t = csv::read_table(in, {"event", "pool"}, source);
    std::vector<ProgramEvent> out;
    for (std::size_t r = 0; r < t.size(); ++r) out.push_back({t.text(r, "event"), t.real(r, "pool")});
    return out;
}

std::vector<ProgramChange> read_changes(std::istream& in, const std::string& source) {
    const auto t = csv::read_table(in, {"event", "change", "pool"}, source);
    std::vector<ProgramChange> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        ProgramChange c;
        c.event = t.text(r, "event");
        const auto& kind = t.text(r, "change");
        if (kind == "added") c.kind = ChangeKind::Added;
        else if (kind == "removed") c.kind = ChangeKind::Removed;
        else throw ParseError(source, r + 1, "change", "expected 'added' or 'removed', got '" + kind + "'");
        c.pool = t.optional_real(r, "pool").value_or(0.0);
        out.push_back(c);
    }
    return out;
}

std::vector<EventAffinity> read_affinities(std::istream& in, const std::string& source,
                                           const EventWeightInputs& coefficients) {
    const auto t = csv::read_table(in, {"noc", "event", "affinity", "hist_perf", "invest", "coach_flow"}, source);
    std::vector<EventAffinity> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        EventAffinity a;
        a.noc = t.text(r, "noc");
        a.event = t.text(r, "event");
        a.affinity = t.real(r, "affinity");
        a.weight = coefficients;
        a.weight.hist_perf = t.real(r, "hist_perf");
        a.weight.invest = t.real(r, "invest");
        a.weight.coach_flow = t.real(r, "coach_flow");
        out.push_back(a);
    }
    return out;
}

AllocationProblem read_allocation(std::istream& in, const std::string& source) {
    const auto t = csv::read_table(in, {"sport", "w", "alpha", "beta"}, source);
    AllocationProblem p;
    for (std::size_t r = 0; r < t.size(); ++r) {
        p.sports.push_back(t.text(r, "sport"));
        p.w.push_back(t.real(r, "w"));
        p.alpha.push_back(t.real(r, "alpha"));
        p.beta.push_back(t.real(r, "beta"));
    }
    return p;
}

} // namespace olymp::strategy
