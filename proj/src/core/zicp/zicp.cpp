#include "zicp/zicp.hpp"

#include "common/csv.hpp"
#include "regress/regress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

namespace olymp::zicp {

namespace {

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

bool all_finite(const std::array<double, 3>& a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

} // namespace

void ZicpModel::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("zicp: eta must be positive");
    if (!(exposure_T > 0.0) || !std::isfinite(exposure_T)) throw DomainError("zicp: exposure_T must be positive");
    if (!all_finite(alpha) || !all_finite(beta) || !all_finite(theta) || !std::isfinite(gamma) ||
        !std::isfinite(alpha_rate))
        throw DomainError("zicp: model parameters must be finite");
}

void validate_history(const ResourceHistory& history) {
    for (std::size_t k = 1; k < history.size(); ++k)
        if (history[k].cycle <= history[k - 1].cycle)
            throw DomainError("zicp: resource history cycles must be strictly increasing");
}

double structural_zero_prob(double s1, double s2, const std::array<double, 3>& alpha) {
    return logistic(alpha[0] + alpha[1] * s1 + alpha[2] * s2);
}

double zero_prob(double pi, double lambda, double T) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw DomainError("zero_prob: pi must lie in [0, 1]");
    if (!(lambda >= 0.0)) throw DomainError("zero_prob: lambda must be non-negative");
    if (!(T > 0.0)) throw DomainError("zero_prob: T must be positive");
    return pi + (1.0 - pi) * std::exp(-lambda * T);
}

std::array<double, 3> gain_components(const ResourceHistory& history, double alpha_rate, double eta, int t0, int t) {
    if (t < t0) throw DomainError("dynamic_gain: t must not precede t0");
    if (!(eta > 0.0)) throw DomainError("dynamic_gain: eta must be positive");
    validate_history(history);
    std::array<double, 3> out{};
    for (const auto& c : history) {
        if (c.cycle < t0 || c.cycle > t) continue;
        const double w = std::exp(-eta * (t - c.cycle));
        out[0] += c.coach_input * w;
        out[1] += c.event_experience * w;
        out[2] += (c.athlete_growth + alpha_rate * c.athlete_rate) * w;
    }
    return out;
}

double dynamic_gain(const ResourceHistory& history, const std::array<double, 3>& theta, double alpha_rate,
                    double eta, int t0, int t) {
    return dot3(theta, gain_components(history, alpha_rate, eta, t0, t));
}

double intensity(const ZicpModel& model, double log_gdp, double athlete_count, double gain) {
    const double stat = std::exp(model.beta[0] + model.beta[1] * log_gdp + model.beta[2] * athlete_count);
    const double value = stat * (1.0 + model.gamma * gain);
    if (!(value > 0.0) || !std::isfinite(value))
        throw DomainError("intensity: non-positive intensity (dynamic gain below -1/gamma)");
    return value;
}

double decay_covariate(double x, double nu, double dt) {
    if (nu < 0.0) throw DomainError("decay_covariate: nu must be non-negative");
    if (dt < 0.0) throw DomainError("decay_covariate: dt must be non-negative");
    return x * std::exp(-nu * dt);
}

std::map<std::string, ResourceHistory> derive_histories(const Panel& panel, const std::vector<CoachSpell>& coaches) {
    std::map<std::string, std::vector<const PanelRecord*>> rows;
    for (const auto& r : panel) rows[r.noc].push_back(&r);
    std::map<std::string, ResourceHistory> out;
    for (auto& [noc, list] : rows) {
        std::sort(list.begin(), list.end(), [](const auto* a, const auto* b) { return a->year < b->year; });
        ResourceHistory h;
        int attended = 0;
        for (std::size_t k = 0; k < list.size(); ++k) {
            const auto& r = *list[k];
            ResourceCycle c;
            c.cycle = cycle_of_year(r.year);
            if (!h.empty() && h.back().cycle == c.cycle)
                throw DomainError("derive_histories: duplicate Games year for " + noc);
            for (const auto& s : coaches)
                if (s.noc == noc && s.start_year <= r.year && r.year <= s.end_year) c.coach_input += s.score;
            c.event_experience = attended;
            if (k > 0) {
                const double prev = list[k - 1]->athlete_count;
                c.athlete_growth = r.athlete_count - prev;
                c.athlete_rate = prev > 0 ? c.athlete_growth / prev : 0.0;
            }
            if (r.athlete_count > 0) ++attended;
            h.push_back(c);
        }
        out.emplace(noc, std::move(h));
    }
    return out;
}

std::vector<ZicpObservation> build_observations(const Panel& panel,
                                                const std::map<std::string, ResourceHistory>& histories,
                                                const StructuralOptions& structural, double eta, double alpha_rate) {
    std::map<std::pair<std::string, int>, int> athletes;
    for (const auto& r : panel) athletes[{r.noc, r.year}] = r.athlete_count;
    std::vector<ZicpObservation> out;
    out.reserve(panel.size());
    for (const auto& r : panel) {
        if (!r.gdp || !r.population)
            throw DomainError("build_observations: missing GDP or population for " + r.noc + " " +
                              std::to_string(r.year) + " (impute first)");
        ZicpObservation o;
        o.noc = r.noc;
        o.year = r.year;
        o.count = r.total;
        o.log_gdp = std::log(std::max(*r.gdp, 1e-6));
        o.athlete_count = r.athlete_count;
        const double per_capita = 100.0 * *r.gdp / std::max(*r.population, 1e-9);
        o.s1 = per_capita < structural.gdp_per_capita_threshold ? 1.0 : 0.0;
        const auto prev = athletes.find({r.noc, r.year - 4});
        o.s2 = (prev != athletes.end() && prev->second == 0) ? 1.0 : 0.0;
        const auto h = histories.find(r.noc);
        if (h != histories.end() && !h->second.empty()) {
            const int t = cycle_of_year(r.year);
            const int t0 = h->second.front().cycle;
            if (t >= t0) o.gain = gain_components(h->second, alpha_rate, eta, t0, t);
        }
        out.push_back(std::move(o));
    }
    return out;
}

namespace {

struct Params {
    Eigen::Vector3d alpha = Eigen::Vector3d::Zero();
    Eigen::Vector3d beta = Eigen::Vector3d::Zero();
    Eigen::Vector3d phi = Eigen::Vector3d::Zero();  ///< gamma * theta
};

struct Design {
    Eigen::MatrixXd S;  ///< 1, s1, s2
    Eigen::MatrixXd X;  ///< 1, log_gdp, athletes
    Eigen::MatrixXd G;  ///< gain components
    Eigen::VectorXd y;
};

Design make_design(const std::vector<ZicpObservation>& data) {
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    Design d{Eigen::MatrixXd(n, 3), Eigen::MatrixXd(n, 3), Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = data[static_cast<std::size_t>(i)];
        d.S.row(i) << 1.0, o.s1, o.s2;
        d.X.row(i) << 1.0, o.log_gdp, o.athlete_count;
        d.G.row(i) << o.gain[0], o.gain[1], o.gain[2];
        d.y(i) = o.count;
    }
    if (!d.S.allFinite() || !d.X.allFinite() || !d.G.allFinite() || !d.y.allFinite())
        throw DomainError("zicp: observations must be finite");
    return d;
}

ZicpModel to_model(const Params& p, const FitOptions& o) {
    ZicpModel m;
    for (int k = 0; k < 3; ++k) {
        m.alpha[k] = p.alpha(k);
        m.beta[k] = p.beta(k);
    }
    m.gamma = p.phi.lpNorm<1>();
    if (m.gamma > 0.0)
        for (int k = 0; k < 3; ++k) m.theta[k] = p.phi(k) / m.gamma;
    m.eta = o.eta;
    m.alpha_rate = o.alpha_rate;
    m.exposure_T = o.exposure_T;
    return m;
}

Params from_model(const ZicpModel& m) {
    Params p;
    for (int k = 0; k < 3; ++k) {
        p.alpha(k) = m.alpha[k];
        p.beta(k) = m.beta[k];
        p.phi(k) = m.gamma * m.theta[k];
    }
    return p;
}

double penalty(const Params& p, const FitOptions& o) {
    const Eigen::Vector2d b = p.beta.tail<2>(), a = p.alpha.tail<2>();
    return o.rho1 * (b.lpNorm<1>() + p.phi.lpNorm<1>()) + o.rho2 * (b.squaredNorm() + p.phi.squaredNorm()) +
           o.alpha_ridge * a.squaredNorm();
}

double loglik(const Params& p, const Design& d, double T) {
    const Eigen::Index n = d.y.size();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = d.S.row(i).dot(p.alpha);
        const double dyn = 1.0 + d.G.row(i).dot(p.phi);
        if (!(dyn > 0.0)) return -std::numeric_limits<double>::infinity();
        const double lam = std::exp(d.X.row(i).dot(p.beta)) * dyn * T;
        const double log_pi = -log1pexp(-a), log_1mpi = -log1pexp(a);
        if (d.y(i) == 0.0) {
            const double u = log_pi, v = log_1mpi - lam;
            const double m = std::max(u, v);
            total += m + std::log(std::exp(u - m) + std::exp(v - m));
        } else {
            total += log_1mpi + d.y(i) * std::log(lam) - lam - std::lgamma(d.y(i) + 1.0);
        }
    }
    return total;
}

double objective(const Params& p, const Design& d, const FitOptions& o) {
    return loglik(p, d, o.exposure_T) - penalty(p, o);
}

Eigen::VectorXd responsibilities(const Params& p, const Design& d, double T) {
    const Eigen::Index n = d.y.size();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (d.y(i) != 0.0) continue;
        const double a = d.S.row(i).dot(p.alpha);
        const double lam = std::exp(d.X.row(i).dot(p.beta)) * (1.0 + d.G.row(i).dot(p.phi)) * T;
        // pi / (pi + (1 - pi) e^{-lam}) = logistic(a + lam)
        z(i) = logistic(a + lam);
    }
    return z;
}

double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

// Maximise sum_i w_i [y_i ln(1 + phi.g_i) - mu_i (1 + phi.g_i)] - rho1|phi|_1 - rho2|phi|^2
// by proximal gradient from the current phi.
Eigen::Vector3d update_phi(const Eigen::Vector3d& start, const Design& d, const Eigen::VectorXd& w,
                           const Eigen::VectorXd& mu, const FitOptions& o) {
    if (d.G.cwiseAbs().maxCoeff() == 0.0) return start;
    auto smooth = [&](const Eigen::Vector3d& phi) {
        const Eigen::VectorXd dyn = (d.G * phi).array() + 1.0;
        if ((dyn.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
        double f = o.rho2 * phi.squaredNorm();
        for (Eigen::Index i = 0; i < dyn.size(); ++i) {
            f += w(i) * (mu(i) * dyn(i));
            if (d.y(i) > 0.0) f -= w(i) * d.y(i) * std::log(dyn(i));
        }
        return f;
    };
    auto grad = [&](const Eigen::Vector3d& phi) {
        const Eigen::VectorXd dyn = (d.G * phi).array() + 1.0;
        Eigen::VectorXd r(dyn.size());
        for (Eigen::Index i = 0; i < dyn.size(); ++i) r(i) = w(i) * (mu(i) - d.y(i) / dyn(i));
        Eigen::Vector3d g = d.G.transpose() * r;
        return Eigen::Vector3d(g + 2.0 * o.rho2 * phi);
    };
    Eigen::Vector3d phi = start;
    double f = smooth(phi);
    double t = 1.0 / std::max(1.0, (d.G.transpose() * (w.cwiseProduct(mu)).asDiagonal() * d.G).norm());
    for (int it = 0; it < 500; ++it) {
        const Eigen::Vector3d g = grad(phi);
        double step = t * 4.0;
        bool accepted = false;
        Eigen::Vector3d cand;
        double fc = 0.0;
        for (int k = 0; k < 60; ++k, step *= 0.5) {
            for (int j = 0; j < 3; ++j) cand(j) = soft(phi(j) - step * g(j), step * o.rho1);
            const Eigen::Vector3d delta = cand - phi;
            fc = smooth(cand);
            if (std::isfinite(fc) && fc <= f + g.dot(delta) + delta.squaredNorm() / (2.0 * step)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        t = step;
        const double moved = (cand - phi).cwiseAbs().maxCoeff();
        const double full_old = f + o.rho1 * phi.lpNorm<1>(), full_new = fc + o.rho1 * cand.lpNorm<1>();
        if (full_new > full_old) break;
        phi = cand;
        f = fc;
        if (moved < 1e-12 * (1.0 + phi.cwiseAbs().maxCoeff())) break;
    }
    return phi;
}

Params initial_params(const Design& d, const std::vector<ZicpObservation>& data, const FitOptions& o) {
    Params p;
    const Eigen::Index n = d.y.size();
    std::map<std::string, bool> medalled;
    for (const auto& r : data) medalled[r.noc] = medalled[r.noc] || r.count > 0.0;
    Eigen::VectorXd never(n);
    for (Eigen::Index i = 0; i < n; ++i) never(i) = medalled[data[static_cast<std::size_t>(i)].noc] ? 0.0 : 1.0;
    const double share = never.mean();
    const double clipped = std::clamp(share, 1e-3, 1.0 - 1e-3);
    p.alpha(0) = std::log(clipped / (1.0 - clipped));
    if (share > 0.0 && share < 1.0) {
        regress::LogitOptions lo;
        lo.l2 = std::max(o.alpha_ridge, 1e-6);
        try {
            p.alpha = regress::logit_mle(regress::DesignMatrix(d.S, {"const", "s1", "s2"}), never, {}, lo).coefficients;
        } catch (const Error&) {
        }
    }

    std::vector<Eigen::Index> pos;
    for (Eigen::Index i = 0; i < n; ++i)
        if (d.y(i) > 0.0) pos.push_back(i);
    Eigen::MatrixXd Xp(static_cast<Eigen::Index>(pos.size()), 3);
    Eigen::VectorXd yp(Xp.rows());
    for (Eigen::Index k = 0; k < Xp.rows(); ++k) {
        Xp.row(k) = d.X.row(pos[static_cast<std::size_t>(k)]);
        yp(k) = d.y(pos[static_cast<std::size_t>(k)]);
    }
    regress::PoissonOptions po;
    po.offset = Eigen::VectorXd::Constant(Xp.rows(), std::log(o.exposure_T));
    po.tolerance = 1e-6;
    try {
        p.beta = regress::elastic_net_poisson(regress::DesignMatrix(Xp, {"const", "log_gdp", "athletes"}), yp, o.rho1,
                                              o.rho2, po)
                     .coefficients;
    } catch (const NonConvergenceError& e) {
        p.beta = Eigen::Map<const Eigen::Vector3d>(e.last_iterate().data());
    }
    return p;
}

std::vector<double> flatten(const Params& p) {
    return {p.alpha(0), p.alpha(1), p.alpha(2), p.beta(0), p.beta(1), p.beta(2), p.phi(0), p.phi(1), p.phi(2)};
}

} // namespace

double penalized_loglik(const ZicpModel& model, const std::vector<ZicpObservation>& data, const FitOptions& options) {
    model.validate();
    return objective(from_model(model), make_design(data), options);
}

ZicpFit fit(const std::vector<ZicpObservation>& data, const FitOptions& options) {
    if (options.rho1 < 0.0 || options.rho2 < 0.0 || options.alpha_ridge < 0.0)
        throw DomainError("zicp fit: penalties must be non-negative");
    if (!(options.tol > 0.0) || options.max_iter < 1) throw DomainError("zicp fit: invalid tolerance or iteration cap");
    if (!(options.eta > 0.0) || !(options.exposure_T > 0.0))
        throw DomainError("zicp fit: eta and exposure_T must be positive");
    std::set<std::string> nocs;
    std::set<int> years;
    bool any_positive = false;
    for (const auto& o : data) {
        if (o.count < 0.0) throw DomainError("zicp fit: negative medal count for " + o.noc);
        nocs.insert(o.noc);
        years.insert(o.year);
        any_positive = any_positive || o.count > 0.0;
    }
    if (nocs.size() < 10 || years.size() < 3)
        throw DomainError("zicp fit: need at least 10 countries spanning at least 3 Games");
    if (!any_positive) throw DomainError("zicp fit: degenerate panel, every outcome is zero");

    const Design d = make_design(data);
    const Eigen::Index n = d.y.size();
    const double T = options.exposure_T;
    Params p = initial_params(d, data, options);
    double obj = objective(p, d, options);

    ZicpFit out;
    out.objective_trace.push_back(obj);
    bool converged = false;
    double improvement = 0.0;
    for (int it = 1; it <= options.max_iter; ++it) {
        const Eigen::VectorXd z = responsibilities(p, d, T);

        // Structural-zero logit on soft labels.
        if (z.sum() < 1e-12) {
            p.alpha = Eigen::Vector3d(-30.0, 0.0, 0.0);
        } else {
            regress::LogitOptions lo;
            lo.l2 = options.alpha_ridge;
            try {
                p.alpha = regress::logit_mle(regress::DesignMatrix(d.S, {"const", "s1", "s2"}), z, {}, lo).coefficients;
            } catch (const NonConvergenceError& e) {
                p.alpha = Eigen::Map<const Eigen::Vector3d>(e.last_iterate().data());
            }
        }

        // Static power on the non-structural mass, dynamic factor as offset.
        const Eigen::VectorXd w = (1.0 - z.array()).matrix();
        regress::PoissonOptions po;
        po.weights = w;
        po.offset = ((d.G * p.phi).array() + 1.0).log() + std::log(T);
        po.start = p.beta;
        po.tolerance = 1e-9;
        po.max_iter = 20000;
        try {
            p.beta = regress::elastic_net_poisson(regress::DesignMatrix(d.X, {"const", "log_gdp", "athletes"}), d.y,
                                                  options.rho1, options.rho2, po)
                         .coefficients;
        } catch (const NonConvergenceError& e) {
            p.beta = Eigen::Map<const Eigen::Vector3d>(e.last_iterate().data());
        }

        // Dynamic gain multiplier.
        const Eigen::VectorXd mu = ((d.X * p.beta).array().exp() * T).matrix();
        p.phi = update_phi(p.phi, d, w, mu, options);

        const double next = objective(p, d, options);
        if (next < obj - 1e-9 * std::max(1.0, std::abs(obj)))
            throw Error("zicp fit: EM objective decreased from " + std::to_string(obj) + " to " + std::to_string(next));
        improvement = next - obj;
        obj = next;
        out.objective_trace.push_back(obj);
        out.iterations = it;
        if (improvement < options.tol * std::max(1.0, std::abs(obj))) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw EmNonConvergenceError("zicp fit: EM did not converge in " + std::to_string(options.max_iter) +
                                        " iterations (last improvement " + std::to_string(improvement) + ")",
                                    flatten(p), improvement, out.objective_trace);

    out.model = to_model(p, options);
    out.model.fitted = true;
    const Eigen::VectorXd z = responsibilities(p, d, T);
    out.responsibilities.assign(z.data(), z.data() + n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.pi.push_back(logistic(d.S.row(i).dot(p.alpha)));
        out.lambda.push_back(std::exp(d.X.row(i).dot(p.beta)) * (1.0 + d.G.row(i).dot(p.phi)));
    }
    return out;
}

std::vector<FirstMedalForecast> predict_first_medal(const ZicpModel& model,
                                                    const std::vector<FirstMedalFeatures>& countries) {
    if (!model.fitted) throw StateError("predict_first_medal: model has not been fitted");
    model.validate();
    std::vector<FirstMedalForecast> out;
    out.reserve(countries.size());
    for (const auto& c : countries) {
        const double pi = structural_zero_prob(c.s1, c.s2, model.alpha);
        const double lam = intensity(model, c.log_gdp, c.athlete_count, dot3(model.theta, c.gain));
        FirstMedalForecast f{c.noc, c.athlete_count, c.athlete_growth, c.athlete_rate,
                             (1.0 - pi) * -std::expm1(-lam * model.exposure_T)};
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.noc < b.noc;
    });
    return out;
}

std::string format_first_medal_table(const std::vector<FirstMedalForecast>& rows) {
    std::ostringstream os;
    os << "NOC,AthleteCount,AthleteGrowth,AthleteRate,Probability\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.0f,%.0f,%.4f,%.3f\n", r.noc.c_str(), r.athlete_count, r.athlete_growth,
                      r.athlete_rate, r.probability);
        os << buf;
    }
    return os.str();
}

std::vector<FirstMedalForecast> parse_first_medal_table(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<FirstMedalForecast> out;
    bool header = true;
    while (csv::next_line(is, line)) {
        const auto f = csv::split_line(line);
        if (header) {
            if (f.size() != 5 || f[0] != "NOC") throw DomainError("first-medal table: unexpected header");
            header = false;
            continue;
        }
        if (f.size() != 5) throw DomainError("first-medal table: expected 5 fields in '" + line + "'");
        try {
            out.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
        } catch (const std::logic_error&) {
            throw DomainError("first-medal table: malformed number in '" + line + "'");
        }
    }
    return out;
}

} // namespace olymp::zicp
