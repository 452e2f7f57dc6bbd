#include "validation/causal.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"
#include "regress/regress.hpp"
#include "validation/shapiro.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace olymp::validation {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double normal_two_sided(double z) {
    if (!std::isfinite(z)) return 0.0;
    return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::abs(z)));
}

VectorXd to_vec(const std::vector<double>& v) {
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_finite(const std::vector<double>& v, const std::string& what) {
    for (double x : v)
        if (!std::isfinite(x)) throw DomainError(what + ": non-finite value");
}

VectorXd lstsq(const MatrixXd& X, const VectorXd& y) {
    return X.completeOrthogonalDecomposition().solve(y);
}

} // namespace

TreatmentDecomposition treatment_decompose(const MediationData& data) {
    const std::size_t n = data.outcome.size();
    if (data.treat.size() != n) throw DomainError("treatment_decompose: treat and outcome lengths differ");
    if (data.mediators.empty()) throw DomainError("treatment_decompose: no mediator columns");
    for (const auto& [name, m] : data.mediators) {
        if (m.size() != n) throw DomainError("treatment_decompose: mediator '" + name + "' has the wrong length");
        require_finite(m, "treatment_decompose: mediator '" + name + "'");
    }
    require_finite(data.outcome, "treatment_decompose");
    require_finite(data.treat, "treatment_decompose");
    const bool treated = std::any_of(data.treat.begin(), data.treat.end(), [](double t) { return t != 0.0; });
    const bool control = std::any_of(data.treat.begin(), data.treat.end(), [](double t) { return t == 0.0; });
    if (!treated || !control) throw DomainError("treatment_decompose: need treated and control units");

    const auto rows = static_cast<Eigen::Index>(n);
    const VectorXd y = to_vec(data.outcome);
    MatrixXd Xt(rows, 2);
    Xt.col(0).setOnes();
    Xt.col(1) = to_vec(data.treat);
    const auto total = regress::ols(regress::DesignMatrix(Xt, {"const", "treat"}), y);

    const auto k = static_cast<Eigen::Index>(data.mediators.size());
    MatrixXd Xf(rows, 2 + k);
    Xf.leftCols(2) = Xt;
    std::vector<std::string> names{"const", "treat"};
    Eigen::Index c = 2;
    for (const auto& [name, m] : data.mediators) {
        Xf.col(c++) = to_vec(m);
        names.push_back(name);
    }
    const auto full = regress::ols(regress::DesignMatrix(Xf, names), y);

    TreatmentDecomposition out;
    c = 2;
    for (const auto& [name, m] : data.mediators) {
        const auto a_fit = regress::ols(regress::DesignMatrix(Xt, {"const", "treat"}), to_vec(m));
        MediatorPath p;
        p.a = a_fit.coefficients(1);
        p.a_se = a_fit.standard_errors(1);
        p.b = full.coefficients(c);
        p.b_se = full.standard_errors(c);
        ++c;
        p.indirect = p.a * p.b;
        const double s = std::sqrt(p.b * p.b * p.a_se * p.a_se + p.a * p.a * p.b_se * p.b_se);
        p.sobel_z = s > 0.0 ? p.indirect / s : 0.0;
        p.sobel_p = s > 0.0 ? normal_two_sided(p.sobel_z) : 1.0;
        out.indirect += p.indirect;
        out.mediator_paths.emplace(name, p);
    }
    out.direct = total.coefficients(1) - out.indirect;
    out.uncertainty = total.standard_errors(1);
    return out;
}

HostingEventStudy hosting_event_study(const Panel& panel) {
    std::map<std::string, int> first_host;
    for (const auto& r : panel) {
        if (!r.is_host) continue;
        auto [it, inserted] = first_host.emplace(r.noc, r.year);
        if (!inserted) it->second = std::min(it->second, r.year);
    }
    if (first_host.empty()) throw DomainError("hosting_event_study: no host events in panel");

    std::vector<coach::EventStudyRow> rows;
    rows.reserve(panel.size());
    for (const auto& r : panel) {
        coach::EventStudyRow e{r.noc, r.year, static_cast<double>(r.total), std::nullopt};
        if (auto it = first_host.find(r.noc); it != first_host.end()) e.introduction_year = it->second;
        rows.push_back(std::move(e));
    }
    coach::EventStudyOptions opts;
    opts.reference_k = std::nullopt;

    HostingEventStudy out;
    out.path = coach::event_study(rows, opts);
    double lead = 0.0, cur = 0.0, sub = 0.0;
    for (std::size_t i = 0; i < out.path.k.size(); ++i) {
        const double a = std::abs(out.path.delta[i]);
        const int k = out.path.k[i];
        if (k < 0) lead += a;
        else if (k == 0) cur += a;
        else sub += a;
    }
    const double total = lead + cur + sub;
    if (!(total > 0.0)) throw DomainError("hosting_event_study: event-time effects are identically zero");
    out.leading = lead / total;
    out.current = cur / total;
    out.subsequent = 1.0 - out.leading - out.current;
    return out;
}

std::map<std::string, double> variance_inflation(const std::map<std::string, std::vector<double>>& columns) {
    std::map<std::string, double> out;
    if (columns.empty()) return out;
    const auto n = static_cast<Eigen::Index>(columns.begin()->second.size());
    MatrixXd X(n, static_cast<Eigen::Index>(columns.size()));
    std::vector<std::string> names;
    for (const auto& [name, v] : columns) {
        if (static_cast<Eigen::Index>(v.size()) != n) throw DomainError("variance_inflation: column lengths differ");
        X.col(static_cast<Eigen::Index>(names.size())) = to_vec(v);
        names.push_back(name);
    }
    const Eigen::Index p = X.cols();
    for (Eigen::Index j = 0; j < p; ++j) {
        MatrixXd Z(n, p);
        Z.col(0).setOnes();
        Eigen::Index c = 1;
        for (Eigen::Index i = 0; i < p; ++i)
            if (i != j) Z.col(c++) = X.col(i);
        const VectorXd y = X.col(j);
        const VectorXd centred = y.array() - y.mean();
        const double sst = centred.squaredNorm();
        if (sst <= 0.0) {
            out[names[static_cast<std::size_t>(j)]] = std::numeric_limits<double>::infinity();
            continue;
        }
        const VectorXd r = y - Z * lstsq(Z, y);
        const double r2 = 1.0 - r.squaredNorm() / sst;
        out[names[static_cast<std::size_t>(j)]] =
            r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
    }
    return out;
}

ModerationResult moderation_fit(const std::vector<double>& effect,
                                const std::map<std::string, std::vector<double>>& moderators) {
    const std::size_t n = effect.size();
    if (moderators.size() < 3) throw DomainError("moderation_fit: need at least 3 moderators");
    if (n < 30) throw DomainError("moderation_fit: need at least 30 units");
    require_finite(effect, "moderation_fit");
    for (const auto& [name, v] : moderators) {
        if (v.size() != n) throw DomainError("moderation_fit: moderator '" + name + "' has the wrong length");
        require_finite(v, "moderation_fit: moderator '" + name + "'");
    }

    ModerationResult out;
    out.vif = variance_inflation(moderators);
    std::ostringstream bad;
    for (const auto& [name, v] : out.vif)
        if (!(v <= kVifLimit)) bad << (bad.tellp() > 0 ? ", " : "") << name << " = " << v;
    if (bad.tellp() > 0) throw DomainError("moderation_fit: VIF above 10: " + bad.str());

    const auto rows = static_cast<Eigen::Index>(n);
    MatrixXd X(rows, static_cast<Eigen::Index>(moderators.size()) + 1);
    X.col(0).setOnes();
    out.names.push_back("const");
    for (const auto& [name, v] : moderators) {
        X.col(static_cast<Eigen::Index>(out.names.size())) = to_vec(v);
        out.names.push_back(name);
    }
    const VectorXd y = to_vec(effect);
    const auto fit = regress::ols(regress::DesignMatrix(X, out.names), y);
    out.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
    out.standard_errors.assign(fit.standard_errors.data(), fit.standard_errors.data() + fit.standard_errors.size());
    out.adj_r_squared = fit.adj_r_squared;

    const double scale = 1.0 + y.cwiseAbs().maxCoeff();
    if (fit.residuals.cwiseAbs().maxCoeff() > 1e-9 * scale && n <= 5000) {
        const auto sw = shapiro_wilk(std::vector<double>(fit.residuals.data(), fit.residuals.data() + fit.residuals.size()));
        out.shapiro_w = sw.w;
        out.shapiro_p = sw.p;
    }
    return out;
}

std::string to_string(AteMethod m) {
    switch (m) {
    case AteMethod::IPW: return "IPW";
    case AteMethod::Matching: return "Matching";
    case AteMethod::DML: return "DML";
    }
    return "?";
}

AteMethod parse_ate_method(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "ipw") return AteMethod::IPW;
    if (s == "matching") return AteMethod::Matching;
    if (s == "dml") return AteMethod::DML;
    throw DomainError("unknown ATE method '" + name + "' (expected IPW, Matching or DML)");
}

namespace {

struct Trimmed {
    VectorXd y;  // outcome minus the first outcome, so a constant outcome is exactly zero
    VectorXd t;
    VectorXd e;
    MatrixXd X;  // with a leading constant column
};

Trimmed prepare(const AteData& d) {
    const std::size_t n = d.outcome.size();
    if (d.treat.size() != n || d.covariates.size() != n) throw DomainError("robust_ate: input lengths differ");
    if (n < 10) throw DomainError("robust_ate: need at least 10 units");
    const std::size_t p = d.covariates.front().size();
    require_finite(d.outcome, "robust_ate");
    const auto rows = static_cast<Eigen::Index>(n);
    MatrixXd X(rows, static_cast<Eigen::Index>(p) + 1);
    VectorXd t(rows), y(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& c = d.covariates[static_cast<std::size_t>(i)];
        if (c.size() != p) throw DomainError("robust_ate: ragged covariate rows");
        require_finite(c, "robust_ate: covariates");
        const double ti = d.treat[static_cast<std::size_t>(i)];
        if (ti != 0.0 && ti != 1.0) throw DomainError("robust_ate: treatment must be 0 or 1");
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < p; ++j) X(i, static_cast<Eigen::Index>(j) + 1) = c[j];
        t(i) = ti;
        y(i) = d.outcome[static_cast<std::size_t>(i)] - d.outcome.front();
    }
    if (t.sum() == 0.0 || t.sum() == static_cast<double>(n))
        throw DomainError("robust_ate: need treated and control units");

    std::vector<std::string> names{"const"};
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    regress::LogitOptions lo;
    lo.l2 = 1e-6;
    const auto ps = regress::logit_mle(regress::DesignMatrix(X, names), t, {}, lo);
    const VectorXd e = (1.0 + (-(X * ps.coefficients)).array().exp()).inverse().matrix();

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < rows; ++i)
        if (e(i) >= kTrimLow && e(i) <= kTrimHigh) keep.push_back(i);
    Trimmed out;
    const auto m = static_cast<Eigen::Index>(keep.size());
    out.y.resize(m);
    out.t.resize(m);
    out.e.resize(m);
    out.X.resize(m, X.cols());
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto i = keep[static_cast<std::size_t>(r)];
        out.y(r) = y(i);
        out.t(r) = t(i);
        out.e(r) = e(i);
        out.X.row(r) = X.row(i);
    }
    const double nt = out.t.sum();
    if (nt < 2.0 || static_cast<double>(m) - nt < 2.0)
        throw DomainError("robust_ate: no propensity overlap after trimming to [0.05, 0.95]");
    return out;
}

AteResult ipw(const Trimmed& d) {
    const auto n = d.y.size();
    double w1 = 0, w0 = 0, s1 = 0, s0 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (d.t(i) == 1.0) {
            w1 += 1.0 / d.e(i);
            s1 += d.y(i) / d.e(i);
        } else {
            w0 += 1.0 / (1.0 - d.e(i));
            s0 += d.y(i) / (1.0 - d.e(i));
        }
    }
    const double mu1 = s1 / w1, mu0 = s0 / w0;
    const double nn = static_cast<double>(n);
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double psi = d.t(i) == 1.0 ? (d.y(i) - mu1) / d.e(i) / (w1 / nn)
                                         : -(d.y(i) - mu0) / (1.0 - d.e(i)) / (w0 / nn);
        v += psi * psi;
    }
    return {mu1 - mu0, std::sqrt(v) / nn, static_cast<int>(n)};
}

AteResult matching(const Trimmed& d) {
    const auto n = d.y.size();
    std::vector<Eigen::Index> grp[2];
    for (Eigen::Index i = 0; i < n; ++i) grp[d.t(i) == 1.0 ? 1 : 0].push_back(i);

    VectorXd mu[2];
    for (int g = 0; g < 2; ++g) {
        MatrixXd Xg(static_cast<Eigen::Index>(grp[g].size()), d.X.cols());
        VectorXd yg(Xg.rows());
        for (Eigen::Index r = 0; r < Xg.rows(); ++r) {
            Xg.row(r) = d.X.row(grp[g][static_cast<std::size_t>(r)]);
            yg(r) = d.y(grp[g][static_cast<std::size_t>(r)]);
        }
        mu[g] = d.X * lstsq(Xg, yg);
    }

    auto nearest = [&](Eigen::Index i, const std::vector<Eigen::Index>& pool) {
        Eigen::Index best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (auto j : pool) {
            if (j == i) continue;
            const double dist = std::abs(d.e(i) - d.e(j));
            if (dist < bd) {
                bd = dist;
                best = j;
            }
        }
        return best;
    };

    std::vector<double> tau(static_cast<std::size_t>(n));
    std::vector<double> used(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int g = d.t(i) == 1.0 ? 1 : 0;
        const auto j = nearest(i, grp[1 - g]);
        used[static_cast<std::size_t>(j)] += 1.0;
        const double counterfactual = d.y(j) + mu[1 - g](i) - mu[1 - g](j);
        tau[static_cast<std::size_t>(i)] = g == 1 ? d.y(i) - counterfactual : counterfactual - d.y(i);
    }
    const double nn = static_cast<double>(n);
    const double ate = std::accumulate(tau.begin(), tau.end(), 0.0) / nn;

    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int g = d.t(i) == 1.0 ? 1 : 0;
        const double dev = tau[static_cast<std::size_t>(i)] - ate;
        v += dev * dev;
        double sigma2 = 0.0;
        if (grp[g].size() > 1) {
            const auto l = nearest(i, grp[g]);
            sigma2 = 0.5 * (d.y(i) - d.y(l)) * (d.y(i) - d.y(l));
        }
        const double k = used[static_cast<std::size_t>(i)];
        v += (k * k + k) * sigma2;
    }
    return {ate, std::sqrt(v) / nn, static_cast<int>(n)};
}

AteResult dml(const Trimmed& d, std::uint64_t seed) {
    constexpr int kFolds = 5;
    const auto n = d.y.size();
    if (n < 2 * kFolds) throw DomainError("robust_ate: too few units for 5-fold cross-fitting");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng = derived_rng(seed, 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < order.size(); ++r) fold[static_cast<std::size_t>(order[r])] = static_cast<int>(r % kFolds);

    VectorXd yr(n), tr(n);
    for (int f = 0; f < kFolds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        MatrixXd Xtr(static_cast<Eigen::Index>(train.size()), d.X.cols());
        VectorXd ytr(Xtr.rows()), ttr(Xtr.rows());
        for (Eigen::Index r = 0; r < Xtr.rows(); ++r) {
            const auto i = train[static_cast<std::size_t>(r)];
            Xtr.row(r) = d.X.row(i);
            ytr(r) = d.y(i);
            ttr(r) = d.t(i);
        }
        const auto cod = Xtr.completeOrthogonalDecomposition();
        const VectorXd by = cod.solve(ytr), bt = cod.solve(ttr);
        for (auto i : test) {
            yr(i) = d.y(i) - d.X.row(i).dot(by);
            tr(i) = d.t(i) - d.X.row(i).dot(bt);
        }
    }
    const double stt = tr.squaredNorm();
    if (!(stt > 0.0)) throw DomainError("robust_ate: treatment fully explained by covariates");
    const double theta = tr.dot(yr) / stt;
    const double nn = static_cast<double>(n);
    const VectorXd psi = tr.cwiseProduct(yr - theta * tr);
    const double j = stt / nn;
    const double se = std::sqrt(psi.squaredNorm() / nn) / j / std::sqrt(nn);
    return {theta, se, static_cast<int>(n)};
}

} // namespace

AteResult robust_ate(const AteData& data, AteMethod method, std::uint64_t seed) {
    const Trimmed d = prepare(data);
    switch (method) {
    case AteMethod::IPW: return ipw(d);
    case AteMethod::Matching: return matching(d);
    case AteMethod::DML: return dml(d, seed);
    }
    throw DomainError("robust_ate: unknown method");
}

} // namespace olymp::validation
