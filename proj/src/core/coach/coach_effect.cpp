#include "coach/coach_effect.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"
#include "regress/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace olymp::coach {

std::vector<std::string> CoachPanel::sports() const {
    std::set<std::string> s;
    for (const auto& r : rows) s.insert(r.sport);
    return {s.begin(), s.end()};
}

std::string CoachPanel::reference_sport() const {
    for (const auto& s : sports())
        if (s != focal_sport) return s;
    throw DomainError("coach panel: no reference sport besides the focal sport");
}

void CoachPanel::validate() const {
    const auto s = sports();
    if (s.size() < 2) throw DomainError("coach panel: need at least two sports");
    if (std::find(s.begin(), s.end(), focal_sport) == s.end())
        throw DomainError("coach panel: focal sport '" + focal_sport + "' has no rows");
    std::set<int> years;
    bool treated = false, control = false, pre = false, post = false;
    std::map<std::string, bool> treat_of;
    for (const auto& r : rows) {
        if (!std::isfinite(r.medals)) throw DomainError("coach panel: non-finite medal count");
        years.insert(r.year);
        treated = treated || r.treat;
        control = control || !r.treat;
        pre = pre || !r.post;
        post = post || r.post;
        auto [it, inserted] = treat_of.emplace(r.noc, r.treat);
        if (!inserted && it->second != r.treat)
            throw DomainError("coach panel: treatment must be constant within country " + r.noc);
    }
    if (years.size() < 2 || !pre || !post) throw DomainError("coach panel: need pre and post periods");
    if (!treated || !control) throw DomainError("coach panel: need treated and control countries");
}

DddResult ddd_fit(const CoachPanel& panel) {
    panel.validate();
    const std::string ref = panel.reference_sport();
    std::vector<std::string> others;
    for (const auto& s : panel.sports())
        if (s != ref) others.push_back(s);

    std::vector<std::string> names{"const", "treat", "post"};
    for (const auto& s : others) names.push_back("sport[" + s + "]");
    names.push_back("treat_x_post");
    for (const auto& s : others) names.push_back("treat_x_post_x_sport[" + s + "]");

    const auto n = static_cast<Eigen::Index>(panel.rows.size());
    const auto p = static_cast<Eigen::Index>(names.size());
    const auto k = static_cast<Eigen::Index>(others.size());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, p);
    Eigen::VectorXd y(n);
    std::vector<std::string> clusters;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = panel.rows[static_cast<std::size_t>(i)];
        const double t = r.treat, po = r.post;
        X(i, 0) = 1.0;
        X(i, 1) = t;
        X(i, 2) = po;
        X(i, 3 + k) = t * po;
        for (Eigen::Index s = 0; s < k; ++s) {
            if (r.sport != others[static_cast<std::size_t>(s)]) continue;
            X(i, 3 + s) = 1.0;
            X(i, 4 + k + s) = t * po;
        }
        y(i) = r.medals;
        clusters.push_back(r.noc);
    }
    const auto fit = regress::ols(regress::DesignMatrix(X, names), y, clusters);
    DddResult out;
    out.names = names;
    out.n_clusters = fit.n_clusters;
    for (Eigen::Index j = 0; j < p; ++j) {
        out.beta.push_back(fit.coefficients(j));
        out.se.push_back(fit.standard_errors(j));
        out.p_values.push_back(regress::two_sided_p(fit.coefficients(j), fit.standard_errors(j), fit.dof));
    }
    const auto focal = std::find(names.begin(), names.end(), "treat_x_post_x_sport[" + panel.focal_sport + "]");
    const auto j = static_cast<std::size_t>(focal - names.begin());
    out.beta5 = out.beta[j];
    out.beta5_se = out.se[j];
    out.beta5_p = out.p_values[j];
    return out;
}

double compose_effect(double individual, double synergy, double legacy, double w_synergy, double w_legacy) {
    return individual + synergy * w_synergy + legacy * w_legacy;
}

namespace {

struct Contrast {
    std::vector<std::string> noc;  ///< per observation
    std::vector<double> post;
    std::vector<double> value;
};

double placebo_gamma3(const Contrast& c, const std::map<std::string, bool>& treat) {
    const auto n = static_cast<Eigen::Index>(c.value.size());
    Eigen::MatrixXd X(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double t = treat.at(c.noc[u]) ? 1.0 : 0.0;
        X.row(i) << 1.0, t, c.post[u], t * c.post[u];
        y(i) = c.value[u];
    }
    return regress::ols(regress::DesignMatrix(X, {"const", "pseudo_treat", "post", "pseudo_treat_x_post"}), y)
        .coefficients(3);
}

} // namespace

PlaceboResult placebo_test(const CoachPanel& panel, int n_permutations, std::uint64_t seed) {
    if (n_permutations < 100) throw DomainError("placebo_test: need at least 100 permutations");
    panel.validate();
    const std::string ref = panel.reference_sport();

    std::map<std::pair<std::string, int>, std::pair<std::optional<double>, std::optional<double>>> cells;
    std::map<std::string, bool> treat;
    std::map<std::pair<std::string, int>, bool> post_of;
    for (const auto& r : panel.rows) {
        treat[r.noc] = r.treat;
        auto& cell = cells[{r.noc, r.year}];
        post_of[{r.noc, r.year}] = r.post;
        if (r.sport == panel.focal_sport) cell.first = cell.first.value_or(0.0) + r.medals;
        else if (r.sport == ref) cell.second = cell.second.value_or(0.0) + r.medals;
    }
    if (treat.size() < 4) throw DomainError("placebo_test: need at least 4 countries to permute");
    Contrast c;
    for (const auto& [key, v] : cells) {
        if (!v.first || !v.second) continue;
        c.noc.push_back(key.first);
        c.post.push_back(post_of.at(key) ? 1.0 : 0.0);
        c.value.push_back(*v.first - *v.second);
    }

    PlaceboResult out;
    out.observed = placebo_gamma3(c, treat);
    std::vector<std::string> nocs;
    std::vector<bool> labels;
    for (const auto& [noc, t] : treat) {
        nocs.push_back(noc);
        labels.push_back(t);
    }
    int exceed = 0;
    const double bar = std::abs(out.observed) * (1.0 - 1e-12);
    for (int k = 0; k < n_permutations; ++k) {
        Rng rng = derived_rng(seed, static_cast<std::uint64_t>(k));
        std::vector<bool> perm = labels;
        for (std::size_t i = perm.size() - 1; i > 0; --i) {
            const std::size_t j = uniform_index(rng, i + 1);
            const bool tmp = perm[i];
            perm[i] = perm[j];
            perm[j] = tmp;
        }
        std::map<std::string, bool> pseudo;
        for (std::size_t i = 0; i < nocs.size(); ++i) pseudo[nocs[i]] = perm[i];
        const double g = placebo_gamma3(c, pseudo);
        out.gamma3.push_back(g);
        if (std::abs(g) >= bar) ++exceed;
    }
    out.p_value = static_cast<double>(exceed + 1) / (n_permutations + 1);
    double sum = 0.0, sq = 0.0;
    for (double g : out.gamma3) sum += g;
    out.mean = sum / n_permutations;
    for (double g : out.gamma3) sq += (g - out.mean) * (g - out.mean);
    out.mc_standard_error = std::sqrt(sq / (n_permutations - 1)) / std::sqrt(static_cast<double>(n_permutations));
    return out;
}

double EventStudyResult::at(int kk) const {
    for (std::size_t i = 0; i < k.size(); ++i)
        if (k[i] == kk) return delta[i];
    throw DomainError("event study: k = " + std::to_string(kk) + " outside the window");
}

namespace {

int floor_div(int a, int b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0)) ? 1 : 0); }

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t m = i; m <= j; ++m) r[idx[m]] = 0.5 * static_cast<double>(i + j) + 1.0;
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

} // namespace

EventStudyResult event_study(const std::vector<EventStudyRow>& input, const EventStudyOptions& o) {
    if (o.k_min > o.k_max || o.years_per_step <= 0 ||
        (o.reference_k && (*o.reference_k < o.k_min || *o.reference_k > o.k_max)))
        throw DomainError("event_study: invalid event window");
    std::vector<EventStudyRow> rows;
    bool never_treated = false;
    for (const auto& r : input) {
        if (!std::isfinite(r.medals)) throw DomainError("event_study: non-finite outcome");
        if (!r.introduction_year) {
            never_treated = true;
            rows.push_back(r);
            continue;
        }
        const int k = floor_div(r.year - *r.introduction_year, o.years_per_step);
        if (!o.reference_k || (k >= o.k_min && k <= o.k_max)) rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return std::tie(a.noc, a.year) < std::tie(b.noc, b.year); });

    std::vector<int> ks;
    for (int k = o.k_min; k <= o.k_max; ++k)
        if (!o.reference_k || k != *o.reference_k) ks.push_back(k);
    std::map<int, int> support;
    std::set<std::string> nocs;
    std::set<int> years;
    for (const auto& r : rows) {
        nocs.insert(r.noc);
        years.insert(r.year);
        if (r.introduction_year) ++support[floor_div(r.year - *r.introduction_year, o.years_per_step)];
    }
    std::string missing;
    for (int k : ks)
        if (!support.count(k)) missing += (missing.empty() ? "" : ", ") + std::to_string(k);
    if (!missing.empty()) throw DomainError("event_study: no observations at event time k = " + missing);

    std::vector<std::string> names{"const"};
    for (int k : ks) names.push_back("k=" + std::to_string(k));
    const std::vector<std::string> noc_list(nocs.begin(), nocs.end());
    const std::vector<int> year_list(years.begin(), years.end());
    for (std::size_t i = 1; i < noc_list.size(); ++i) names.push_back("fe[" + noc_list[i] + "]");
    if (never_treated)
        for (std::size_t i = 1; i < year_list.size(); ++i) names.push_back("year[" + std::to_string(year_list[i]) + "]");

    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(names.size()));
    Eigen::VectorXd y(n);
    const auto nk = static_cast<Eigen::Index>(ks.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        X(i, 0) = 1.0;
        if (r.introduction_year) {
            const int k = floor_div(r.year - *r.introduction_year, o.years_per_step);
            const auto it = std::find(ks.begin(), ks.end(), k);
            if (it != ks.end()) X(i, 1 + (it - ks.begin())) = 1.0;
        }
        const auto c = std::lower_bound(noc_list.begin(), noc_list.end(), r.noc) - noc_list.begin();
        if (c > 0) X(i, nk + c) = 1.0;
        if (never_treated) {
            const auto t = std::lower_bound(year_list.begin(), year_list.end(), r.year) - year_list.begin();
            if (t > 0) X(i, nk + static_cast<Eigen::Index>(noc_list.size()) - 1 + t) = 1.0;
        }
        y(i) = r.medals;
    }
    const auto fit = regress::ols(regress::DesignMatrix(X, names), y);

    EventStudyResult out;
    for (int k = o.k_min; k <= o.k_max; ++k) {
        out.k.push_back(k);
        if (o.reference_k && k == *o.reference_k) {
            out.delta.push_back(0.0);
            out.se.push_back(0.0);
            continue;
        }
        const auto j = 1 + (std::find(ks.begin(), ks.end(), k) - ks.begin());
        out.delta.push_back(fit.coefficients(j));
        out.se.push_back(fit.standard_errors(j));
    }
    std::vector<double> kk, dd;
    for (std::size_t i = 0; i < out.k.size(); ++i)
        if (out.k[i] >= 0) {
            kk.push_back(out.k[i]);
            dd.push_back(out.delta[i]);
        }
    out.monotonicity = kk.size() >= 2 ? pearson(ranks(kk), ranks(dd)) : 0.0;
    out.rising = kk.size() >= 2;
    for (std::size_t i = 1; i < dd.size(); ++i) out.rising = out.rising && dd[i] > dd[i - 1];
    return out;
}

std::vector<CoachCase> screen_coach_cases(const std::map<std::string, std::map<std::string, std::map<int, double>>>& medals,
                                          const std::vector<CoachSpell>& spells, double threshold_sigma,
                                          int window_games) {
    if (window_games < 2) throw DomainError("screen_coach_cases: window needs at least two Games");
    std::vector<CoachCase> out;
    for (const auto& s : spells) {
        CoachCase c;
        c.spell = s;
        const int first_post = 1896 + 4 * floor_div(s.start_year - 1896 + 3, 4);
        auto value = [&](int year) {
            const auto a = medals.find(s.noc);
            if (a == medals.end()) return 0.0;
            const auto b = a->second.find(s.sport);
            if (b == a->second.end()) return 0.0;
            const auto v = b->second.find(year);
            return v == b->second.end() ? 0.0 : v->second;
        };
        std::vector<double> pre, post;
        for (int g = 1; g <= window_games; ++g) pre.push_back(value(first_post - 4 * g));
        for (int g = 0; g < window_games; ++g) post.push_back(value(first_post + 4 * g));
        for (double v : pre) c.pre_mean += v / window_games;
        for (double v : post) c.post_mean += v / window_games;
        double sq = 0.0;
        for (double v : pre) sq += (v - c.pre_mean) * (v - c.pre_mean);
        c.pre_sd = std::sqrt(sq / (window_games - 1));
        const double rise = c.post_mean - c.pre_mean;
        if (c.pre_sd > 0.0) c.z = rise / c.pre_sd;
        else c.z = rise > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        c.flagged = c.z > threshold_sigma;
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace olymp::coach
