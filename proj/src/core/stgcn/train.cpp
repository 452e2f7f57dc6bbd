#include "stgcn/train.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"
#include "power/power_weights.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <set>
#include <sstream>

namespace olymp::stgcn {

void TrainConfig::validate() const {
    if (epochs < 1) throw DomainError("train: epochs must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("train: learning rate must be positive");
    if (warmup < 0) throw DomainError("train: warmup must be non-negative");
    if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw DomainError("train: decay factor must lie in (0, 1]");
    if (decay_interval < 1) throw DomainError("train: decay interval must be positive");
    if (l1 < 0.0 || l2 < 0.0) throw DomainError("train: penalties must be non-negative");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw DomainError("train: dropout must lie in [0, 1)");
    if (hidden < 1) throw DomainError("train: hidden width must be positive");
}

double scheduled_rate(const TrainConfig& cfg, int step) {
    const double ramp = cfg.warmup > 0 ? std::min(1.0, (step + 1.0) / cfg.warmup) : 1.0;
    const int decays = std::max(0, step - cfg.warmup) / cfg.decay_interval;
    return cfg.learning_rate * ramp * std::pow(cfg.decay_factor, decays);
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    return train(data, cfg, ModelParams::init(data.graph.width(), cfg.hidden, cfg.seed));
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, ModelParams start) {
    cfg.validate();
    data.graph.validate();
    start.validate();
    if (data.graph.steps() < 2) throw DomainError("train: need at least 2 time steps");
    const LossConfig lc{cfg.l1, cfg.l2, cfg.dropout};
    TrainResult out{std::move(start), {}};
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto lg = loss_and_gradient(data.graph, data.targets, out.params, lc, splitmix64(cfg.seed) ^ static_cast<std::uint64_t>(epoch));
        bool finite = std::isfinite(lg.loss);
        for (const auto& g : lg.grad) finite = finite && g.allFinite();
        if (!finite)
            throw NonConvergenceError("train: loss diverged at epoch " + std::to_string(epoch), {}, lg.loss);
        out.loss_curve.push_back(lg.loss);
        const double rate = scheduled_rate(cfg, epoch);
        for (std::size_t i = 0; i < out.params.tensors.size(); ++i) out.params.tensors[i] -= rate * lg.grad[i];
    }
    return out;
}

std::vector<TrainResult> train_ensemble(const Dataset& data, const TrainConfig& cfg, int replicas) {
    cfg.validate();
    if (replicas < 1) throw DomainError("train_ensemble: need at least one replica");
    std::vector<std::future<TrainResult>> jobs;
    for (int r = 0; r < replicas; ++r) {
        TrainConfig c = cfg;
        c.seed = derived_rng(cfg.seed, static_cast<std::uint64_t>(r))();
        jobs.push_back(std::async(std::launch::async, [&data, c] { return train(data, c); }));
    }
    std::vector<TrainResult> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw DomainError("percentile: empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<CountryForecast> predict_with_ci(const std::vector<ModelParams>& models, const CountryGraph& g,
                                             double scale) {
    if (models.size() < static_cast<std::size_t>(kMinReplicas))
        throw DomainError("predict_with_ci: need at least " + std::to_string(kMinReplicas) + " replicas, got " +
                          std::to_string(models.size()));
    g.validate();
    std::vector<MatrixXd> preds;
    for (const auto& m : models) preds.push_back(predict(g, m) * scale);
    std::vector<CountryForecast> out;
    for (int i = 0; i < g.n(); ++i) {
        CountryForecast f;
        f.noc = g.nodes[static_cast<std::size_t>(i)];
        std::vector<double> totals(preds.size(), 0.0);
        for (int c = 0; c < kOutputs; ++c) {
            std::vector<double> s;
            for (std::size_t r = 0; r < preds.size(); ++r) {
                s.push_back(preds[r](i, c));
                totals[r] += preds[r](i, c);
            }
            double mean = 0.0;
            for (double v : s) mean += v;
            mean /= static_cast<double>(s.size());
            const auto cu = static_cast<std::size_t>(c);
            f.point[cu] = mean;
            f.ci[cu] = {std::min(percentile(s, 0.025), mean), std::max(percentile(s, 0.975), mean)};
            f.total += mean;
        }
        f.total_range = {std::min(percentile(totals, 0.025), f.total), std::max(percentile(totals, 0.975), f.total)};
        out.push_back(std::move(f));
    }
    std::stable_sort(out.begin(), out.end(), [](const CountryForecast& a, const CountryForecast& b) {
        if (a.point[0] != b.point[0]) return a.point[0] > b.point[0];
        if (a.total != b.total) return a.total > b.total;
        return a.noc < b.noc;
    });
    return out;
}

std::string format_forecast_table(const std::vector<CountryForecast>& rows, std::size_t top) {
    auto r = [](double v) { return std::to_string(static_cast<long long>(std::llround(v))); };
    std::ostringstream os;
    os << "Rank,Country,Gold Pred,95% CI,Silver Pred,95% CI,Bronze Pred,95% CI,Total Medal Range\n";
    const std::size_t n = top == 0 ? rows.size() : std::min(top, rows.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = rows[i];
        os << i + 1 << ',' << f.noc;
        for (int c = 0; c < kOutputs; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            os << ',' << r(f.point[cu]) << ",\"[" << r(f.ci[cu].lo) << ',' << r(f.ci[cu].hi) << "]\"";
        }
        os << ',' << r(f.total_range.lo) << '-' << r(f.total_range.hi) << '\n';
    }
    return os.str();
}

namespace {

void zscore_columns(std::vector<MatrixXd>& steps) {
    const auto cols = steps.front().cols();
    for (Eigen::Index c = 0; c < cols; ++c) {
        double sum = 0.0, sq = 0.0, n = 0.0;
        for (const auto& m : steps)
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                sum += m(i, c);
                n += 1.0;
            }
        const double mean = sum / n;
        for (const auto& m : steps)
            for (Eigen::Index i = 0; i < m.rows(); ++i) sq += (m(i, c) - mean) * (m(i, c) - mean);
        const double sd = std::sqrt(sq / n);
        for (auto& m : steps)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, c) = sd > 1e-12 ? (m(i, c) - mean) / sd : 0.0;
    }
}

} // namespace

Dataset build_dataset(const Panel& panel, const DatasetOptions& opt) {
    if (opt.steps < 1) throw DomainError("build_dataset: steps must be positive");
    if (opt.neighbors < 0) throw DomainError("build_dataset: neighbours must be non-negative");
    std::vector<int> years;
    for (int s = opt.steps - 1; s >= 0; --s) years.push_back(opt.last_year - 4 * s);

    std::map<std::pair<std::string, int>, const PanelRecord*> rows;
    for (const auto& r : panel) rows[{r.noc, r.year}] = &r;
    std::set<std::string> nocs;
    for (const auto& r : panel) nocs.insert(r.noc);

    Dataset d;
    for (const auto& noc : nocs) {
        bool ok = true;
        for (int y : years) ok = ok && rows.count({noc, y});
        if (opt.target_year) ok = ok && rows.count({noc, *opt.target_year});
        if (ok) d.graph.nodes.push_back(noc);
    }
    if (d.graph.nodes.empty()) throw DomainError("build_dataset: no country has rows in every requested year");

    Panel history;
    for (const auto& r : panel)
        if (r.year <= opt.last_year) history.push_back(r);
    const auto weights = power::weight_matrix(history, opt.last_year, opt.lambda);
    const auto n = static_cast<Eigen::Index>(d.graph.nodes.size());
    for (int y : years) {
        MatrixXd x(n, kPanelFeatures);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& r = *rows.at({d.graph.nodes[static_cast<std::size_t>(i)], y});
            if (!r.gdp || !r.population) throw DomainError("build_dataset: panel must be imputed (" + r.noc + ")");
            x.row(i) << weights.at(r.noc, y), std::log(std::max(*r.gdp, power::kGdpFloor)),
                std::log(std::max(*r.population, power::kPopulationFloor)), std::log1p(r.athlete_count),
                r.is_host ? 1.0 : 0.0, std::log1p(r.gold), std::log1p(r.silver), std::log1p(r.bronze);
        }
        d.graph.features.push_back(std::move(x));
    }
    zscore_columns(d.graph.features);

    const MatrixXd& last = d.graph.features.back();
    const auto k = std::min<Eigen::Index>(opt.neighbors, n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<std::pair<double, Eigen::Index>> dist;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) dist.push_back({(last.row(i) - last.row(j)).norm(), j});
        std::stable_sort(dist.begin(), dist.end());
        for (Eigen::Index a = 0; a < k; ++a)
            d.graph.edges.push_back(
                {static_cast<int>(dist[static_cast<std::size_t>(a)].second), static_cast<int>(i),
                 1.0 / (1.0 + dist[static_cast<std::size_t>(a)].first)});
    }

    d.targets = MatrixXd::Zero(n, kOutputs);
    if (opt.target_year) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& r = *rows.at({d.graph.nodes[static_cast<std::size_t>(i)], *opt.target_year});
            d.targets.row(i) << r.gold, r.silver, r.bronze;
        }
        d.scale = std::max(1.0, d.targets.maxCoeff());
        d.targets /= d.scale;
    }
    d.graph.validate();
    return d;
}

} // namespace olymp::stgcn
