#pragma once

#include "common/panel.hpp"
#include "stgcn/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace olymp::stgcn {

struct TrainConfig {
    int epochs = 400;
    double learning_rate = 0.01;
    int warmup = 20;
    double decay_factor = 0.5;
    int decay_interval = 150;
    double l1 = 0.0;
    double l2 = 1e-4;
    double dropout = 0.0;
    std::uint64_t seed = 0;
    int hidden = kDefaultHidden;

    void validate() const;
};

/// base * min(1, (step + 1) / warmup) * decay^floor(max(0, step - warmup) / interval)
double scheduled_rate(const TrainConfig& cfg, int step);

struct Dataset {
    CountryGraph graph;
    MatrixXd targets;    ///< N x 3, already divided by `scale`
    double scale = 1.0;  ///< predictions are multiplied back by this
};

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_curve;  ///< loss before each update, one per epoch
};

/// Full-batch gradient descent from ModelParams::init(F, hidden, seed).
/// Throws NonConvergenceError naming the epoch when the loss becomes non-finite.
TrainResult train(const Dataset& data, const TrainConfig& cfg);
/// Same, starting from the given parameters.
TrainResult train(const Dataset& data, const TrainConfig& cfg, ModelParams start);

/// Replica r trains with seed derived from (cfg.seed, r). Replicas run on
/// separate threads; results do not depend on scheduling.
std::vector<TrainResult> train_ensemble(const Dataset& data, const TrainConfig& cfg, int replicas);

inline constexpr int kMinReplicas = 5;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct CountryForecast {
    std::string noc;
    std::array<double, 3> point{};  ///< gold, silver, bronze ensemble means
    std::array<Interval, 3> ci{};   ///< 2.5 / 97.5 percentiles across replicas
    double total = 0.0;
    Interval total_range;
};

/// Ensemble forecast, ranked by point gold, then total, then NOC.
/// Throws DomainError with fewer than kMinReplicas models.
std::vector<CountryForecast> predict_with_ci(const std::vector<ModelParams>& models, const CountryGraph& g,
                                             double scale = 1.0);

/// Linear-interpolated percentile (q in [0,1]) of a non-empty sample.
double percentile(std::vector<double> v, double q);

/// "Rank,Country,Gold Pred,95% CI,Silver Pred,95% CI,Bronze Pred,95% CI,Total Medal Range"
/// with rows like 1,USA,43,"[39,47]",...,118-140. Values are rounded to integers.
std::string format_forecast_table(const std::vector<CountryForecast>& rows, std::size_t top = 0);

struct DatasetOptions {
    int last_year = kLastObservedYear;     ///< final feature step
    int steps = 4;                         ///< Games in the feature window
    int neighbors = 3;                     ///< similarity edges per node
    std::optional<int> target_year;        ///< medals to fit; none for forecasting
    double lambda = 0.05;                  ///< weight-matrix decay
};

/// Builds a graph from an imputed panel. Nodes are NOCs with a row in every
/// feature year (and the target year when set), sorted by code. Features per
/// step: weight-matrix value, ln GDP, ln population, ln(1 + athletes), host
/// flag and ln(1 + gold/silver/bronze), z-scored per column over all steps.
/// Edges link each node to its nearest neighbours in last-step feature space
/// with weight 1 / (1 + distance).
Dataset build_dataset(const Panel& panel, const DatasetOptions& opt);

inline constexpr int kPanelFeatures = 8;

} // namespace olymp::stgcn
