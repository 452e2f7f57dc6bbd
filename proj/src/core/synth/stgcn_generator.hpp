#pragma once

#include "common/rng.hpp"
#include "stgcn/model.hpp"

#include <set>
#include <string>
#include <utility>

namespace olymp::synth {

// Random directed graph with roughly `degree` in-edges per node, no self loops,
// plus one isolated node when `isolated` is set (the last node).
inline stgcn::CountryGraph random_country_graph(std::uint64_t seed, int n, int steps, int features, int degree = 3,
                                        bool isolated = false) {
    Rng rng = derived_rng(seed, 7);
    stgcn::CountryGraph g;
    for (int i = 0; i < n; ++i) g.nodes.push_back("N" + std::to_string(i));
    std::set<std::pair<int, int>> seen;
    const int linked = isolated ? n - 1 : n;
    for (int i = 0; i < linked; ++i)
        for (int d = 0; d < degree; ++d) {
            const int j = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(linked)));
            if (j == i || !seen.insert({j, i}).second) continue;
            g.edges.push_back({j, i, uniform(rng, 0.1, 2.0)});
        }
    for (int t = 0; t < steps; ++t) {
        Eigen::MatrixXd x(n, features);
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = normal(rng);
        g.features.push_back(x);
    }
    return g;
}

// Seeded initialisation with every bias and layer-norm parameter perturbed so
// that no gradient path is trivially zero.
inline stgcn::ModelParams random_params(std::uint64_t seed, int features, int hidden) {
    auto p = stgcn::ModelParams::init(features, hidden, seed);
    Rng rng = derived_rng(seed, 8);
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        if (p.penalized(i)) continue;
        auto& t = p.tensors[i];
        for (Eigen::Index c = 0; c < t.cols(); ++c)
            for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) += uniform(rng, -0.3, 0.3);
    }
    return p;
}

inline Eigen::MatrixXd random_targets(std::uint64_t seed, int n) {
    Rng rng = derived_rng(seed, 9);
    Eigen::MatrixXd t(n, stgcn::kOutputs);
    for (Eigen::Index c = 0; c < t.cols(); ++c)
        for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = uniform(rng, 0.0, 2.0);
    return t;
}

struct GradCheck {
    double worst_rel = 0.0;
    std::string worst_name;
    std::size_t checked = 0;
};

// Central differences on every scalar of every tensor. Relative error is
// |a - n| / max(|a|, |n|, floor).
inline GradCheck gradient_check(const stgcn::CountryGraph& g, const Eigen::MatrixXd& targets,
                                const stgcn::ModelParams& p, const stgcn::LossConfig& cfg, double eps = 1e-5,
                                double floor = 1e-6) {
    const auto analytic = stgcn::loss_and_gradient(g, targets, p, cfg);
    GradCheck out;
    auto q = p;
    for (std::size_t k = 0; k < q.tensors.size(); ++k) {
        auto& t = q.tensors[k];
        for (Eigen::Index c = 0; c < t.cols(); ++c)
            for (Eigen::Index r = 0; r < t.rows(); ++r) {
                const double w = t(r, c);
                t(r, c) = w + eps;
                const double up = stgcn::loss_value(g, targets, q, cfg);
                t(r, c) = w - eps;
                const double dn = stgcn::loss_value(g, targets, q, cfg);
                t(r, c) = w;
                const double num = (up - dn) / (2 * eps);
                const double a = analytic.grad[k](r, c);
                const double rel = std::abs(a - num) / std::max({std::abs(a), std::abs(num), floor});
                if (rel > out.worst_rel) {
                    out.worst_rel = rel;
                    out.worst_name = q.names[k] + "(" + std::to_string(r) + "," + std::to_string(c) + ")";
                }
                ++out.checked;
            }
    }
    return out;
}

} // namespace olymp::synth
