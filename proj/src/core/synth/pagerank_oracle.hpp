#pragma once

#include "common/rng.hpp"
#include "influence/influence.hpp"

#include <cmath>
#include <vector>

namespace olymp::synth {

/// Random weighted digraph; roughly 10% of nodes are left dangling.
inline influence::WeightedDigraph random_graph(Rng& rng, std::size_t n) {
    influence::WeightedDigraph g;
    for (std::size_t i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) {
        if (bernoulli(rng, 0.1)) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && bernoulli(rng, 0.15)) g.add_edge(i, j, uniform(rng, 0.01, 10.0));
    }
    return g;
}

/// Explicit column-stochastic transition matrix, iterated to machine precision.
inline std::vector<double> dense_pagerank(const influence::WeightedDigraph& g, double d) {
    const std::size_t n = g.size();
    std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double total = 0.0;
        for (const auto& e : g.out[j]) total += e.weight;
        if (total == 0.0) {
            for (std::size_t i = 0; i < n; ++i) T[i][j] = 1.0 / n;
        } else {
            for (const auto& e : g.out[j]) T[e.to][j] += e.weight / total;
        }
    }
    std::vector<double> x(n, 1.0 / n), y(n);
    for (int it = 0; it < 5000; ++it) {
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += T[i][j] * x[j];
            y[i] = (1.0 - d) / n + d * s;
        }
        for (std::size_t i = 0; i < n; ++i) diff += std::abs(y[i] - x[i]);
        x.swap(y);
        if (diff < 1e-15) break;
    }
    return x;
}

} // namespace olymp::synth
