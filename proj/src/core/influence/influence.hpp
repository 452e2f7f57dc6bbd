#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace olymp::influence {

inline constexpr const char* kHubNode = "Sports";

struct EventResult {
    std::string noc;
    std::string event;
    int year = 0;
    double medal_count = 0.0;
    int rank = 1;
    int participants = 1;
};

/// Aggregated country-event scores, keyed event -> noc -> score.
struct CountryEventMatrix {
    std::map<std::string, std::map<std::string, double>> scores;

    double at(const std::string& noc, const std::string& event) const;
    std::vector<std::string> events() const;
    std::vector<std::string> countries() const;
    bool empty() const { return scores.empty(); }
};

/// S = sum over Games of medals / (rank / participants), multiplied by
/// host_boost for the host nation's rows.
CountryEventMatrix event_scores(const std::vector<EventResult>& results, const std::map<int, std::string>& hosts,
                                double host_boost = 1.2);

struct Edge {
    std::size_t to = 0;
    double weight = 0.0;
};

/// Weighted directed graph with named nodes and out-adjacency lists.
struct WeightedDigraph {
    std::vector<std::string> nodes;
    std::vector<std::vector<Edge>> out;

    std::size_t add_node(std::string name);
    void add_edge(std::size_t from, std::size_t to, double weight);
    std::size_t size() const { return nodes.size(); }
    double edge_weight(std::size_t from, std::size_t to) const;
};

/// One node per event plus the hub. Events a, b are linked both ways with
/// weight sum_c min(S(c,a), S(c,b)) when positive; the hub is linked both
/// ways to every event with `hub_weight`. No self-edges.
WeightedDigraph build_influence_graph(const CountryEventMatrix& matrix, double hub_weight = 1.0);

struct PageRankOptions {
    double damping = 0.85;
    double tolerance = 1e-12;
    int max_iter = 1000;
};

struct PageRankResult {
    std::vector<double> scores; ///< indexed like graph.nodes, sums to 1
    int iterations = 0;
    double l1_change = 0.0;
};

/// Weighted PageRank: a node's mass is split across its out-edges in
/// proportion to edge weight; dangling nodes teleport uniformly.
/// Throws NonConvergenceError (carrying the last iterate) after max_iter.
PageRankResult pagerank(const WeightedDigraph& graph, const PageRankOptions& options = {});

/// (node, score) sorted by descending score, ties by node name.
std::vector<std::pair<std::string, double>> ranking(const WeightedDigraph& graph, const PageRankResult& pr);

/// Country influence: sum_e S(c,e) * PR(e), normalised to sum to 1.
std::map<std::string, double> country_projection(const CountryEventMatrix& matrix, const WeightedDigraph& graph,
                                                 const PageRankResult& pr);

} // namespace olymp::influence
