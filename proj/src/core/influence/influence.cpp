#include "influence/influence.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace olymp::influence {

double CountryEventMatrix::at(const std::string& noc, const std::string& event) const {
    const auto e = scores.find(event);
    if (e == scores.end()) return 0.0;
    const auto c = e->second.find(noc);
    return c == e->second.end() ? 0.0 : c->second;
}

std::vector<std::string> CountryEventMatrix::events() const {
    std::vector<std::string> out;
    for (const auto& [event, _] : scores) out.push_back(event);
    return out;
}

std::vector<std::string> CountryEventMatrix::countries() const {
    std::set<std::string> all;
    for (const auto& [_, row] : scores)
        for (const auto& [noc, __] : row) all.insert(noc);
    return {all.begin(), all.end()};
}

CountryEventMatrix event_scores(const std::vector<EventResult>& results, const std::map<int, std::string>& hosts,
                                double host_boost) {
    if (!(host_boost > 0.0)) throw DomainError("event_scores: host_boost must be positive");
    CountryEventMatrix m;
    for (const auto& r : results) {
        if (r.rank <= 0 || r.participants <= 0)
            throw DomainError("event_scores: rank and participants must be positive (" + r.noc + ", " + r.event + ")");
        if (r.participants < r.rank)
            throw DomainError("event_scores: participants below rank (" + r.noc + ", " + r.event + ")");
        if (r.medal_count < 0.0) throw DomainError("event_scores: negative medal count");
        const double normalized_rank = static_cast<double>(r.rank) / static_cast<double>(r.participants);
        const auto host = hosts.find(r.year);
        const double boost = host != hosts.end() && host->second == r.noc ? host_boost : 1.0;
        m.scores[r.event][r.noc] += r.medal_count / normalized_rank * boost;
    }
    return m;
}

std::size_t WeightedDigraph::add_node(std::string name) {
    nodes.push_back(std::move(name));
    out.emplace_back();
    return nodes.size() - 1;
}

void WeightedDigraph::add_edge(std::size_t from, std::size_t to, double weight) {
    if (from >= nodes.size() || to >= nodes.size()) throw DomainError("add_edge: node index out of range");
    if (!(weight > 0.0) || !std::isfinite(weight)) throw DomainError("add_edge: weight must be positive and finite");
    out[from].push_back({to, weight});
}

double WeightedDigraph::edge_weight(std::size_t from, std::size_t to) const {
    double w = 0.0;
    for (const auto& e : out.at(from))
        if (e.to == to) w += e.weight;
    return w;
}

WeightedDigraph build_influence_graph(const CountryEventMatrix& matrix, double hub_weight) {
    if (matrix.empty()) throw DomainError("build_influence_graph: empty country-event matrix");
    if (!(hub_weight > 0.0)) throw DomainError("build_influence_graph: hub_weight must be positive");

    WeightedDigraph g;
    const auto events = matrix.events();
    for (const auto& e : events) {
        if (e == kHubNode) throw DomainError("build_influence_graph: event name collides with the hub node");
        g.add_node(e);
    }
    const std::size_t hub = g.add_node(kHubNode);

    for (std::size_t a = 0; a < events.size(); ++a) {
        const auto& row_a = matrix.scores.at(events[a]);
        for (std::size_t b = a + 1; b < events.size(); ++b) {
            const auto& row_b = matrix.scores.at(events[b]);
            double overlap = 0.0;
            for (const auto& [noc, sa] : row_a) {
                const auto it = row_b.find(noc);
                if (it != row_b.end()) overlap += std::min(sa, it->second);
            }
            if (overlap > 0.0) {
                g.add_edge(a, b, overlap);
                g.add_edge(b, a, overlap);
            }
        }
        g.add_edge(hub, a, hub_weight);
        g.add_edge(a, hub, hub_weight);
    }
    return g;
}

PageRankResult pagerank(const WeightedDigraph& graph, const PageRankOptions& options) {
    if (!(options.damping > 0.0 && options.damping < 1.0)) throw DomainError("pagerank: damping must lie in (0, 1)");
    if (!(options.tolerance > 0.0)) throw DomainError("pagerank: tolerance must be positive");
    const std::size_t n = graph.size();
    if (n == 0) throw DomainError("pagerank: empty graph");

    std::vector<double> out_weight(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        for (const auto& e : graph.out[v]) out_weight[v] += e.weight;

    const double d = options.damping;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> pr(n, inv_n), next(n);

    PageRankResult result;
    for (int it = 1; it <= options.max_iter; ++it) {
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (out_weight[v] == 0.0) dangling += pr[v];
        std::fill(next.begin(), next.end(), (1.0 - d) * inv_n + d * dangling * inv_n);
        for (std::size_t v = 0; v < n; ++v) {
            if (out_weight[v] == 0.0) continue;
            const double share = d * pr[v] / out_weight[v];
            for (const auto& e : graph.out[v]) next[e.to] += share * e.weight;
        }
        double sum = 0.0;
        for (double x : next) sum += x;
        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            next[v] /= sum;
            change += std::abs(next[v] - pr[v]);
        }
        std::swap(pr, next);
        result.iterations = it;
        result.l1_change = change;
        if (change < options.tolerance) {
            result.scores = std::move(pr);
            return result;
        }
    }
    throw NonConvergenceError("pagerank: no convergence after " + std::to_string(options.max_iter) + " iterations",
                              pr, result.l1_change);
}

std::vector<std::pair<std::string, double>> ranking(const WeightedDigraph& graph, const PageRankResult& pr) {
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t v = 0; v < graph.size(); ++v) out.emplace_back(graph.nodes[v], pr.scores.at(v));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
}

std::map<std::string, double> country_projection(const CountryEventMatrix& matrix, const WeightedDigraph& graph,
                                                 const PageRankResult& pr) {
    std::map<std::string, double> out;
    double total = 0.0;
    for (std::size_t v = 0; v < graph.size(); ++v) {
        const auto row = matrix.scores.find(graph.nodes[v]);
        if (row == matrix.scores.end()) continue;
        for (const auto& [noc, s] : row->second) {
            out[noc] += s * pr.scores.at(v);
            total += s * pr.scores.at(v);
        }
    }
    if (total > 0.0)
        for (auto& [_, x] : out) x /= total;
    return out;
}

} // namespace olymp::influence
