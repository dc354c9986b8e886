// Self-avoiding walk and polygon enumeration by backtracking DFS, plus
// desk-scale connective-constant diagnostics from the resulting censuses.
//
// Walks are directed: SAW_n counts every directed self-avoiding path with n
// edges from the origin.  Polygons are directed cycles rooted at the origin,
// so every undirected cycle of length >= 3 is counted once per orientation
// and n = 2 counts one back-and-forth pair per neighbour.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "srp/graph.hpp"

namespace srp {

struct SawCensus {
    int origin = 0;
    std::vector<std::uint64_t> saw;  // |SAW_n| for n = 0..N_max
    std::vector<std::uint64_t> sap;  // |SAP_n| for n = 0..N_max

    int n_max() const { return static_cast<int>(saw.size()) - 1; }
};

// Visits every directed self-avoiding path from `origin` with at most
// `max_edges` edges (the single-vertex path included).  The visitor receives
// the current path; returning is cheap since prefixes are visited in place.
template <class Visitor>
void enumerate_saws_from(const Graph& g, int origin, int max_edges, std::uint64_t node_budget,
                         Visitor&& visit) {
    std::vector<int> path{origin};
    std::vector<char> on_path(g.vertex_count(), 0);
    on_path[origin] = 1;
    std::uint64_t visited = 0;
    auto rec = [&](auto&& self) -> void {
        if (++visited > node_budget) throw CapacityError("SAW enumeration exceeded budget");
        visit(static_cast<const std::vector<int>&>(path));
        if (static_cast<int>(path.size()) - 1 >= max_edges) return;
        for (int w : g.neighbors(path.back())) {
            if (on_path[w]) continue;
            on_path[w] = 1;
            path.push_back(w);
            self(self);
            path.pop_back();
            on_path[w] = 0;
        }
    };
    rec(rec);
}

// Visits every directed cycle rooted at `root` with at most `max_edges`
// edges, passed as the vertex sequence (root first); the closing edge back to
// the root is implicit.  A cycle with k vertices has k edges.
template <class Visitor>
void enumerate_rooted_cycles(const Graph& g, int root, int max_edges,
                             std::uint64_t node_budget, Visitor&& visit) {
    enumerate_saws_from(g, root, max_edges > 0 ? max_edges - 1 : 0, node_budget,
                        [&](const std::vector<int>& path) {
                            if (path.size() >= 2 && g.has_edge(path.back(), root) &&
                                static_cast<int>(path.size()) <= max_edges)
                                visit(path);
                        });
}

inline SawCensus saw_census(const Graph& g, int origin, int n_max,
                            std::uint64_t node_budget = kDefaultEnumerationCap,
                            bool include_backtrack_pairs = true) {
    SawCensus census;
    census.origin = origin;
    census.saw.assign(n_max + 1, 0);
    census.sap.assign(n_max + 1, 0);
    enumerate_saws_from(g, origin, n_max, node_budget, [&](const std::vector<int>& path) {
        int edges = static_cast<int>(path.size()) - 1;
        ++census.saw[edges];
        if (path.size() >= 2 && g.has_edge(path.back(), origin)) {
            int cycle_edges = edges + 1;
            if (cycle_edges <= n_max && (cycle_edges != 2 || include_backtrack_pairs))
                ++census.sap[cycle_edges];
        }
    });
    census.sap[0] = 1;  // the single-vertex polygon, matching SAW_0
    return census;
}

struct ConnectiveEstimate {
    std::vector<double> sap_roots;  // |SAP_n|^(1/n), n >= 1 (0 where count is 0)
    std::vector<double> saw_roots;  // |SAW_n|^(1/n), n >= 1
};

// Desk-scale diagnostics only: the n-th-root sequences, with no claim about
// their limits.
inline ConnectiveEstimate connective_estimate(const SawCensus& census) {
    ConnectiveEstimate est;
    for (int n = 1; n <= census.n_max(); ++n) {
        est.saw_roots.push_back(
            census.saw[n] == 0 ? 0.0
                               : std::exp(std::log(static_cast<double>(census.saw[n])) / n));
        est.sap_roots.push_back(
            census.sap[n] == 0 ? 0.0
                               : std::exp(std::log(static_cast<double>(census.sap[n])) / n));
    }
    return est;
}

// Rooted polygon counts inside a restricted domain: |SAP_n(x) intersect U|,
// needed by the partition-ratio expansions.
inline std::vector<std::uint64_t> rooted_cycle_counts(const Graph& g, const VertexSet& domain,
                                                      int root, int n_max,
                                                      std::uint64_t node_budget =
                                                          kDefaultEnumerationCap) {
    std::vector<std::uint64_t> counts(n_max + 1, 0);
    auto induced = g.induced(domain);
    int sub_root = induced.from_parent[root];
    if (sub_root < 0) throw std::invalid_argument("rooted_cycle_counts: root not in domain");
    enumerate_rooted_cycles(induced.graph, sub_root, n_max, node_budget,
                            [&](const std::vector<int>& path) {
                                ++counts[path.size()];
                            });
    return counts;
}

}  // namespace srp
