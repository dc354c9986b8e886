// Exhaustive enumeration of permutation ensembles on small graphs: the
// oracle that every sampler and inequality in this library is tested against.
//
// Closed configurations are enumerated by a DFS over vertices in canonical
// order, assigning pi(x) in {x} union N(x) with incremental injectivity
// pruning.  Open-cycle configurations use the same DFS with the source
// excluded from the image set and the sink pinned; the bijection structure
// then forces the orbit of the source to be a self-avoiding walk into the
// sink, so no further pruning is needed.  Configurations are yielded lazily.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "srp/graph.hpp"
#include "srp/permutation.hpp"
#include "srp/rng.hpp"

namespace srp {

// ---------------------------------------------------------------------------
// Closed-model enumeration restricted to an induced domain.  The visitor
// receives a full-size image array that is the identity outside the domain
// (the ".oplus id" extension) together with the energy inside the domain.

template <class Visitor>
void enumerate_closed_on(const Graph& g, const VertexSet& domain, std::uint64_t node_cap,
                         Visitor&& visit) {
    const int n = g.vertex_count();
    std::vector<int> order = domain.to_vector();
    std::vector<int> image(n);
    std::vector<char> used(n, 0);
    for (int v = 0; v < n; ++v) image[v] = v;
    std::uint64_t visited = 0;

    auto rec = [&](auto&& self, std::size_t pos, int energy_so_far) -> void {
        if (pos == order.size()) {
            visit(static_cast<const std::vector<int>&>(image), energy_so_far);
            return;
        }
        int x = order[pos];
        auto try_assign = [&](int w) {
            if (used[w]) return;
            if (++visited > node_cap)
                throw CapacityError("closed enumeration exceeded node cap");
            used[w] = 1;
            image[x] = w;
            self(self, pos + 1, energy_so_far + (w != x ? 1 : 0));
            used[w] = 0;
            image[x] = x;
        };
        try_assign(x);
        for (int w : g.neighbors(x))
            if (domain.contains(w)) try_assign(w);
    };
    rec(rec, 0, 0);
}

template <class Visitor>
void enumerate_closed(const Graph& g, std::uint64_t node_cap, Visitor&& visit) {
    enumerate_closed_on(g, VertexSet::full(g.vertex_count()), node_cap,
                        std::forward<Visitor>(visit));
}

// ---------------------------------------------------------------------------
// Partition functions.  Kept in log space with the exact integer energy
// histogram, so a single enumeration can be re-evaluated across alpha sweeps.

using EnergyHistogram = std::map<int, std::uint64_t>;

// JSON object keyed by energy level: {"0": 1, "2": 4, ...}
inline json histogram_to_json(const EnergyHistogram& hist) {
    json j = json::object();
    for (const auto& [energy, count] : hist) j[std::to_string(energy)] = count;
    return j;
}
inline EnergyHistogram histogram_from_json(const json& j) {
    EnergyHistogram hist;
    for (auto it = j.begin(); it != j.end(); ++it)
        hist[std::stoi(it.key())] = it.value().get<std::uint64_t>();
    return hist;
}

inline EnergyHistogram closed_energy_histogram(const Graph& g, const VertexSet& domain,
                                               std::uint64_t cap = kDefaultEnumerationCap) {
    EnergyHistogram hist;
    enumerate_closed_on(g, domain, cap, [&](const std::vector<int>&, int h) { ++hist[h]; });
    return hist;
}

struct PartitionFunction {
    double alpha = 0.0;
    double log_value = 0.0;
    EnergyHistogram histogram;  // energy level -> exact configuration count

    static double log_from_histogram(const EnergyHistogram& hist, double alpha) {
        if (hist.empty()) return 0.0;  // Z(empty) := 1
        int k0 = hist.begin()->first;
        double sum = 0.0;
        for (const auto& [k, c] : hist)
            sum += static_cast<double>(c) * std::exp(-alpha * (k - k0));
        return -alpha * k0 + std::log(sum);
    }
    static PartitionFunction from_histogram(EnergyHistogram hist, double alpha) {
        PartitionFunction z;
        z.alpha = alpha;
        z.log_value = log_from_histogram(hist, alpha);
        z.histogram = std::move(hist);
        return z;
    }
    double value() const { return std::exp(log_value); }
    double at(double other_alpha) const {
        return std::exp(log_from_histogram(histogram, other_alpha));
    }
    std::uint64_t config_count() const {
        std::uint64_t c = 0;
        for (const auto& [k, cnt] : histogram) c += cnt;
        return c;
    }
};

// Z over the subgraph induced by `domain` (Z(empty) = 1 by convention).
inline PartitionFunction partition_closed_on(const Graph& g, const VertexSet& domain,
                                             double alpha,
                                             std::uint64_t cap = kDefaultEnumerationCap) {
    return PartitionFunction::from_histogram(closed_energy_histogram(g, domain, cap), alpha);
}

inline PartitionFunction partition_closed(const Graph& g, double alpha,
                                          std::uint64_t cap = kDefaultEnumerationCap) {
    return partition_closed_on(g, VertexSet::full(g.vertex_count()), alpha, cap);
}

// ---------------------------------------------------------------------------
// Exact distribution over an enumerated ensemble.

struct ExactDistribution {
    std::vector<std::vector<int>> configs;  // image arrays
    std::vector<double> probabilities;

    int index_of(const std::vector<int>& image) const {
        for (std::size_t i = 0; i < configs.size(); ++i)
            if (configs[i] == image) return static_cast<int>(i);
        return -1;
    }
    double probability_of(const std::vector<int>& image) const {
        int i = index_of(image);
        return i < 0 ? 0.0 : probabilities[i];
    }
    int sample(RngStream& rng) const {
        double u = rng.uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            acc += probabilities[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probabilities.size()) - 1;
    }
};

inline ExactDistribution exact_closed_distribution(const Graph& g, const VertexSet& domain,
                                                   double alpha,
                                                   std::uint64_t cap = kDefaultEnumerationCap) {
    ExactDistribution d;
    std::vector<double> weights;
    enumerate_closed_on(g, domain, cap, [&](const std::vector<int>& image, int h) {
        d.configs.push_back(image);
        weights.push_back(-alpha * h);
    });
    double m = *std::max_element(weights.begin(), weights.end());
    double z = 0.0;
    for (double w : weights) z += std::exp(w - m);
    d.probabilities.reserve(weights.size());
    for (double w : weights) d.probabilities.push_back(std::exp(w - m) / z);
    return d;
}

inline ExactDistribution exact_closed_distribution(const Graph& g, double alpha,
                                                   std::uint64_t cap = kDefaultEnumerationCap) {
    return exact_closed_distribution(g, VertexSet::full(g.vertex_count()), alpha, cap);
}

// ---------------------------------------------------------------------------
// Open-cycle enumeration.  The visitor receives a full-size image array with
// -1 outside the domain, plus the energy sum over the domain.

template <class Visitor>
void enumerate_open(const Graph& g, const VertexSet& domain, int source, int sink,
                    std::uint64_t node_cap, Visitor&& visit) {
    if (!domain.contains(source) || !domain.contains(sink))
        throw std::invalid_argument("enumerate_open: source/sink must lie in the domain");
    if (source == sink)
        throw std::invalid_argument(
            "enumerate_open: source == sink is rejected (degenerate forced cycle)");
    const int n = g.vertex_count();
    std::vector<int> order;
    domain.for_each([&](int v) {
        if (v != sink) order.push_back(v);
    });
    std::vector<int> image(n, -1);
    std::vector<char> used(n, 0);
    image[sink] = sink;
    std::uint64_t visited = 0;

    auto rec = [&](auto&& self, std::size_t pos, int energy_so_far) -> void {
        if (pos == order.size()) {
            visit(static_cast<const std::vector<int>&>(image), energy_so_far);
            return;
        }
        int x = order[pos];
        auto try_assign = [&](int w) {
            if (w == source || used[w] || !domain.contains(w)) return;
            if (++visited > node_cap) throw CapacityError("open enumeration exceeded node cap");
            used[w] = 1;
            image[x] = w;
            self(self, pos + 1, energy_so_far + (w != x ? 1 : 0));
            used[w] = 0;
            image[x] = -1;
        };
        try_assign(x);
        for (int w : g.neighbors(x)) try_assign(w);
    };
    rec(rec, 0, 0);
}

inline EnergyHistogram open_energy_histogram(const Graph& g, const VertexSet& domain, int source,
                                             int sink,
                                             std::uint64_t cap = kDefaultEnumerationCap) {
    EnergyHistogram hist;
    enumerate_open(g, domain, source, sink, cap, [&](const std::vector<int>&, int h) {
        ++hist[h];
    });
    return hist;
}

// Z^{a->z}(A); zero-config ensembles yield log_value = -inf via empty histogram
// handled by the caller (value() of an empty histogram would be 1, so we track
// emptiness explicitly).
struct OpenPartition {
    PartitionFunction z;
    bool empty = false;
    double value() const { return empty ? 0.0 : z.value(); }
};

inline OpenPartition partition_open(const Graph& g, const VertexSet& domain, int source,
                                    int sink, double alpha,
                                    std::uint64_t cap = kDefaultEnumerationCap) {
    OpenPartition out;
    auto hist = open_energy_histogram(g, domain, source, sink, cap);
    out.empty = hist.empty();
    out.z = PartitionFunction::from_histogram(std::move(hist), alpha);
    return out;
}

// Hyperplane-sink ensemble: union over z in `sinks` of the per-z ensembles on
// domain union {z}.  Z^{a->l}(A) = sum_z Z^{a->z}(A union {z}).
template <class Visitor>
void enumerate_open_to_set(const Graph& g, const VertexSet& domain, int source,
                           const VertexSet& sinks, std::uint64_t node_cap, Visitor&& visit) {
    sinks.for_each([&](int z) {
        if (z == source) return;
        VertexSet dom = domain;
        dom.add(z);
        enumerate_open(g, dom, source, z, node_cap,
                       [&](const std::vector<int>& image, int h) { visit(image, h, z); });
    });
}

inline double open_partition_to_set(const Graph& g, const VertexSet& domain, int source,
                                    const VertexSet& sinks, double alpha,
                                    std::uint64_t cap = kDefaultEnumerationCap) {
    double total = 0.0;
    sinks.for_each([&](int z) {
        if (z == source) return;
        VertexSet dom = domain;
        dom.add(z);
        total += partition_open(g, dom, source, z, alpha, cap).value();
    });
    return total;
}

struct OpenExactDistribution {
    std::vector<OpenCycleConfig> configs;
    std::vector<double> probabilities;

    int sample(RngStream& rng) const {
        double u = rng.uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            acc += probabilities[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probabilities.size()) - 1;
    }
};

inline OpenExactDistribution exact_open_distribution(const Graph& g, const VertexSet& domain,
                                                     int source, const VertexSet& sinks,
                                                     double alpha,
                                                     std::uint64_t cap = kDefaultEnumerationCap) {
    OpenExactDistribution d;
    std::vector<double> weights;
    enumerate_open_to_set(g, domain, source, sinks, cap,
                          [&](const std::vector<int>& image, int h, int z) {
                              OpenCycleConfig c;
                              c.graph = &g;
                              c.domain = domain;
                              c.domain.add(z);
                              c.source = source;
                              c.sink = z;
                              c.image = image;
                              d.configs.push_back(std::move(c));
                              weights.push_back(-alpha * h);
                          });
    if (weights.empty()) return d;
    double m = *std::max_element(weights.begin(), weights.end());
    double z = 0.0;
    for (double w : weights) z += std::exp(w - m);
    for (double w : weights) d.probabilities.push_back(std::exp(w - m) / z);
    return d;
}

// ---------------------------------------------------------------------------
// Exact tail of the cycle length through z: ell -> P_U(||gamma_z|| > ell).
// Non-increasing, and identically zero from ell = |U| on.

inline std::vector<double> cycle_tail(const Graph& g, int z, double alpha,
                                      std::uint64_t cap = kDefaultEnumerationCap) {
    const int n = g.vertex_count();
    // weight[k] = total Boltzmann weight of configs whose cycle through z has
    // k edges (k = 0 for a fixed point, else the cycle's vertex count).
    std::vector<double> weight(n + 1, 0.0);
    double z_total = 0.0;
    enumerate_closed(g, cap, [&](const std::vector<int>& image, int h) {
        int len = 0;
        if (image[z] != z) {
            int v = z;
            do {
                ++len;
                v = image[v];
            } while (v != z);
        }
        double w = std::exp(-alpha * h);
        weight[len] += w;
        z_total += w;
    });
    std::vector<double> tail(n + 1, 0.0);
    double acc = 0.0;
    for (int ell = n - 1; ell >= 0; --ell) {
        acc += weight[ell + 1];
        tail[ell] = acc / z_total;
    }
    tail[n] = 0.0;
    return tail;
}

}  // namespace srp
