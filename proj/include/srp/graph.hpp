// Finite simple graphs, vertex sets, symmetry groups and cylinder lattices.
//
// Vertices are dense integers 0..n-1.  Cylinder lattices use coordinates
// (x1, xhat) with x1 in [0, span] (no wrap) and xhat in (-period/2, period/2]
// per transverse dimension (periodic wrap).  Vertices are ordered
// lexicographically by (x1, xhat) so that every enumeration and tie-break in
// the library is canonical.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace srp {

using json = nlohmann::json;

// Thrown when a requested computation exceeds a configured size/budget cap.
class CapacityError : public std::runtime_error {
  public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

constexpr std::uint64_t kDefaultVertexCap = std::uint64_t(1) << 20;

// Budget on visited search nodes for every exhaustive enumeration.
constexpr std::uint64_t kDefaultEnumerationCap = 100'000'000;

// ---------------------------------------------------------------------------
// VertexSet: membership bitmap over a parent graph's vertex range.

class VertexSet {
  public:
    VertexSet() : n_(0) {}
    explicit VertexSet(int n) : n_(n), bits_((n + 63) / 64, 0) {}

    static VertexSet full(int n) {
        VertexSet s(n);
        for (int v = 0; v < n; ++v) s.add(v);
        return s;
    }
    static VertexSet of(int n, std::initializer_list<int> vs) {
        VertexSet s(n);
        for (int v : vs) s.add(v);
        return s;
    }
    static VertexSet from_vector(int n, const std::vector<int>& vs) {
        VertexSet s(n);
        for (int v : vs) s.add(v);
        return s;
    }

    int universe_size() const { return n_; }
    bool contains(int v) const { return (bits_[v >> 6] >> (v & 63)) & 1; }
    void add(int v) { bits_[v >> 6] |= std::uint64_t(1) << (v & 63); }
    void remove(int v) { bits_[v >> 6] &= ~(std::uint64_t(1) << (v & 63)); }

    int count() const {
        int c = 0;
        for (auto w : bits_) c += __builtin_popcountll(w);
        return c;
    }
    bool empty() const {
        for (auto w : bits_) if (w) return false;
        return true;
    }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            std::uint64_t w = bits_[i];
            while (w) {
                int b = __builtin_ctzll(w);
                f(static_cast<int>(i * 64 + b));
                w &= w - 1;
            }
        }
    }
    std::vector<int> to_vector() const {
        std::vector<int> out;
        out.reserve(count());
        for_each([&](int v) { out.push_back(v); });
        return out;
    }

    VertexSet& operator|=(const VertexSet& o) {
        for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
        return *this;
    }
    VertexSet& operator&=(const VertexSet& o) {
        for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= o.bits_[i];
        return *this;
    }
    VertexSet& subtract(const VertexSet& o) {
        for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= ~o.bits_[i];
        return *this;
    }
    friend VertexSet operator|(VertexSet a, const VertexSet& b) { return a |= b; }
    friend VertexSet operator&(VertexSet a, const VertexSet& b) { return a &= b; }
    friend VertexSet operator-(VertexSet a, const VertexSet& b) { return a.subtract(b); }

    VertexSet complement() const {
        VertexSet out(n_);
        for (int v = 0; v < n_; ++v)
            if (!contains(v)) out.add(v);
        return out;
    }
    bool subset_of(const VertexSet& o) const {
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] & ~o.bits_[i]) return false;
        return true;
    }
    bool intersects(const VertexSet& o) const {
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] & o.bits_[i]) return true;
        return false;
    }
    bool operator==(const VertexSet& o) const { return n_ == o.n_ && bits_ == o.bits_; }
    bool operator!=(const VertexSet& o) const { return !(*this == o); }

    // Bitmask view for graphs with at most 64 vertices (exhaustive subset scans).
    std::uint64_t low_mask() const { return bits_.empty() ? 0 : bits_[0]; }
    static VertexSet from_mask(int n, std::uint64_t mask) {
        VertexSet s(n);
        if (!s.bits_.empty()) s.bits_[0] = mask;
        return s;
    }

  private:
    int n_;
    std::vector<std::uint64_t> bits_;
};

// ---------------------------------------------------------------------------
// Graph: finite simple graph with sorted adjacency lists.

class Graph {
  public:
    Graph() = default;
    explicit Graph(int n) : adj_(n) {}

    int vertex_count() const { return static_cast<int>(adj_.size()); }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }

    void add_edge(int u, int v) {
        if (u == v) throw std::invalid_argument("add_edge: self-loops not allowed");
        if (u < 0 || v < 0 || u >= vertex_count() || v >= vertex_count())
            throw std::invalid_argument("add_edge: vertex out of range");
        if (!has_edge(u, v)) {
            adj_[u].insert(std::lower_bound(adj_[u].begin(), adj_[u].end(), v), v);
            adj_[v].insert(std::lower_bound(adj_[v].begin(), adj_[v].end(), u), u);
        }
    }
    bool has_edge(int u, int v) const {
        const auto& a = adj_[u];
        return std::binary_search(a.begin(), a.end(), v);
    }
    int edge_count() const {
        int twice = 0;
        for (const auto& a : adj_) twice += static_cast<int>(a.size());
        return twice / 2;
    }
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int u = 0; u < vertex_count(); ++u)
            for (int v : adj_[u])
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    // Subgraph induced by `keep`: retains exactly the edges with both
    // endpoints inside.  Returns the subgraph plus the dense relabeling.
    struct Induced;
    Induced induced(const VertexSet& keep) const;

    bool adjacency_symmetric() const {
        for (int u = 0; u < vertex_count(); ++u)
            for (int v : adj_[u])
                if (!has_edge(v, u)) return false;
        return true;
    }

    std::optional<std::vector<std::vector<double>>> coords;  // optional labels

    json to_json() const {
        json j;
        j["n"] = vertex_count();
        j["edges"] = json::array();
        for (auto [u, v] : edges()) j["edges"].push_back({u, v});
        if (coords) j["coords"] = *coords;
        return j;
    }
    static Graph from_json(const json& j) {
        Graph g(j.at("n").get<int>());
        for (const auto& e : j.at("edges")) g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
        if (j.contains("coords")) g.coords = j["coords"].get<std::vector<std::vector<double>>>();
        return g;
    }

    // FNV-1a over vertex count and sorted edge list; used to tie serialized
    // permutations to the graph they were sampled on.
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&](std::uint64_t x) {
            for (int i = 0; i < 8; ++i) {
                h ^= (x >> (8 * i)) & 0xff;
                h *= 1099511628211ULL;
            }
        };
        mix(static_cast<std::uint64_t>(vertex_count()));
        for (auto [u, v] : edges()) {
            mix(static_cast<std::uint64_t>(u));
            mix(static_cast<std::uint64_t>(v));
        }
        return h;
    }

  private:
    std::vector<std::vector<int>> adj_;
};

struct Graph::Induced {
    Graph graph;
    std::vector<int> to_parent;    // sub id -> parent id
    std::vector<int> from_parent;  // parent id -> sub id or -1
};

inline Graph::Induced Graph::induced(const VertexSet& keep) const {
    Induced out;
    out.from_parent.assign(vertex_count(), -1);
    keep.for_each([&](int v) {
        out.from_parent[v] = static_cast<int>(out.to_parent.size());
        out.to_parent.push_back(v);
    });
    out.graph = Graph(static_cast<int>(out.to_parent.size()));
    for (int sv = 0; sv < out.graph.vertex_count(); ++sv)
        for (int w : adj_[out.to_parent[sv]]) {
            int sw = out.from_parent[w];
            if (sw > sv) out.graph.add_edge(sv, sw);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Standard small builders.

inline Graph path_graph(int n) {
    Graph g(n);
    for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    return g;
}

inline Graph complete_graph(int n) {
    Graph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
    return g;
}

// Rectangular grid patch of the square lattice, vertices (r, c) row-major.
inline Graph grid_graph(int rows, int cols) {
    Graph g(rows * cols);
    auto id = [&](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (r + 1 < rows) g.add_edge(id(r, c), id(r + 1, c));
            if (c + 1 < cols) g.add_edge(id(r, c), id(r, c + 1));
        }
    return g;
}

// ---------------------------------------------------------------------------
// SymmetryGroup: closed set of graph automorphisms stored as permutation arrays.

class SymmetryGroup {
  public:
    SymmetryGroup() = default;
    explicit SymmetryGroup(int n) { elements_.push_back(identity(n)); }

    static std::vector<int> identity(int n) {
        std::vector<int> id(n);
        for (int i = 0; i < n; ++i) id[i] = i;
        return id;
    }

    static bool is_automorphism(const Graph& g, const std::vector<int>& phi) {
        int n = g.vertex_count();
        if (static_cast<int>(phi.size()) != n) return false;
        std::vector<char> seen(n, 0);
        for (int v : phi) {
            if (v < 0 || v >= n || seen[v]) return false;
            seen[v] = 1;
        }
        for (int u = 0; u < n; ++u)
            for (int v : g.neighbors(u))
                if (!g.has_edge(phi[u], phi[v])) return false;
        return true;
    }

    // Builds the group generated by `gens`, verifying each element against g.
    static SymmetryGroup generated(const Graph& g, const std::vector<std::vector<int>>& gens) {
        int n = g.vertex_count();
        SymmetryGroup out(n);
        for (const auto& gen : gens) {
            if (!is_automorphism(g, gen))
                throw std::invalid_argument("SymmetryGroup: generator is not an automorphism");
        }
        std::deque<std::vector<int>> frontier(gens.begin(), gens.end());
        auto known = [&](const std::vector<int>& p) {
            return std::find(out.elements_.begin(), out.elements_.end(), p) != out.elements_.end();
        };
        while (!frontier.empty()) {
            auto p = frontier.front();
            frontier.pop_front();
            if (known(p)) continue;
            out.elements_.push_back(p);
            for (const auto& q : out.elements_) {
                auto pq = compose(p, q);
                auto qp = compose(q, p);
                if (!known(pq)) frontier.push_back(pq);
                if (!known(qp)) frontier.push_back(qp);
            }
        }
        // Close under inverses (finite group of bijections: already closed,
        // but verify rather than assume).
        for (const auto& p : out.elements_)
            if (!known(inverse(p))) throw std::logic_error("SymmetryGroup: closure failed");
        return out;
    }

    static std::vector<int> compose(const std::vector<int>& p, const std::vector<int>& q) {
        std::vector<int> out(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[q[i]];
        return out;
    }
    static std::vector<int> inverse(const std::vector<int>& p) {
        std::vector<int> out(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) out[p[i]] = static_cast<int>(i);
        return out;
    }

    const std::vector<std::vector<int>>& elements() const { return elements_; }
    std::size_t order() const { return elements_.size(); }

    VertexSet image(const VertexSet& s) const {
        VertexSet out(s.universe_size());
        for (const auto& phi : elements_) s.for_each([&](int v) { out.add(phi[v]); });
        return out;
    }
    bool stabilizes(const VertexSet& s) const {
        for (const auto& phi : elements_) {
            VertexSet img(s.universe_size());
            s.for_each([&](int v) { img.add(phi[v]); });
            if (img != s) return false;
        }
        return true;
    }

  private:
    std::vector<std::vector<int>> elements_;
};

// ---------------------------------------------------------------------------
// Graph distance between vertex sets (multi-source BFS from the smaller set).

constexpr int kUnreachable = std::numeric_limits<int>::max();

inline std::vector<int> bfs_distances(const Graph& g, const VertexSet& sources) {
    std::vector<int> dist(g.vertex_count(), kUnreachable);
    std::deque<int> queue;
    sources.for_each([&](int v) {
        dist[v] = 0;
        queue.push_back(v);
    });
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int w : g.neighbors(u))
            if (dist[w] == kUnreachable) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
    }
    return dist;
}

// Minimum BFS distance between any pair (a in A, b in B); kUnreachable if the
// sets lie in different components.
inline int graph_distance(const Graph& g, const VertexSet& a, const VertexSet& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("graph_distance: input sets must be nonempty");
    const VertexSet& src = a.count() <= b.count() ? a : b;
    const VertexSet& dst = a.count() <= b.count() ? b : a;
    if (src.intersects(dst)) return 0;
    auto dist = bfs_distances(g, src);
    int best = kUnreachable;
    dst.for_each([&](int v) { best = std::min(best, dist[v]); });
    return best;
}

inline int graph_distance(const Graph& g, int a, int b) {
    return graph_distance(g, VertexSet::of(g.vertex_count(), {a}),
                          VertexSet::of(g.vertex_count(), {b}));
}

// ---------------------------------------------------------------------------
// Doubled graph: disjoint union of two copies plus the copy-swap symmetry.

inline std::pair<Graph, SymmetryGroup> doubled_graph(const Graph& g) {
    int n = g.vertex_count();
    Graph d(2 * n);
    for (auto [u, v] : g.edges()) {
        d.add_edge(u, v);
        d.add_edge(u + n, v + n);
    }
    std::vector<int> swap(2 * n);
    for (int v = 0; v < n; ++v) {
        swap[v] = v + n;
        swap[v + n] = v;
    }
    return {d, SymmetryGroup::generated(d, {swap})};
}

// ---------------------------------------------------------------------------
// CylinderLattice.
//
// levels() points along the axis (coordinate 1, open boundary) times
// period^(d-1) transverse points (periodic).  A period-2 wrap would create a
// double edge (xhat+1 and xhat-1 coincide); the graph is kept simple by
// deduplication, which is the one place where the transverse degree drops
// below 2 per dimension.

class CylinderLattice {
  public:
    static constexpr int kMaxDim = 6;

    CylinderLattice() = default;

    // Standard cube-like cylinder: axis [0,n], d-1 transverse dims of period n.
    static CylinderLattice build(int n, int d, std::uint64_t vertex_cap = kDefaultVertexCap) {
        if (n < 2) throw std::invalid_argument("build_cylinder: n must be >= 2");
        if (d < 2 || d > kMaxDim) throw std::invalid_argument("build_cylinder: d out of range");
        return CylinderLattice(n + 1, n, d, vertex_cap);
    }

    // Rectangular variant (d = 2): `levels` points along the axis, transverse
    // period `period`.  Used for elongated test geometries.
    static CylinderLattice build_rect(int levels, int period,
                                      std::uint64_t vertex_cap = kDefaultVertexCap) {
        if (levels < 2 || period < 2)
            throw std::invalid_argument("build_rect: levels and period must be >= 2");
        return CylinderLattice(levels, period, 2, vertex_cap);
    }

    const Graph& graph() const { return graph_; }
    int dimension() const { return d_; }
    int levels() const { return levels_; }
    int period() const { return period_; }
    // Nominal scale n: the axis span, matching [0, n] for cube-like builds.
    int n() const { return levels_ - 1; }
    int vertex_count() const { return graph_.vertex_count(); }

    int axis_coord(int v) const { return v / transverse_count_; }

    // Transverse coordinates in the canonical window (-period/2, period/2].
    std::array<int, kMaxDim> coords(int v) const {
        std::array<int, kMaxDim> c{};
        c[0] = axis_coord(v);
        int rest = v % transverse_count_;
        for (int k = d_ - 2; k >= 0; --k) {
            c[k + 1] = canonical_hat(rest % period_);
            rest /= period_;
        }
        return c;
    }

    int vertex_at(const std::array<int, kMaxDim>& c) const {
        int v = c[0];
        for (int k = 0; k < d_ - 1; ++k) v = v * period_ + hat_index(c[k + 1]);
        return v;
    }

    // Signed toroidal difference a-b reduced to (-period/2, period/2].
    int hat_diff(int a, int b) const {
        int diff = ((a - b) % period_ + period_) % period_;
        if (diff > period_ / 2) diff -= period_;
        return diff;
    }

    // L-infinity toroidal distance between the transverse parts of u and v.
    int transverse_distance(int u, int v) const {
        auto cu = coords(u), cv = coords(v);
        int best = 0;
        for (int k = 1; k < d_; ++k) best = std::max(best, std::abs(hat_diff(cu[k], cv[k])));
        return best;
    }

    // The hyperplane {x1 = level}.
    VertexSet hyperplane(int level) const {
        VertexSet s(vertex_count());
        for (int t = 0; t < transverse_count_; ++t) s.add(level * transverse_count_ + t);
        return s;
    }
    VertexSet last_hyperplane() const { return hyperplane(levels_ - 1); }

    // Expected vertex degree: the axis contributes 2 minus the boundary
    // deficits; each transverse dimension contributes 2, or 1 when period 2.
    int expected_degree(int v) const {
        int x1 = axis_coord(v);
        int deg = 2 - (x1 == 0 ? 1 : 0) - (x1 == levels_ - 1 ? 1 : 0);
        deg += (d_ - 1) * (period_ == 2 ? 1 : 2);
        return deg;
    }

    // Transverse reflection group fixing the axis line through `axis_point`:
    // generated per transverse dimension by xhat -> 2*xhat(axis) - xhat (mod
    // period), which is an automorphism for every period and fixes the line
    // {xhat = xhat(axis)} pointwise.
    SymmetryGroup reflection_group(int axis_point) const {
        auto axis = coords(axis_point);
        std::vector<std::vector<int>> gens;
        for (int k = 1; k < d_; ++k) {
            std::vector<int> phi(vertex_count());
            for (int v = 0; v < vertex_count(); ++v) {
                auto c = coords(v);
                c[k] = canonical_hat(((2 * axis[k] - c[k]) % period_ + period_) % period_);
                phi[v] = vertex_at(c);
            }
            gens.push_back(std::move(phi));
        }
        return SymmetryGroup::generated(graph_, gens);
    }

    // Full transverse reflection about the line through hat = 0 lifted to
    // vertices; used to symmetrize sampled configurations.
    std::vector<int> reflect_about_zero() const {
        std::vector<int> phi(vertex_count());
        for (int v = 0; v < vertex_count(); ++v) {
            auto c = coords(v);
            for (int k = 1; k < d_; ++k)
                c[k] = canonical_hat(((-c[k]) % period_ + period_) % period_);
            phi[v] = vertex_at(c);
        }
        return phi;
    }

  private:
    CylinderLattice(int levels, int period, int d, std::uint64_t vertex_cap)
        : levels_(levels), period_(period), d_(d) {
        std::uint64_t count = levels;
        transverse_count_ = 1;
        for (int k = 0; k < d - 1; ++k) {
            count *= static_cast<std::uint64_t>(period);
            transverse_count_ *= period;
            if (count > vertex_cap)
                throw CapacityError("cylinder lattice exceeds vertex cap of " +
                                    std::to_string(vertex_cap));
        }
        graph_ = Graph(static_cast<int>(count));
        for (int v = 0; v < graph_.vertex_count(); ++v) {
            auto c = coords(v);
            if (c[0] + 1 < levels_) {
                auto cc = c;
                cc[0] += 1;
                graph_.add_edge(v, vertex_at(cc));
            }
            for (int k = 1; k < d_; ++k) {
                auto cc = c;
                cc[k] = canonical_hat((hat_index(c[k]) + 1) % period_);
                if (vertex_at(cc) != v) graph_.add_edge(v, vertex_at(cc));
            }
        }
        std::vector<std::vector<double>> cs(graph_.vertex_count(), std::vector<double>(d_));
        for (int v = 0; v < graph_.vertex_count(); ++v) {
            auto c = coords(v);
            for (int k = 0; k < d_; ++k) cs[v][k] = c[k];
        }
        graph_.coords = std::move(cs);
    }

    // hat coordinate in (-period/2, period/2]  <->  storage index in [0, period)
    int canonical_hat(int idx) const { return idx > period_ / 2 ? idx - period_ : idx; }
    int hat_index(int hat) const { return ((hat % period_) + period_) % period_; }

    Graph graph_;
    int levels_ = 0;
    int period_ = 0;
    int d_ = 0;
    int transverse_count_ = 1;
};

inline CylinderLattice build_cylinder(int n, int d,
                                      std::uint64_t vertex_cap = kDefaultVertexCap) {
    return CylinderLattice::build(n, d, vertex_cap);
}

}  // namespace srp
