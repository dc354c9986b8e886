// Permutation configurations of the nearest-neighbour model.
//
// Closed model: bijections pi on V with pi(x) = x or {x, pi(x)} an edge.
// Energy H(pi) counts the displaced points, so every cycle of k >= 2 vertices
// contributes k and fixed points contribute 0.
//
// Open-cycle model: maps pi on a domain A with a source a and a sink z such
// that pi restricted to A\{z} is a bijection onto A\{a}, pi(z) = z, and every
// step is fixed-or-nearest-neighbour.  The orbit of a is then automatically a
// self-avoiding walk from a to z, and the energy sums |pi(x) - x|, which for
// unit steps again counts displaced points.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srp/graph.hpp"

namespace srp {

class InvariantViolation : public std::logic_error {
  public:
    explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

// ---------------------------------------------------------------------------
// CyclePath: an oriented vertex sequence; closed paths are cycles of the
// permutation, open paths are embedded walks.  Vertex order is the identity
// of the object, so the two orientations of a closed cycle are distinct.

struct CyclePath {
    std::vector<int> vertices;
    bool closed = false;

    // Edge count: |vertices| if closed with >= 2 vertices, |vertices| - 1 if
    // open, 0 for a singleton.
    int length() const {
        if (vertices.size() <= 1) return 0;
        return static_cast<int>(vertices.size()) - (closed ? 0 : 1);
    }
    bool valid_on(const Graph& g) const {
        for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
            if (!g.has_edge(vertices[i], vertices[i + 1])) return false;
        if (closed && vertices.size() >= 2 &&
            !g.has_edge(vertices.back(), vertices.front()))
            return false;
        std::vector<int> sorted = vertices;
        std::sort(sorted.begin(), sorted.end());
        return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    }
};

// ---------------------------------------------------------------------------
// GraphPermutation.

class GraphPermutation {
  public:
    GraphPermutation() : g_(nullptr) {}
    explicit GraphPermutation(const Graph& g)
        : g_(&g), image_(g.vertex_count()), preimage_(g.vertex_count()) {
        for (int v = 0; v < g.vertex_count(); ++v) image_[v] = preimage_[v] = v;
    }
    GraphPermutation(const Graph& g, std::vector<int> image) : g_(&g), image_(std::move(image)) {
        if (static_cast<int>(image_.size()) != g.vertex_count())
            throw std::invalid_argument("GraphPermutation: image size mismatch");
        preimage_.assign(g.vertex_count(), -1);
        for (int v = 0; v < g.vertex_count(); ++v) {
            int w = image_[v];
            if (w < 0 || w >= g.vertex_count() || preimage_[w] != -1)
                throw InvariantViolation("GraphPermutation: image is not a bijection");
            preimage_[w] = v;
        }
        for (int v = 0; v < g.vertex_count(); ++v)
            if (image_[v] != v && !g.has_edge(v, image_[v]))
                throw InvariantViolation("GraphPermutation: image not fixed-or-neighbour");
    }

    const Graph& graph() const { return *g_; }
    int size() const { return static_cast<int>(image_.size()); }
    int operator()(int v) const { return image_[v]; }
    int inverse(int v) const { return preimage_[v]; }
    const std::vector<int>& image() const { return image_; }

    // Swap the images of x and y (compose with the transposition (x y)),
    // keeping the preimage array consistent.  The caller checks validity.
    void swap_images(int x, int y) {
        std::swap(image_[x], image_[y]);
        preimage_[image_[x]] = x;
        preimage_[image_[y]] = y;
    }

    bool operator==(const GraphPermutation& o) const { return image_ == o.image_; }

    json to_json() const {
        json j;
        j["graph_hash"] = g_->hash();
        j["image"] = image_;
        return j;
    }
    static GraphPermutation from_json(const Graph& g, const json& j) {
        if (j.at("graph_hash").get<std::uint64_t>() != g.hash())
            throw std::invalid_argument("permutation graph_hash does not match graph");
        return GraphPermutation(g, j.at("image").get<std::vector<int>>());
    }

  private:
    const Graph* g_;
    std::vector<int> image_;
    std::vector<int> preimage_;
};

// Total validity check for raw image arrays (accepts iff bijective and every
// point is fixed or moved to a neighbour).
inline bool is_valid_permutation(const Graph& g, const std::vector<int>& image) {
    int n = g.vertex_count();
    if (static_cast<int>(image.size()) != n) return false;
    std::vector<char> used(n, 0);
    for (int v = 0; v < n; ++v) {
        int w = image[v];
        if (w < 0 || w >= n || used[w]) return false;
        used[w] = 1;
        if (w != v && !g.has_edge(v, w)) return false;
    }
    return true;
}

inline int energy(const GraphPermutation& p) {
    int h = 0;
    for (int v = 0; v < p.size(); ++v)
        if (p(v) != v) ++h;
    return h;
}

// The cycle of z: orbit in iteration order starting at z, closed.
inline CyclePath cycle_of(const GraphPermutation& p, int z) {
    CyclePath c;
    c.closed = true;
    int v = z;
    do {
        c.vertices.push_back(v);
        v = p(v);
    } while (v != z);
    return c;
}

// Orbit of a set: the union of cycles meeting it.
inline VertexSet orbit(const GraphPermutation& p, const VertexSet& a) {
    VertexSet out(p.size());
    a.for_each([&](int start) {
        if (out.contains(start)) return;
        int v = start;
        do {
            out.add(v);
            v = p(v);
        } while (v != start);
    });
    return out;
}

inline std::vector<CyclePath> cycle_decomposition(const GraphPermutation& p) {
    std::vector<CyclePath> out;
    std::vector<char> seen(p.size(), 0);
    for (int v = 0; v < p.size(); ++v) {
        if (seen[v]) continue;
        auto c = cycle_of(p, v);
        for (int w : c.vertices) seen[w] = 1;
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// OpenCycleConfig.

class CylinderLattice;

struct OpenCycleConfig {
    const Graph* graph = nullptr;  // parent graph (typically a cylinder's)
    VertexSet domain;              // A
    int source = -1;               // a
    int sink = -1;                 // z
    std::vector<int> image;        // full-size array; -1 outside the domain

    int operator()(int v) const { return image[v]; }
};

// Total validity check for open-cycle configurations.
inline bool is_valid_open_config(const OpenCycleConfig& c) {
    const Graph& g = *c.graph;
    int n = g.vertex_count();
    if (static_cast<int>(c.image.size()) != n) return false;
    if (!c.domain.contains(c.source) || !c.domain.contains(c.sink)) return false;
    if (c.source == c.sink) return false;
    if (c.image[c.sink] != c.sink) return false;
    std::vector<char> used(n, 0);
    bool ok = true;
    c.domain.for_each([&](int v) {
        int w = c.image[v];
        if (w < 0 || w >= n || !c.domain.contains(w)) { ok = false; return; }
        if (w != v && !g.has_edge(v, w)) { ok = false; return; }
        if (v != c.sink) {
            // images of A\{z} must be distinct and avoid the source
            if (w == c.source || used[w]) { ok = false; return; }
            used[w] = 1;
        }
    });
    if (!ok) return false;
    // Vertices outside the domain must carry the -1 marker.
    for (int v = 0; v < n; ++v)
        if (!c.domain.contains(v) && c.image[v] != -1) return false;
    return true;
}

inline int energy(const OpenCycleConfig& c) {
    int h = 0;
    c.domain.for_each([&](int v) {
        if (c.image[v] != v) ++h;
    });
    return h;
}

// The embedded walk: the orbit of the source, ending at the sink.
inline CyclePath walk_of(const OpenCycleConfig& c) {
    CyclePath w;
    w.closed = false;
    int v = c.source;
    int guard = c.domain.count() + 1;
    while (true) {
        w.vertices.push_back(v);
        if (v == c.sink) break;
        v = c.image[v];
        if (v < 0 || !c.domain.contains(v) || --guard <= 0)
            throw InvariantViolation("walk_of: orbit of the source never reaches the sink");
    }
    return w;
}

// Background flattening: the closed-model permutation on the domain that
// fixes every walk vertex and agrees with the configuration elsewhere.
// Returned as a full-size image array restricted to the domain (identity
// outside), so it can be fed to closures and subgraph machinery directly.
inline std::vector<int> flatten_walk(const OpenCycleConfig& c) {
    std::vector<int> flat(c.image.size());
    for (std::size_t v = 0; v < flat.size(); ++v) flat[v] = static_cast<int>(v);
    c.domain.for_each([&](int v) { flat[v] = c.image[v]; });
    for (int v : walk_of(c).vertices) flat[v] = v;
    return flat;
}

}  // namespace srp
