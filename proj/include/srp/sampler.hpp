// Metropolis samplers for the closed and open ensembles.
//
// The closed-model move swaps the images of a vertex pair {x,y} (composition
// with the transposition), proposed uniformly from the fixed list of pairs at
// graph distance <= 2.  Pairs further apart can never produce a valid
// configuration, so the list is exhaustive for this move class.  Edge-only
// swaps are not ergodic (an oriented plaquette cycle on the 2x2 grid admits no
// valid edge swap at all), which is why the distance-2 pairs are part of the
// baseline move set; ergodicity is still never assumed, it is certified by an
// explicit state-graph check on small instances.
//
// Transpositions alone are still not ergodic everywhere (see MoveTables), so
// the default kernel adds 3-point image rotations over distance-<=2 triples.
//
// The open-model chain uses the same moves away from the sink, a sink-step
// move that grows or shrinks the walk along the target hyperplane, and an
// energy-neutral global reflection where the ensemble is mirror-symmetric.
// Every kernel is reversible by construction; detailed balance is asserted
// exhaustively in the tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "srp/exact.hpp"
#include "srp/graph.hpp"
#include "srp/permutation.hpp"
#include "srp/rng.hpp"

namespace srp {

struct McmcConfig {
    double alpha = 1.0;
    std::uint64_t seed = 0;
    int chains = 1;
    std::uint64_t sweeps = 1000;     // retained samples per chain
    std::uint64_t burn_in = 0;       // proposals before sampling (0: 100 |V|)
    std::uint64_t thinning = 0;      // proposals between samples (0: |V|)
    std::string move_set = "swap_rotate";
    std::string subsampler = "auto";  // exact | mcmc | auto

    json to_json() const {
        return json{{"alpha", alpha},     {"seed", seed},         {"chains", chains},
                    {"sweeps", sweeps},   {"burn_in", burn_in},   {"thinning", thinning},
                    {"move_set", move_set}, {"subsampler", subsampler}};
    }
    static McmcConfig from_json(const json& j) {
        McmcConfig c;
        c.alpha = j.value("alpha", c.alpha);
        c.seed = j.value("seed", c.seed);
        c.chains = j.value("chains", c.chains);
        c.sweeps = j.value("sweeps", c.sweeps);
        c.burn_in = j.value("burn_in", c.burn_in);
        c.thinning = j.value("thinning", c.thinning);
        c.move_set = j.value("move_set", c.move_set);
        c.subsampler = j.value("subsampler", c.subsampler);
        return c;
    }
};

// Unordered vertex pairs within graph distance 2 of each other, restricted to
// a domain.  Pairs further apart can never yield a valid transposition move.
inline std::vector<std::pair<int, int>> swap_pairs(const Graph& g, const VertexSet& domain) {
    std::vector<std::pair<int, int>> pairs;
    domain.for_each([&](int x) {
        for (int y : g.neighbors(x)) {
            if (domain.contains(y) && y > x) pairs.emplace_back(x, y);
            if (!domain.contains(y)) continue;
            for (int w : g.neighbors(y))
                if (w > x && domain.contains(w) && !g.has_edge(x, w))
                    if (w != x) pairs.emplace_back(x, w);
        }
    });
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

// Proposal tables for the image-rearrangement kernel.  `pairs` are the
// transposition moves; `rotations` are ordered 3-point moves
// new(x) = old(y), new(y) = old(z), new(z) = old(x), listed with both
// orientations of every triple so the proposal distribution is symmetric.
//
// Transpositions alone are not ergodic: the two oriented boundary 8-cycles of
// the 3x3 grid admit no valid transposition whatsoever.  The rotation class
// is the cycle-merge/split extension that reconnects them; ergodicity of the
// combined kernel is certified by verify_ergodicity, never assumed.
struct MoveTables {
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::array<int, 3>> rotations;

    std::size_t size() const { return pairs.size() + rotations.size(); }
};

enum class MoveSet { SwapOnly, SwapAndRotate };

inline MoveSet parse_move_set(const std::string& name) {
    if (name == "pair_swap" || name == "swap") return MoveSet::SwapOnly;
    if (name == "swap_rotate" || name == "pair_swap_rotate" || name.empty())
        return MoveSet::SwapAndRotate;
    throw std::invalid_argument("unknown move_set: " + name);
}

inline MoveTables build_moves(const Graph& g, const VertexSet& domain,
                              MoveSet mode = MoveSet::SwapAndRotate) {
    MoveTables t;
    t.pairs = swap_pairs(g, domain);
    if (mode == MoveSet::SwapOnly) return t;
    // neighbourhood-of-radius-2 lists
    std::vector<std::vector<int>> near(g.vertex_count());
    for (auto [x, y] : t.pairs) {
        near[x].push_back(y);
        near[y].push_back(x);
    }
    auto close = [&](int a, int b) {
        return std::binary_search(near[a].begin(), near[a].end(), b);
    };
    for (auto& v : near) std::sort(v.begin(), v.end());
    domain.for_each([&](int x) {
        for (int y : near[x]) {
            if (y <= x) continue;
            for (int z : near[x]) {
                if (z <= y || !close(y, z)) continue;
                t.rotations.push_back({x, y, z});
                t.rotations.push_back({x, z, y});
            }
        }
    });
    return t;
}

namespace detail {
// Acceptance probabilities for the integer energy increments of a two-point
// move, cached so the chain never calls exp() in the hot loop.
struct AcceptTable {
    double p[4];  // increments +1..+3 (0 and below always accepted)
    void build(double alpha) {
        p[0] = 1.0;
        for (int k = 1; k <= 3; ++k) p[k] = std::exp(-alpha * k);
    }
    bool accept(int delta_h, RngStream& rng) const {
        if (delta_h <= 0) return true;
        return rng.uniform01() < p[delta_h];
    }
};
}  // namespace detail

// ---------------------------------------------------------------------------
// Closed-model chain.

class ClosedSampler {
  public:
    ClosedSampler(const Graph& g, double alpha, MoveSet mode = MoveSet::SwapAndRotate)
        : g_(&g),
          alpha_(alpha),
          moves_(build_moves(g, VertexSet::full(g.vertex_count()), mode)),
          state_(g) {
        accept_.build(alpha);
        if (moves_.size() == 0 && g.vertex_count() > 1)
            throw std::invalid_argument("ClosedSampler: no proposable moves");
    }

    const GraphPermutation& state() const { return state_; }
    void set_state(GraphPermutation p) { state_ = std::move(p); }
    double alpha() const { return alpha_; }
    std::size_t pair_count() const { return moves_.pairs.size(); }
    const MoveTables& moves() const { return moves_; }

    // One Metropolis proposal; invalid proposals count as rejections.
    void step(RngStream& rng) {
        if (moves_.size() == 0) return;  // single-vertex graphs have no moves
        std::uint64_t k = rng.uniform_below(moves_.size());
        if (k < moves_.pairs.size())
            step_pair(moves_.pairs[k].first, moves_.pairs[k].second, rng);
        else {
            const auto& r = moves_.rotations[k - moves_.pairs.size()];
            step_rotation(r[0], r[1], r[2], rng);
        }
    }

    // Proposal for a chosen pair; exposed for kernel-level tests.
    void step_pair(int x, int y, RngStream& rng) {
        int wx = state_(y), wy = state_(x);  // images after the swap
        if (wx != x && !g_->has_edge(x, wx)) return;
        if (wy != y && !g_->has_edge(y, wy)) return;
        int dh = (wx != x) + (wy != y) - (state_(x) != x) - (state_(y) != y);
        if (!accept_.accept(dh, rng)) return;
        state_.swap_images(x, y);
    }

    // Proposal for a chosen ordered rotation (x <- y <- z <- x).
    void step_rotation(int x, int y, int z, RngStream& rng) {
        int wx = state_(y), wy = state_(z), wz = state_(x);
        if (wx != x && !g_->has_edge(x, wx)) return;
        if (wy != y && !g_->has_edge(y, wy)) return;
        if (wz != z && !g_->has_edge(z, wz)) return;
        int dh = (wx != x) + (wy != y) + (wz != z) - (state_(x) != x) - (state_(y) != y) -
                 (state_(z) != z);
        if (!accept_.accept(dh, rng)) return;
        state_.swap_images(x, y);   // x <-> y
        state_.swap_images(y, z);   // then y <-> z completes the 3-rotation
    }

    void run(std::uint64_t proposals, RngStream& rng) {
        for (std::uint64_t i = 0; i < proposals; ++i) step(rng);
    }

    template <class OnSample>
    void sample(const McmcConfig& cfg, RngStream& rng, OnSample&& on_sample) {
        const std::uint64_t burn =
            cfg.burn_in ? cfg.burn_in : 100 * static_cast<std::uint64_t>(g_->vertex_count());
        const std::uint64_t thin =
            cfg.thinning ? cfg.thinning : static_cast<std::uint64_t>(g_->vertex_count());
        run(burn, rng);
        for (std::uint64_t s = 0; s < cfg.sweeps; ++s) {
            run(thin, rng);
            on_sample(state_);
        }
    }

  private:
    const Graph* g_;
    double alpha_;
    MoveTables moves_;
    GraphPermutation state_;
    detail::AcceptTable accept_;
};

// Lag-k autocorrelation of a scalar series (energy traces, diagnostics only).
inline double autocorrelation(const std::vector<double>& series, int lag) {
    if (static_cast<int>(series.size()) <= lag) return 0.0;
    double mean = 0.0;
    for (double x : series) mean += x;
    mean /= static_cast<double>(series.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        den += (series[i] - mean) * (series[i] - mean);
        if (i + lag < series.size())
            num += (series[i] - mean) * (series[i + lag] - mean);
    }
    return den == 0.0 ? 0.0 : num / den;
}

// ---------------------------------------------------------------------------
// Ergodicity certificate: the proposal graph over the full ensemble is
// explored by BFS.  The kernel is reversible, so reachability from any state
// is equivalent to strong connectivity.

struct ErgodicityReport {
    std::uint64_t state_count = 0;
    bool connected = false;
    // Representatives of two mutually unreachable states when disconnected.
    std::optional<std::pair<std::vector<int>, std::vector<int>>> counterexample;
};

inline ErgodicityReport verify_ergodicity(const Graph& g,
                                          MoveSet mode = MoveSet::SwapAndRotate,
                                          std::uint64_t cap = kDefaultEnumerationCap) {
    std::map<std::vector<int>, int> index;
    std::vector<std::vector<int>> states;
    enumerate_closed(g, cap, [&](const std::vector<int>& image, int) {
        index.emplace(image, static_cast<int>(states.size()));
        states.push_back(image);
    });
    auto moves = build_moves(g, VertexSet::full(g.vertex_count()), mode);
    std::vector<char> seen(states.size(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    std::size_t reached = 1;
    auto visit = [&](const std::vector<int>& next) {
        if (!is_valid_permutation(g, next)) return;
        auto it = index.find(next);
        if (it != index.end() && !seen[it->second]) {
            seen[it->second] = 1;
            ++reached;
            queue.push_back(it->second);
        }
    };
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (auto [x, y] : moves.pairs) {
            std::vector<int> next = states[s];
            std::swap(next[x], next[y]);
            visit(next);
        }
        for (const auto& r : moves.rotations) {
            std::vector<int> next = states[s];
            next[r[0]] = states[s][r[1]];
            next[r[1]] = states[s][r[2]];
            next[r[2]] = states[s][r[0]];
            visit(next);
        }
    }
    ErgodicityReport report;
    report.state_count = states.size();
    report.connected = reached == states.size();
    if (!report.connected)
        for (std::size_t i = 0; i < states.size(); ++i)
            if (!seen[i]) {
                report.counterexample = {states[0], states[i]};
                break;
            }
    return report;
}

// ---------------------------------------------------------------------------
// Open-model chain on S_A^{a -> l} (hyperplane sink) or S_A^{a -> z} (fixed
// sink).  Moves: image swaps over pairs excluding the current sink, plus
// sink steps along the hyperplane in hyperplane mode.

class OpenSampler {
  public:
    // Hyperplane-sink mode; `sinks` must be contained in the domain.  When
    // the source sits on the zero axis and the domain is mirror-symmetric,
    // the global transverse reflection is added as an energy-neutral move;
    // it conjugates the configuration by a lattice automorphism that fixes
    // the ensemble, so it preserves the target law while decorrelating the
    // slowly mixing sign mode of the walk.
    OpenSampler(const CylinderLattice& lat, const VertexSet& domain, int source, double alpha)
        : OpenSampler(lat.graph(), domain, source, lat.last_hyperplane(), std::nullopt, alpha) {
        try_enable_reflection(lat);
    }

    // Fixed-sink mode.
    OpenSampler(const CylinderLattice& lat, const VertexSet& domain, int source, int sink,
                double alpha)
        : OpenSampler(lat.graph(), domain, source, VertexSet::of(lat.vertex_count(), {sink}),
                      sink, alpha) {
        try_enable_reflection(lat);
    }

    OpenSampler(const Graph& g, const VertexSet& domain, int source, const VertexSet& sinks,
                std::optional<int> fixed_sink, double alpha,
                MoveSet mode = MoveSet::SwapAndRotate)
        : g_(&g), domain_(domain), source_(source), sinks_(sinks), alpha_(alpha) {
        accept_.build(alpha);
        if (!sinks_.subset_of(domain_))
            throw std::invalid_argument("OpenSampler: sink set must lie in the domain");
        moves_ = build_moves(g, domain, mode);
        if (!fixed_sink) {
            sinks_.for_each([&](int u) {
                for (int v : g.neighbors(u))
                    if (sinks_.contains(v)) sink_steps_.emplace_back(u, v);
            });
        }
        state_ = initial_config(fixed_sink);
        move_count_ = moves_.size() + sink_steps_.size();
    }

    // Install the reflection move when the automorphism fixes the ensemble.
    void try_enable_reflection(const CylinderLattice& lat) {
        auto phi = lat.reflect_about_zero();
        if (phi[source_] != source_) return;
        VertexSet dom_image(domain_.universe_size()), sink_image(domain_.universe_size());
        domain_.for_each([&](int v) { dom_image.add(phi[v]); });
        sinks_.for_each([&](int v) { sink_image.add(phi[v]); });
        if (dom_image != domain_ || sink_image != sinks_) return;
        reflection_ = std::move(phi);
        move_count_ = moves_.size() + sink_steps_.size() + 1;
    }

    const OpenCycleConfig& state() const { return state_; }
    void set_state(OpenCycleConfig c) { state_ = std::move(c); }
    std::size_t move_count() const { return move_count_; }

    void step(RngStream& rng) {
        std::uint64_t k = rng.uniform_below(move_count_);
        if (k < moves_.pairs.size()) {
            propose_swap(moves_.pairs[k].first, moves_.pairs[k].second, rng);
            return;
        }
        k -= moves_.pairs.size();
        if (k < moves_.rotations.size()) {
            const auto& r = moves_.rotations[k];
            propose_rotation(r[0], r[1], r[2], rng);
            return;
        }
        k -= moves_.rotations.size();
        if (k < sink_steps_.size()) {
            propose_sink_step(sink_steps_[k], rng);
            return;
        }
        apply_reflection();
    }

    // Energy-neutral involution pi -> phi o pi o phi; always accepted.
    void apply_reflection() {
        const auto& phi = *reflection_;
        std::vector<int> image(state_.image.size(), -1);
        domain_.for_each([&](int v) { image[phi[v]] = phi[state_.image[v]]; });
        state_.image.swap(image);
        state_.sink = phi[state_.sink];
    }
    bool has_reflection_move() const { return reflection_.has_value(); }

    void run(std::uint64_t proposals, RngStream& rng) {
        for (std::uint64_t i = 0; i < proposals; ++i) step(rng);
    }

    template <class OnSample>
    void sample(const McmcConfig& cfg, RngStream& rng, OnSample&& on_sample) {
        const std::uint64_t size = static_cast<std::uint64_t>(domain_.count());
        const std::uint64_t burn = cfg.burn_in ? cfg.burn_in : 100 * size;
        const std::uint64_t thin = cfg.thinning ? cfg.thinning : size;
        run(burn, rng);
        for (std::uint64_t s = 0; s < cfg.sweeps; ++s) {
            run(thin, rng);
            on_sample(state_);
        }
    }

    // Shortest-path initial configuration: the walk runs along a geodesic
    // inside the domain from the source to the nearest sink, everything else
    // is fixed.
    OpenCycleConfig initial_config(std::optional<int> fixed_sink) const {
        // BFS within the domain, from the sinks backwards.
        std::vector<int> dist(g_->vertex_count(), kUnreachable);
        std::deque<int> queue;
        VertexSet starts = fixed_sink ? VertexSet::of(g_->vertex_count(), {*fixed_sink})
                                      : sinks_;
        starts.for_each([&](int z) {
            dist[z] = 0;
            queue.push_back(z);
        });
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : g_->neighbors(u))
                if (domain_.contains(w) && dist[w] == kUnreachable) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
        }
        if (dist[source_] == kUnreachable)
            throw std::invalid_argument("OpenSampler: sink unreachable from source");
        OpenCycleConfig c;
        c.graph = g_;
        c.domain = domain_;
        c.source = source_;
        c.image.assign(g_->vertex_count(), -1);
        domain_.for_each([&](int v) { c.image[v] = v; });
        int v = source_;
        while (dist[v] > 0) {
            int next = -1;
            for (int w : g_->neighbors(v))
                if (domain_.contains(w) && dist[w] == dist[v] - 1) {
                    next = w;
                    break;
                }
            if (next < 0) throw std::logic_error("OpenSampler: geodesic construction failed");
            c.image[v] = next;
            v = next;
        }
        c.sink = v;
        return c;
    }

    void propose_swap(int x, int y, RngStream& rng) {
        if (x == state_.sink || y == state_.sink) return;
        int wx = state_.image[y], wy = state_.image[x];
        if (wx != x && !g_->has_edge(x, wx)) return;
        if (wy != y && !g_->has_edge(y, wy)) return;
        int dh = (wx != x) + (wy != y) - (state_.image[x] != x) - (state_.image[y] != y);
        if (!accept_.accept(dh, rng)) return;
        state_.image[x] = wx;
        state_.image[y] = wy;
    }

    void propose_rotation(int x, int y, int z, RngStream& rng) {
        if (x == state_.sink || y == state_.sink || z == state_.sink) return;
        int wx = state_.image[y], wy = state_.image[z], wz = state_.image[x];
        if (wx != x && !g_->has_edge(x, wx)) return;
        if (wy != y && !g_->has_edge(y, wy)) return;
        if (wz != z && !g_->has_edge(z, wz)) return;
        int dh = (wx != x) + (wy != y) + (wz != z) - (state_.image[x] != x) -
                 (state_.image[y] != y) - (state_.image[z] != z);
        if (!accept_.accept(dh, rng)) return;
        state_.image[x] = wx;
        state_.image[y] = wy;
        state_.image[z] = wz;
    }

    void propose_sink_step(const std::pair<int, int>& uv, RngStream& rng) {
        auto [u, v] = uv;
        if (state_.sink == u && state_.image[v] == v && v != source_) {
            // extend: the walk grows one step u -> v, v becomes the sink
            if (!accept_.accept(+1, rng)) return;
            state_.image[u] = v;
            state_.sink = v;
        } else if (state_.sink == v && state_.image[u] == v && u != source_) {
            // retract: the final step u -> v is removed, u becomes the sink
            if (!accept_.accept(-1, rng)) return;
            state_.image[u] = u;
            state_.sink = u;
        }
    }

  private:

    const Graph* g_;
    VertexSet domain_;
    int source_;
    VertexSet sinks_;
    double alpha_;
    MoveTables moves_;
    std::vector<std::pair<int, int>> sink_steps_;
    std::optional<std::vector<int>> reflection_;
    std::size_t move_count_ = 0;
    OpenCycleConfig state_;
    detail::AcceptTable accept_;
};

// State-graph connectivity certificate for the open-model move set.
inline ErgodicityReport verify_open_ergodicity(const Graph& g, const VertexSet& domain,
                                               int source, const VertexSet& sinks,
                                               MoveSet mode = MoveSet::SwapAndRotate,
                                               std::uint64_t cap = kDefaultEnumerationCap) {
    std::map<std::vector<int>, int> index;
    std::vector<std::vector<int>> states;
    std::vector<int> state_sink;
    enumerate_open_to_set(g, domain, source, sinks, cap,
                          [&](const std::vector<int>& image, int, int z) {
                              if (index.emplace(image, static_cast<int>(states.size())).second) {
                                  states.push_back(image);
                                  state_sink.push_back(z);
                              }
                          });
    ErgodicityReport report;
    report.state_count = states.size();
    if (states.empty()) return report;

    auto moves = build_moves(g, domain, mode);
    std::vector<std::pair<int, int>> sink_steps;
    sinks.for_each([&](int u) {
        for (int v : g.neighbors(u))
            if (sinks.contains(v)) sink_steps.emplace_back(u, v);
    });

    std::vector<char> seen(states.size(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    std::size_t reached = 1;
    auto visit = [&](const std::vector<int>& next) {
        auto it = index.find(next);
        if (it != index.end() && !seen[it->second]) {
            seen[it->second] = 1;
            ++reached;
            queue.push_back(it->second);
        }
    };
    auto local_ok = [&](const std::vector<int>& img, int v) {
        return img[v] == v || g.has_edge(v, img[v]);
    };
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        int sink = state_sink[s];
        for (auto [x, y] : moves.pairs) {
            if (x == sink || y == sink) continue;
            std::vector<int> next = states[s];
            std::swap(next[x], next[y]);
            if (local_ok(next, x) && local_ok(next, y)) visit(next);
        }
        for (const auto& r : moves.rotations) {
            if (r[0] == sink || r[1] == sink || r[2] == sink) continue;
            std::vector<int> next = states[s];
            next[r[0]] = states[s][r[1]];
            next[r[1]] = states[s][r[2]];
            next[r[2]] = states[s][r[0]];
            if (local_ok(next, r[0]) && local_ok(next, r[1]) && local_ok(next, r[2]))
                visit(next);
        }
        for (auto [u, v] : sink_steps) {
            std::vector<int> next = states[s];
            if (sink == u && next[v] == v && v != source) {
                next[u] = v;
                visit(next);
            } else if (sink == v && next[u] == v && u != source) {
                next[u] = u;
                visit(next);
            }
        }
    }
    report.connected = reached == states.size();
    if (!report.connected)
        for (std::size_t i = 0; i < states.size(); ++i)
            if (!seen[i]) {
                report.counterexample = {states[0], states[i]};
                break;
            }
    return report;
}

// ---------------------------------------------------------------------------
// Move-set certification.  Large-scale open-model runs must be preceded by a
// state-graph certification at small sizes (or explicitly forced).

struct OpenMoveCertificate {
    bool certified = false;
    std::vector<std::uint64_t> state_counts;
};

inline OpenMoveCertificate certify_open_moves() {
    OpenMoveCertificate cert;
    cert.certified = true;
    for (auto [levels, period] : {std::pair{3, 2}, {4, 2}, {3, 3}}) {
        auto lat = CylinderLattice::build_rect(levels, period);
        auto report = verify_open_ergodicity(lat.graph(), VertexSet::full(lat.vertex_count()),
                                             0, lat.last_hyperplane());
        cert.state_counts.push_back(report.state_count);
        cert.certified = cert.certified && report.connected && report.state_count > 0;
    }
    return cert;
}

}  // namespace srp
