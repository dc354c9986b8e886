// The recursive sampling procedure: a target-distributed permutation is
// assembled cycle block by cycle block.  Each round samples a fresh
// permutation of the remaining set B, keeps the cycles meeting a chosen
// keep-set K (which may depend on everything previously revealed plus the
// strategy's private randomness, but never on the current draw), and recurses
// on the rest.  The assembled map has exactly the target law, which
// assembled_law_exact verifies termwise by convolving every randomness path.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srp/exact.hpp"
#include "srp/graph.hpp"
#include "srp/permutation.hpp"
#include "srp/rng.hpp"
#include "srp/sampler.hpp"

namespace srp {

class StrategyContractError : public std::logic_error {
  public:
    explicit StrategyContractError(const std::string& what) : std::logic_error(what) {}
};

struct SamplingRound {
    VertexSet remaining;   // B_i
    VertexSet keep;        // K_i
    VertexSet kept_orbit;  // D_i = Or_{pi_i}(K_i)
    std::vector<int> sub_image;  // sigma_{B_i} extended by the identity
};

// Keep-set chooser.  The rng argument is the strategy's own stream; it is
// null for deterministic choosers driven by the exact-law recursion.
using KeepChooser = std::function<VertexSet(const Graph& g, const VertexSet& remaining,
                                            const std::vector<SamplingRound>& history,
                                            RngStream* rng)>;

struct SamplingStrategy {
    std::string name;
    bool deterministic = true;
    KeepChooser choose;
};

struct SamplingTrace {
    std::vector<SamplingRound> rounds;
    std::vector<int> assembled_image;
    int stop_round = -1;  // first round with K == B, -1 if none

    GraphPermutation assembled(const Graph& g) const {
        return GraphPermutation(g, assembled_image);
    }

    // Replay-friendly dump: every round's (B, K, D) plus the drawn
    // sub-permutation, and the assembled image.
    json to_json() const {
        json rounds_json = json::array();
        for (const auto& r : rounds)
            rounds_json.push_back(json{{"B", r.remaining.to_vector()},
                                       {"K", r.keep.to_vector()},
                                       {"D", r.kept_orbit.to_vector()},
                                       {"sigma", r.sub_image}});
        return json{{"rounds", rounds_json},
                    {"assembled", assembled_image},
                    {"stop_round", stop_round}};
    }
    bool partition_ok(const Graph& g) const {
        VertexSet seen(g.vertex_count());
        for (const auto& r : rounds) {
            bool disjoint = !r.kept_orbit.intersects(seen);
            seen |= r.kept_orbit;
            if (!disjoint) return false;
        }
        return seen == VertexSet::full(g.vertex_count());
    }
};

// ---------------------------------------------------------------------------
// Canonical strategies.

inline SamplingStrategy one_step_strategy() {
    return {"one-step", true,
            [](const Graph&, const VertexSet& b, const std::vector<SamplingRound>&,
               RngStream*) { return b; }};
}

inline SamplingStrategy first_vertex_strategy() {
    return {"first-vertex", true,
            [](const Graph&, const VertexSet& b, const std::vector<SamplingRound>&,
               RngStream*) {
                VertexSet k(b.universe_size());
                int first = -1;
                b.for_each([&](int v) {
                    if (first < 0) first = v;
                });
                k.add(first);
                return k;
            }};
}

// Peels the cycles through A one vertex at a time, in canonical vertex order;
// once A is exhausted the rest is kept wholesale.
inline SamplingStrategy orbit_by_orbit_strategy(const VertexSet& a) {
    return {"orbit-by-orbit", true,
            [a](const Graph&, const VertexSet& b, const std::vector<SamplingRound>&,
                RngStream*) {
                VertexSet k(b.universe_size());
                int first = -1;
                (a & b).for_each([&](int v) {
                    if (first < 0) first = v;
                });
                if (first >= 0) {
                    k.add(first);
                    return k;
                }
                return b;
            }};
}

// Symmetrization strategy: starts from the symmetrized seed Phi(A) and then
// repeatedly keeps B intersect Phi(B^c) until that set is empty, at which
// point the revealed part is a Phi-compatible invariant set.
inline SamplingStrategy phi_compatible_strategy(const SymmetryGroup& phi, const VertexSet& a) {
    return {"phi-compatible", true,
            [phi, a](const Graph& g, const VertexSet& b, const std::vector<SamplingRound>& hist,
                     RngStream*) {
                VertexSet full = VertexSet::full(g.vertex_count());
                if (hist.empty() && b == full) return phi.image(a);
                VertexSet k = b & phi.image(b.complement());
                return k.empty() ? b : k;
            }};
}

// ---------------------------------------------------------------------------
// Subsamplers: where sigma_B comes from.

enum class Subsampler { Exact, Mcmc };

inline std::vector<int> draw_sub_permutation(const Graph& g, const VertexSet& domain,
                                             double alpha, Subsampler mode, RngStream& rng,
                                             const McmcConfig& mcmc_cfg = {}) {
    if (domain.empty()) {
        std::vector<int> id(g.vertex_count());
        for (int v = 0; v < g.vertex_count(); ++v) id[v] = v;
        return id;
    }
    if (mode == Subsampler::Exact) {
        auto dist = exact_closed_distribution(g, domain, alpha);
        return dist.configs[dist.sample(rng)];
    }
    // Fresh chain on the induced subgraph, mapped back to parent labels.
    auto induced = g.induced(domain);
    ClosedSampler chain(induced.graph, alpha, parse_move_set(mcmc_cfg.move_set));
    std::uint64_t burn = mcmc_cfg.burn_in
                             ? mcmc_cfg.burn_in
                             : 200 * static_cast<std::uint64_t>(induced.graph.vertex_count());
    chain.run(burn, rng);
    std::vector<int> image(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) image[v] = v;
    for (int sv = 0; sv < induced.graph.vertex_count(); ++sv)
        image[induced.to_parent[sv]] = induced.to_parent[chain.state()(sv)];
    return image;
}

// ---------------------------------------------------------------------------
// The recursive sampling procedure.

inline SamplingTrace run_sampling_procedure(const Graph& g, const SamplingStrategy& strat,
                                            double alpha, RngStream& strategy_rng,
                                            RngStream& permutation_rng,
                                            Subsampler mode = Subsampler::Exact,
                                            const McmcConfig& mcmc_cfg = {}) {
    const int n = g.vertex_count();
    SamplingTrace trace;
    trace.assembled_image.assign(n, -1);
    VertexSet b = VertexSet::full(n);
    while (!b.empty()) {
        VertexSet k = strat.choose(g, b, trace.rounds, &strategy_rng);
        if (k.empty())
            throw StrategyContractError("strategy returned an empty keep-set on nonempty B");
        if (!k.subset_of(b))
            throw StrategyContractError("strategy returned a keep-set outside B");
        if (trace.stop_round < 0 && k == b)
            trace.stop_round = static_cast<int>(trace.rounds.size());
        std::vector<int> sub = draw_sub_permutation(g, b, alpha, mode, permutation_rng, mcmc_cfg);
        GraphPermutation sigma(g, sub);
        VertexSet d = orbit(sigma, k);
        d.for_each([&](int v) { trace.assembled_image[v] = sub[v]; });
        trace.rounds.push_back({b, k, d, std::move(sub)});
        b.subtract(d);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Exact law of the assembled permutation for a deterministic strategy, by
// full recursion over the sub-permutation draws of every round.

namespace detail {
template <class Visitor>
void procedure_outcomes_rec(const Graph& g, const SamplingStrategy& strat, double alpha,
                            SamplingTrace& trace, const VertexSet& b, double prob,
                            Visitor&& visit) {
    if (b.empty()) {
        visit(static_cast<const SamplingTrace&>(trace), prob);
        return;
    }
    VertexSet k = strat.choose(g, b, trace.rounds, nullptr);
    if (k.empty() || !k.subset_of(b))
        throw StrategyContractError("strategy violated the keep-set contract");
    bool stops_here = trace.stop_round < 0 && k == b;
    if (stops_here) trace.stop_round = static_cast<int>(trace.rounds.size());
    auto dist = exact_closed_distribution(g, b, alpha);
    for (std::size_t i = 0; i < dist.configs.size(); ++i) {
        GraphPermutation sigma(g, dist.configs[i]);
        VertexSet d = orbit(sigma, k);
        d.for_each([&](int v) { trace.assembled_image[v] = dist.configs[i][v]; });
        trace.rounds.push_back({b, k, d, dist.configs[i]});
        procedure_outcomes_rec(g, strat, alpha, trace, b - d, prob * dist.probabilities[i],
                               visit);
        trace.rounds.pop_back();
    }
    if (stops_here) trace.stop_round = -1;
}
}  // namespace detail

// Visits every realization (trace, probability) of the procedure.
template <class Visitor>
void enumerate_procedure_outcomes(const Graph& g, const SamplingStrategy& strat, double alpha,
                                  Visitor&& visit) {
    if (!strat.deterministic)
        throw std::invalid_argument("outcome enumeration needs a deterministic strategy");
    SamplingTrace trace;
    trace.assembled_image.assign(g.vertex_count(), -1);
    detail::procedure_outcomes_rec(g, strat, alpha, trace, VertexSet::full(g.vertex_count()),
                                   1.0, std::forward<Visitor>(visit));
}

// The assembled law as an exact distribution over image arrays.
inline ExactDistribution assembled_law_exact(const Graph& g, const SamplingStrategy& strat,
                                             double alpha) {
    std::map<std::vector<int>, double> law;
    enumerate_procedure_outcomes(g, strat, alpha, [&](const SamplingTrace& t, double p) {
        law[t.assembled_image] += p;
    });
    ExactDistribution out;
    for (auto& [image, p] : law) {
        out.configs.push_back(image);
        out.probabilities.push_back(p);
    }
    return out;
}

// Largest deviation between the assembled law and the target Boltzmann law.
inline double assembled_law_gap(const Graph& g, const SamplingStrategy& strat, double alpha) {
    auto law = assembled_law_exact(g, strat, alpha);
    auto z = partition_closed(g, alpha);
    double total = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < law.configs.size(); ++i) {
        GraphPermutation p(g, law.configs[i]);
        double target = std::exp(-alpha * energy(p)) / z.value();
        worst = std::max(worst, std::abs(law.probabilities[i] - target));
        total += law.probabilities[i];
    }
    worst = std::max(worst, std::abs(total - 1.0));
    return worst;
}

// ---------------------------------------------------------------------------
// The symmetrized invariant-set sampler.  The revealed set hat(A) is read off
// at the first round (after the seeded one) whose remaining set satisfies
// B intersect Phi(B^c) = empty: precisely then B^c is Phi-compatible.  Note
// that the keep-set merely *equalling* B is not a termination signal -- the
// fallback branch may coincidentally return all of B while B^c is still
// asymmetric -- so the emptiness condition itself is re-evaluated here.

// Index of the stop round in a trace produced by the phi-compatible strategy,
// or rounds.size() when the procedure exhausted V first (hat(A) = V).
inline int phi_stop_round(const Graph&, const SymmetryGroup& phi,
                          const SamplingTrace& trace) {
    for (std::size_t i = 1; i < trace.rounds.size(); ++i) {
        const VertexSet& b = trace.rounds[i].remaining;
        if (!b.intersects(phi.image(b.complement()))) return static_cast<int>(i);
    }
    return static_cast<int>(trace.rounds.size());
}

inline VertexSet phi_hat_set(const Graph& g, const SymmetryGroup& phi,
                             const SamplingTrace& trace) {
    int stop = phi_stop_round(g, phi, trace);
    if (stop == static_cast<int>(trace.rounds.size()))
        return VertexSet::full(g.vertex_count());
    return trace.rounds[stop].remaining.complement();
}

struct PhiCompatibleSample {
    VertexSet hat_a;
    int stop_round = 0;
    SamplingTrace trace;
};

inline PhiCompatibleSample sample_phi_compatible_set(const Graph& g, const SymmetryGroup& phi,
                                                     const VertexSet& a, double alpha,
                                                     RngStream& strategy_rng,
                                                     RngStream& permutation_rng,
                                                     Subsampler mode = Subsampler::Exact,
                                                     const McmcConfig& mcmc_cfg = {}) {
    if (a.empty()) throw std::invalid_argument("sample_phi_compatible_set: A must be nonempty");
    auto strat = phi_compatible_strategy(phi, a);
    auto trace = run_sampling_procedure(g, strat, alpha, strategy_rng, permutation_rng, mode,
                                        mcmc_cfg);
    PhiCompatibleSample out;
    out.stop_round = phi_stop_round(g, phi, trace);
    out.hat_a = phi_hat_set(g, phi, trace);
    out.trace = std::move(trace);
    return out;
}

// Per-round growth sizes |D_i \ K_i| for the rounds before the stop round;
// these are the quantities dominated by the branching-process comparison.
inline std::vector<int> phi_round_growth(const Graph& g, const SymmetryGroup& phi,
                                         const SamplingTrace& trace) {
    std::vector<int> q;
    int last = std::min<int>(phi_stop_round(g, phi, trace),
                             static_cast<int>(trace.rounds.size()));
    for (int i = 0; i < last; ++i)
        q.push_back((trace.rounds[i].kept_orbit - trace.rounds[i].keep).count());
    return q;
}

}  // namespace srp
