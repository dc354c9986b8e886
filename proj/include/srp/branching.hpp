// Galton-Watson processes with arbitrary integer offspring laws, the exact
// law of the total population via the hitting-time representation, cycle
// length domination envelopes, and the stochastic-comparison harness used to
// bound orbit and invariant-set sizes.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "srp/exact.hpp"
#include "srp/graph.hpp"
#include "srp/rng.hpp"

namespace srp {

struct OffspringLaw {
    std::vector<double> pmf;  // pmf[k] = P(offspring = k), finite support

    double mean() const {
        double m = 0.0;
        for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
        return m;
    }
    double mass() const {
        double s = 0.0;
        for (double p : pmf) s += p;
        return s;
    }
    void validate() const {
        for (double p : pmf)
            if (p < -1e-15) throw std::invalid_argument("OffspringLaw: negative mass");
        if (std::abs(mass() - 1.0) > 1e-12)
            throw std::invalid_argument("OffspringLaw: pmf does not sum to 1");
    }
    // Offspring values scaled by an integer factor (support k -> factor * k).
    OffspringLaw scaled(int factor) const {
        OffspringLaw out;
        out.pmf.assign(pmf.size() == 0 ? 1 : factor * (pmf.size() - 1) + 1, 0.0);
        for (std::size_t k = 0; k < pmf.size(); ++k) out.pmf[factor * k] += pmf[k];
        return out;
    }

    json to_json() const {
        json j = json::object();
        for (std::size_t k = 0; k < pmf.size(); ++k)
            if (pmf[k] != 0.0) j[std::to_string(k)] = pmf[k];
        return j;
    }
    static OffspringLaw from_json(const json& j) {
        OffspringLaw law;
        for (auto it = j.begin(); it != j.end(); ++it) {
            std::size_t k = std::stoul(it.key());
            if (law.pmf.size() <= k) law.pmf.resize(k + 1, 0.0);
            law.pmf[k] = it.value().get<double>();
        }
        law.validate();
        return law;
    }
};

struct GWProcess {
    OffspringLaw offspring;
    int initial = 1;

    bool subcritical() const { return offspring.mean() < 1.0; }
    // E[W] = Z_0 / (1 - m) for subcritical processes.
    double expected_total() const {
        if (!subcritical()) throw std::domain_error("expected_total: process not subcritical");
        return initial / (1.0 - offspring.mean());
    }
};

// ---------------------------------------------------------------------------
// Forward simulation with a hard population cap (never unbounded).

struct GwSimulation {
    std::vector<std::uint64_t> generations;  // Z_0, Z_1, ... until extinction or cap
    std::uint64_t total = 0;                 // capped total population
    bool capped = false;
};

inline int sample_offspring(const OffspringLaw& law, RngStream& rng) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t k = 0; k < law.pmf.size(); ++k) {
        acc += law.pmf[k];
        if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(law.pmf.size()) - 1;
}

inline GwSimulation simulate_gw(const GWProcess& gw, int max_generations, std::uint64_t pop_cap,
                                RngStream& rng) {
    GwSimulation sim;
    std::uint64_t alive = static_cast<std::uint64_t>(gw.initial);
    sim.generations.push_back(alive);
    sim.total = alive;
    for (int gen = 0; gen < max_generations && alive > 0; ++gen) {
        std::uint64_t next = 0;
        for (std::uint64_t i = 0; i < alive; ++i)
            next += static_cast<std::uint64_t>(sample_offspring(gw.offspring, rng));
        alive = next;
        sim.generations.push_back(alive);
        sim.total += alive;
        if (sim.total > pop_cap) {
            sim.capped = true;
            sim.total = pop_cap;
            break;
        }
    }
    if (alive > 0 && !sim.capped) sim.capped = true;  // horizon hit while alive
    return sim;
}

// Monotone coupling: both processes read the same offspring array (the k-th
// individual of generation j consumes draw (j,k)), so the smaller initial
// population yields a pathwise-dominated trajectory.
struct CoupledGw {
    std::vector<std::uint64_t> small, large;
    bool pathwise_dominated = true;
};

inline CoupledGw simulate_gw_coupled(const OffspringLaw& law, int z0_small, int z0_large,
                                     int max_generations, std::uint64_t pop_cap,
                                     RngStream& rng) {
    CoupledGw out;
    std::uint64_t a = static_cast<std::uint64_t>(z0_small);
    std::uint64_t b = static_cast<std::uint64_t>(z0_large);
    out.small.push_back(a);
    out.large.push_back(b);
    while ((a > 0 || b > 0) && out.small.size() <= static_cast<std::size_t>(max_generations) &&
           a <= pop_cap && b <= pop_cap) {
        std::uint64_t next_a = 0, next_b = 0;
        std::uint64_t draws = std::max(a, b);
        for (std::uint64_t k = 0; k < draws; ++k) {
            int xi = sample_offspring(law, rng);
            if (k < a) next_a += static_cast<std::uint64_t>(xi);
            if (k < b) next_b += static_cast<std::uint64_t>(xi);
        }
        a = next_a;
        b = next_b;
        out.small.push_back(a);
        out.large.push_back(b);
        if (a > b) out.pathwise_dominated = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact law of the total population W restricted to W <= ell_max, through the
// hitting-time representation: W is the first time the walk
// Z_0 + sum (xi_i - 1) reaches zero when individuals are explored one by one.

struct TotalPopulationLaw {
    std::vector<double> pmf;  // pmf[w] = P(W = w), w = 0..ell_max
    double remainder = 0.0;   // P(W > ell_max), including survival forever

    double tail(int n) const {  // P(W > n)
        double t = remainder;
        for (std::size_t w = static_cast<std::size_t>(std::max(n + 1, 0)); w < pmf.size(); ++w)
            t += pmf[w];
        return t;
    }
};

inline TotalPopulationLaw total_population_tail(const GWProcess& gw, int ell_max,
                                                bool require_full_mass = false) {
    gw.offspring.validate();
    if (require_full_mass && !gw.subcritical() && gw.offspring.mean() >= 1.0) {
        // supercritical (or critical) processes keep positive mass at infinity
        bool survives = gw.offspring.mean() > 1.0;
        if (survives)
            throw std::domain_error(
                "total_population_tail: full mass requested for a supercritical process");
    }
    TotalPopulationLaw law;
    law.pmf.assign(ell_max + 1, 0.0);
    // alive[z] = probability that z individuals remain unexplored
    std::vector<double> alive(ell_max + 2, 0.0);
    if (gw.initial <= ell_max + 1)
        alive[gw.initial] = 1.0;
    else
        law.remainder = 1.0;
    if (gw.initial == 0) {
        law.pmf[0] = 1.0;
        alive[0] = 0.0;
        law.remainder = 0.0;
        return law;
    }
    double lost = law.remainder;
    for (int w = 1; w <= ell_max; ++w) {
        std::vector<double> next(ell_max + 2, 0.0);
        for (int z = 1; z <= ell_max + 1; ++z) {
            if (alive[z] == 0.0) continue;
            for (std::size_t k = 0; k < gw.offspring.pmf.size(); ++k) {
                double p = gw.offspring.pmf[k];
                if (p == 0.0) continue;
                int zn = z - 1 + static_cast<int>(k);
                if (zn > ell_max + 1) zn = ell_max + 1;  // cannot absorb in budget
                next[zn] += alive[z] * p;
            }
        }
        law.pmf[w] = next[0];
        next[0] = 0.0;
        alive.swap(next);
    }
    for (double m : alive) lost += m;
    law.remainder = lost;
    return law;
}

// ---------------------------------------------------------------------------
// Tail-envelope fits: the smallest C with tail(n) <= C e^{-2 kappa n} over
// the computed range, on a grid of kappa.  The certificate is truncated at
// ell_max; tails include the remainder, so it is conservative on the range.

struct GwTailFit {
    std::vector<std::pair<double, double>> grid;  // (kappa, smallest C)
    double kappa = 0.0;
    double c = 0.0;
};

inline GwTailFit fit_gw_tail(const TotalPopulationLaw& law,
                             const std::vector<double>& kappa_grid, double c_cap = 100.0) {
    GwTailFit fit;
    for (double kappa : kappa_grid) {
        double c = 0.0;
        for (int n = 0; n + 1 < static_cast<int>(law.pmf.size()); ++n)
            c = std::max(c, law.tail(n) * std::exp(2.0 * kappa * n));
        fit.grid.emplace_back(kappa, c);
    }
    for (auto [kappa, c] : fit.grid)
        if (c <= c_cap && kappa > fit.kappa) {
            fit.kappa = kappa;
            fit.c = c;
        }
    if (fit.kappa == 0.0 && !fit.grid.empty()) {
        fit.kappa = fit.grid.front().first;
        fit.c = fit.grid.front().second;
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Cycle-length domination envelope: tail[l] = P(xi >= l) over positive
// integers, built as the pointwise maximum of the exact vertex-count cycle
// tails over a family of (domain, root) instances.

struct CycleLengthBound {
    std::vector<double> tail;  // index l >= 0; tail[0] = tail[1] = 1
    double mean = 1.0;         // E[xi] = sum_{l>=1} P(xi >= l)
    bool mean_below_two = true;

    OffspringLaw offspring_minus_one() const {
        OffspringLaw law;
        law.pmf.assign(tail.size(), 0.0);
        for (std::size_t l = 1; l < tail.size(); ++l) {
            double next = l + 1 < tail.size() ? tail[l + 1] : 0.0;
            law.pmf[l - 1] = tail[l] - next;  // P(xi = l) -> offspring l - 1
        }
        return law;
    }
    // Geometric extension beyond the enumerated range at the given rate.
    void extend_geometric(double rate, int up_to) {
        while (static_cast<int>(tail.size()) <= up_to) {
            tail.push_back(tail.back() * std::exp(-rate));
        }
    }
    void recompute_mean() {
        mean = 0.0;
        for (std::size_t l = 1; l < tail.size(); ++l) mean += tail[l];
        mean_below_two = mean < 2.0;
    }
};

// Exact tail of the vertex count |gamma_x| on one induced domain.
inline std::vector<double> exact_cycle_vertex_tail(const Graph& g, const VertexSet& domain,
                                                   int x, double alpha,
                                                   std::uint64_t cap = kDefaultEnumerationCap) {
    std::vector<double> weight(domain.count() + 1, 0.0);
    double z = 0.0;
    enumerate_closed_on(g, domain, cap, [&](const std::vector<int>& image, int h) {
        int len = 1, v = image[x];
        while (v != x) {
            ++len;
            v = image[v];
        }
        double w = std::exp(-alpha * h);
        weight[len] += w;
        z += w;
    });
    std::vector<double> tail(weight.size() + 1, 0.0);
    for (int l = static_cast<int>(weight.size()) - 1; l >= 0; --l)
        tail[l] = tail[l + 1] + weight[l] / z;
    tail[0] = 1.0;
    return tail;
}

// Envelope over every (domain, root) pair in the family.
inline CycleLengthBound fit_cycle_bound(const Graph& g, const std::vector<VertexSet>& family,
                                        double alpha,
                                        std::uint64_t cap = kDefaultEnumerationCap) {
    CycleLengthBound bound;
    bound.tail.assign(2, 1.0);
    for (const auto& domain : family) {
        if (domain.empty()) continue;
        std::vector<int> roots = domain.to_vector();
        for (int x : roots) {
            auto tail = exact_cycle_vertex_tail(g, domain, x, alpha, cap);
            if (tail.size() > bound.tail.size()) bound.tail.resize(tail.size(), 0.0);
            for (std::size_t l = 0; l < tail.size(); ++l)
                bound.tail[l] = std::max(bound.tail[l], tail[l]);
        }
    }
    // enforce monotonicity (max of monotone tails is monotone, but guard
    // against ragged lengths)
    for (std::size_t l = bound.tail.size(); l-- > 1;)
        bound.tail[l - 1] = std::max(bound.tail[l - 1], bound.tail[l]);
    bound.recompute_mean();
    return bound;
}

inline std::vector<VertexSet> all_subsets_family(const Graph& g) {
    int n = g.vertex_count();
    if (n > 16) throw CapacityError("all_subsets_family: too many subsets");
    std::vector<VertexSet> family;
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask)
        family.push_back(VertexSet::from_mask(n, mask));
    return family;
}

// ---------------------------------------------------------------------------
// Orbit-size domination:  P_V(|Or(A)| >= l) <= P(sum_{i<=|A|} xi_i >= l).

struct DominationReport {
    bool dominated = true;
    double max_violation = 0.0;  // worst LHS - RHS over the checked range
    json details;
};

inline std::vector<double> convolve_tail(const CycleLengthBound& bound, int copies,
                                         int support) {
    // pmf of one xi
    std::vector<double> one(bound.tail.size(), 0.0);
    for (std::size_t l = 1; l < bound.tail.size(); ++l) {
        double next = l + 1 < bound.tail.size() ? bound.tail[l + 1] : 0.0;
        one[l] = bound.tail[l] - next;
    }
    std::vector<double> sum{1.0};
    for (int c = 0; c < copies; ++c) {
        std::vector<double> next(std::min<std::size_t>(sum.size() + one.size(), support + 2),
                                 0.0);
        for (std::size_t i = 0; i < sum.size(); ++i)
            for (std::size_t j = 0; j < one.size() && i + j < next.size(); ++j)
                next[i + j] += sum[i] * one[j];
        sum.swap(next);
    }
    // tail[l] = P(S >= l) over 0..support+1; mass clipped beyond the array
    // sits at values above support+1, so it belongs to every tail index
    std::vector<double> tail(support + 2, 0.0);
    double clipped = 1.0;
    for (double p : sum) clipped -= p;
    double carry = std::max(clipped, 0.0);
    for (int l = static_cast<int>(tail.size()) - 1; l >= 0; --l) {
        if (l < static_cast<int>(sum.size())) carry += sum[l];
        tail[l] = carry;
    }
    return tail;
}

inline DominationReport check_orbit_domination(const Graph& g, const VertexSet& a, double alpha,
                                               const CycleLengthBound& bound,
                                               std::uint64_t cap = kDefaultEnumerationCap) {
    const int n = g.vertex_count();
    std::vector<double> weight(n + 1, 0.0);
    double z = 0.0;
    enumerate_closed(g, cap, [&](const std::vector<int>& image, int h) {
        GraphPermutation p(g, image);
        int size = orbit(p, a).count();
        double w = std::exp(-alpha * h);
        weight[size] += w;
        z += w;
    });
    std::vector<double> lhs_tail(n + 2, 0.0);
    for (int l = n; l >= 0; --l) lhs_tail[l] = lhs_tail[l + 1] + weight[l] / z;

    auto rhs_tail = convolve_tail(bound, a.count(), n + 1);
    DominationReport rep;
    for (int l = 0; l <= n + 1; ++l) {
        double violation = lhs_tail[std::min(l, n + 1)] - rhs_tail[l];
        if (violation > rep.max_violation) rep.max_violation = violation;
    }
    rep.dominated = rep.max_violation <= 1e-9;
    rep.details = json{{"A", a.to_vector()}, {"alpha", alpha}};
    return rep;
}

// ---------------------------------------------------------------------------
// Comparison harness: a sequence-valued process (rounds q_0, q_1, ...) is
// tested against the branching-process dominator.  Three parts:
//   (1) per-step certificates: the empirical conditional tail of q_{j} given
//       q_{j-1} = m must sit below the exact tail of sum_{i<=M m}(xi_i - 1),
//   (2) conclusion: the empirical tail of sum_j q_j sits below the exact tail
//       of W / M (population-total form),
//   (3) the revealed-set form: |hat A| <= (M+1) sum q_j, checked against
//       P(W >= M l / (M+1)).
// Estimated tails carry a one-sided binomial slack; certificate failures are
// reported as precondition violations, not domination failures.

struct ComparisonReport {
    bool step_certificates_ok = true;
    bool sum_dominated = true;
    bool hat_size_dominated = true;
    double worst_step_violation = 0.0;
    double worst_sum_violation = 0.0;
    double worst_hat_violation = 0.0;
    int transitions_checked = 0;
};

inline ComparisonReport comparison_lemma_harness(const std::vector<std::vector<int>>& round_seqs,
                                                 const std::vector<int>& hat_sizes, int m_factor,
                                                 const CycleLengthBound& xi, int ell_max) {
    ComparisonReport rep;
    const double n_samples = static_cast<double>(round_seqs.size());
    if (round_seqs.empty()) return rep;

    OffspringLaw step_law = xi.offspring_minus_one();

    // (1) per-step certificates, grouped by the previous round size
    std::map<int, std::vector<int>> transitions;  // m -> observed next sizes
    for (const auto& seq : round_seqs)
        for (std::size_t j = 1; j < seq.size(); ++j) transitions[seq[j - 1]].push_back(seq[j]);
    for (const auto& [m, nexts] : transitions) {
        if (m == 0) continue;
        // exact tail of sum_{i <= M m} (xi_i - 1) via a GW single generation:
        // that sum is the first generation of a GW with M m parents.
        GWProcess one_gen{step_law, m_factor * m};
        // distribution of one generation = m_factor*m fold convolution
        std::vector<double> gen{1.0};
        for (int c = 0; c < m_factor * m; ++c) {
            std::vector<double> next(std::min<std::size_t>(gen.size() + step_law.pmf.size(),
                                                           ell_max + 2),
                                     0.0);
            for (std::size_t i = 0; i < gen.size(); ++i)
                for (std::size_t j = 0; j < step_law.pmf.size() && i + j < next.size(); ++j)
                    next[i + j] += gen[i] * step_law.pmf[j];
            gen.swap(next);
        }
        auto exact_tail = [&](int l) {
            double t = 1.0;
            for (int w = 0; w < std::min<int>(l + 1, gen.size()); ++w) t -= gen[w];
            return std::max(t, 0.0);
        };
        double n_m = static_cast<double>(nexts.size());
        double slack = std::sqrt(std::log(20.0 * n_samples) / (2.0 * n_m));  // Hoeffding
        for (int l = 0; l <= ell_max; ++l) {
            double emp = 0.0;
            for (int q : nexts) emp += q > l ? 1.0 : 0.0;
            emp /= n_m;
            double viol = emp - exact_tail(l) - slack;
            if (viol > rep.worst_step_violation) rep.worst_step_violation = viol;
        }
        rep.transitions_checked += static_cast<int>(nexts.size());
        (void)one_gen;
    }
    rep.step_certificates_ok = rep.worst_step_violation <= 0.0;

    // (2) empirical tail of sum q_j vs exact tail of W / M
    int z0 = round_seqs.front().empty() ? 0 : round_seqs.front()[0];
    GWProcess gw{step_law.scaled(m_factor), m_factor * z0};
    auto w_law = total_population_tail(gw, m_factor * (ell_max + 1));
    double slack = std::sqrt(std::log(20.0) / (2.0 * n_samples));
    for (int l = 0; l <= ell_max; ++l) {
        double emp = 0.0;
        for (const auto& seq : round_seqs) {
            int s = 0;
            for (int q : seq) s += q;
            emp += s >= l ? 1.0 : 0.0;
        }
        emp /= n_samples;
        double viol = emp - w_law.tail(m_factor * l - 1) - slack;
        if (viol > rep.worst_sum_violation) rep.worst_sum_violation = viol;
    }
    rep.sum_dominated = rep.worst_sum_violation <= 0.0;

    // (3) revealed-set size: P(|hat A| >= l) <= P(W >= M l / (M+1))
    if (!hat_sizes.empty()) {
        double n_hat = static_cast<double>(hat_sizes.size());
        double hat_slack = std::sqrt(std::log(20.0) / (2.0 * n_hat));
        for (int l = 0; l <= ell_max; ++l) {
            double emp = 0.0;
            for (int h : hat_sizes) emp += h >= l ? 1.0 : 0.0;
            emp /= n_hat;
            int threshold = static_cast<int>(
                std::ceil(static_cast<double>(m_factor) * l / (m_factor + 1.0)));
            double viol = emp - w_law.tail(threshold - 1) - hat_slack;
            if (viol > rep.worst_hat_violation) rep.worst_hat_violation = viol;
        }
        rep.hat_size_dominated = rep.worst_hat_violation <= 0.0;
    }
    return rep;
}

}  // namespace srp
