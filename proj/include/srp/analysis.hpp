// Exact verification harnesses: the spatial and strong Markov properties,
// minimal invariant closures, the threshold alpha_0 and the derived constants
// (c0, c1, C0, C_delta), and the partition-ratio / boundary-condition decay
// bounds.  Everything here is evaluated by exhaustive enumeration and checked
// against closed-form expressions; the harness certifies the transcription of
// each formula at desk scale, it does not prove the theorems.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "srp/exact.hpp"
#include "srp/graph.hpp"
#include "srp/permutation.hpp"
#include "srp/saw.hpp"

namespace srp {

class InfeasibleParameters : public std::invalid_argument {
  public:
    explicit InfeasibleParameters(const std::string& what) : std::invalid_argument(what) {}
};

struct CheckReport {
    std::string check;
    json params;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // how far inside the allowed region; negative = fail
    bool pass = false;

    json to_json() const {
        return json{{"check", check}, {"params", params}, {"lhs", lhs},
                    {"rhs", rhs},     {"margin", margin}, {"pass", pass}};
    }
};

// ---------------------------------------------------------------------------
// alpha_0: unique solution of  alpha + (1/2) log(1 + exp(-2 alpha)) = log mu.
// The left side is strictly increasing with range (0, inf), so bisection over
// a wide bracket converges to full double precision.

inline double alpha0_lhs(double alpha) { return alpha + 0.5 * std::log1p(std::exp(-2 * alpha)); }

inline double solve_alpha0(double log_mu) {
    if (!(log_mu > 0)) throw std::domain_error("solve_alpha0: log_mu must be positive");
    double lo = -80.0, hi = std::max(log_mu + 1.0, 2.0);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (alpha0_lhs(mid) < log_mu)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// The constants bundle.
//
//   c0   = alpha + (1/2) log(1+e^{-2 alpha}) - log(mu + delta)      (> 0)
//   Cδ   = max_n |SAP_n| / (mu + delta)^n over the census range
//   C0   = Cδ / (1 - e^{-c0})
//   c1   = ( 1 + (1+e^{-2 alpha}) Cδ e^{-2 c0} / (1 - e^{-c0}) )^{-1}
//
// The default delta splits the slack so that c0 = (alpha - alpha_0)/2.
// C_delta is census-truncated: it certifies |SAP_n| <= Cδ (mu+delta)^n only
// for n within the census, which covers every cycle that fits in the test
// instances fed to the harnesses.

struct GwFit {
    double c = 0.0;
    double kappa = 0.0;  // half-rate: the population tail obeys P(W>n) <= C e^{-2 kappa n}
};

struct ConstantsBundle {
    double alpha = 0.0;
    double log_mu = 0.0;
    double alpha0 = 0.0;
    double delta = 0.0;
    double c_delta = 1.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double big_c0 = 0.0;  // prefactor C_0(alpha) of the cycle-tail bound
    double c_gw = 0.0;
    double kappa = 0.0;

    json to_json() const {
        return json{{"alpha", alpha}, {"log_mu", log_mu},   {"alpha0", alpha0},
                    {"delta", delta}, {"c_delta", c_delta}, {"c0", c0},
                    {"c1", c1},       {"C0", big_c0},       {"C_gw", c_gw},
                    {"kappa", kappa}};
    }
};

inline ConstantsBundle constants_bundle(double alpha, double log_mu,
                                        std::optional<double> delta_override,
                                        const SawCensus& census,
                                        std::optional<GwFit> gw = std::nullopt) {
    ConstantsBundle b;
    b.alpha = alpha;
    b.log_mu = log_mu;
    b.alpha0 = solve_alpha0(log_mu);
    if (!(alpha > b.alpha0))
        throw InfeasibleParameters("constants_bundle: alpha <= alpha0, no positive c0 exists");
    double mu = std::exp(log_mu);
    b.delta = delta_override ? *delta_override
                             : std::exp(alpha0_lhs(alpha) - 0.5 * (alpha - b.alpha0)) - mu;
    b.c0 = alpha0_lhs(alpha) - std::log(mu + b.delta);
    if (!(b.c0 > 0))
        throw InfeasibleParameters("constants_bundle: delta too large, c0 <= 0");
    b.c_delta = 1.0;  // n = 0 term: |SAP_0| = 1
    for (int n = 1; n <= census.n_max(); ++n)
        b.c_delta = std::max(b.c_delta, static_cast<double>(census.sap[n]) /
                                            std::pow(mu + b.delta, n));
    double e2 = std::exp(-2 * alpha);
    b.big_c0 = b.c_delta / (1.0 - std::exp(-b.c0));
    b.c1 = 1.0 / (1.0 + (1.0 + e2) * b.c_delta * std::exp(-2 * b.c0) /
                            (1.0 - std::exp(-b.c0)));
    if (gw) {
        b.c_gw = gw->c;
        b.kappa = gw->kappa;
    }
    return b;
}

// ---------------------------------------------------------------------------
// Local functionals.  Each functional evaluates on a raw image array (either
// a full configuration or a sub-configuration extended by the identity) and
// records its support and sup-norm.

struct Functional {
    std::string name;
    VertexSet support;
    double sup_norm = 1.0;
    std::function<double(const std::vector<int>&)> eval;
};

inline int cycle_edge_count(const std::vector<int>& image, int x) {
    if (image[x] == x) return 0;
    int len = 0, v = x;
    do {
        ++len;
        v = image[v];
    } while (v != x);
    return len;
}

// The versioned library used by every Markov-property harness:
//   1{pi(x)=x},  1{pi(x)=y} and 1{pi^{-1}(x)=y} for neighbours y,
//   1{||gamma_x|| = k} for k in {0, 2, 3}.
// Cycle events are local to a set S only on the event that S is invariant,
// which is the only place the harnesses evaluate them.
inline std::vector<Functional> local_functionals(const Graph& g, const VertexSet& s) {
    std::vector<Functional> lib;
    s.for_each([&](int x) {
        lib.push_back({"fix(" + std::to_string(x) + ")", s, 1.0,
                       [x](const std::vector<int>& im) { return im[x] == x ? 1.0 : 0.0; }});
        for (int y : g.neighbors(x)) {
            lib.push_back({"map(" + std::to_string(x) + "->" + std::to_string(y) + ")", s, 1.0,
                           [x, y](const std::vector<int>& im) { return im[x] == y ? 1.0 : 0.0; }});
            lib.push_back({"premap(" + std::to_string(x) + "<-" + std::to_string(y) + ")", s,
                           1.0,
                           [x, y](const std::vector<int>& im) { return im[y] == x ? 1.0 : 0.0; }});
        }
        for (int k : {0, 2, 3})
            lib.push_back({"cyclen(" + std::to_string(x) + ")=" + std::to_string(k), s, 1.0,
                           [x, k](const std::vector<int>& im) {
                               return cycle_edge_count(im, x) == k ? 1.0 : 0.0;
                           }});
    });
    return lib;
}

// ---------------------------------------------------------------------------
// Enumerated ensemble with Boltzmann weights, shared by the exact harnesses.

struct Ensemble {
    std::vector<std::vector<int>> configs;
    std::vector<double> weights;  // e^{-alpha H}
    double z = 0.0;

    static Ensemble closed(const Graph& g, double alpha,
                           std::uint64_t cap = kDefaultEnumerationCap) {
        Ensemble e;
        enumerate_closed(g, cap, [&](const std::vector<int>& image, int h) {
            e.configs.push_back(image);
            e.weights.push_back(std::exp(-alpha * h));
            e.z += e.weights.back();
        });
        return e;
    }

    template <class F>
    double expect(F&& f) const {
        double num = 0.0;
        for (std::size_t i = 0; i < configs.size(); ++i) num += weights[i] * f(configs[i]);
        return num / z;
    }
};

// E_A(f(. oplus id)) over the subgraph induced by `domain`.
inline double subgraph_expectation(const Graph& g, const VertexSet& domain, double alpha,
                                   const Functional& f,
                                   std::uint64_t cap = kDefaultEnumerationCap) {
    double num = 0.0, z = 0.0;
    enumerate_closed_on(g, domain, cap, [&](const std::vector<int>& image, int h) {
        double w = std::exp(-alpha * h);
        num += w * f.eval(image);
        z += w;
    });
    return num / z;
}

inline bool set_invariant(const std::vector<int>& image, const VertexSet& a) {
    bool inv = true;
    a.for_each([&](int v) {
        if (!a.contains(image[v])) inv = false;
    });
    return inv;
}

// ---------------------------------------------------------------------------
// Spatial Markov property: the four identities, checked exactly.

inline std::vector<CheckReport> check_spatial_markov(const Graph& g, double alpha,
                                                     const VertexSet& a, double tol = 1e-9) {
    const Ensemble ens = Ensemble::closed(g, alpha);
    VertexSet ac = a.complement();
    std::vector<CheckReport> reports;
    json params{{"A", a.to_vector()}, {"alpha", alpha}};

    double p_inv = ens.expect([&](const std::vector<int>& im) {
        return set_invariant(im, a) ? 1.0 : 0.0;
    });

    // (i)  P_V(A invariant) = Z(A) Z(A^c) / Z(V)
    {
        double za = partition_closed_on(g, a, alpha).value();
        double zc = partition_closed_on(g, ac, alpha).value();
        double zv = partition_closed(g, alpha).value();
        CheckReport r{"spatial-markov-i", params, p_inv, za * zc / zv, 0, false};
        r.margin = tol - std::abs(r.lhs - r.rhs);
        r.pass = r.margin >= 0;
        reports.push_back(r);
    }

    auto lib_a = local_functionals(g, a);
    auto lib_c = local_functionals(g, ac);

    // (ii)  E_V(f | A invariant) = E_A(f(. oplus id))
    if (p_inv > 0 && !a.empty()) {
        double worst = 0.0;
        for (const auto& f : lib_a) {
            double lhs = ens.expect([&](const std::vector<int>& im) {
                             return set_invariant(im, a) ? f.eval(im) : 0.0;
                         }) /
                         p_inv;
            double rhs = subgraph_expectation(g, a, alpha, f);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        CheckReport r{"spatial-markov-ii", params, worst, 0.0, tol - worst, worst <= tol};
        reports.push_back(r);
    }

    // (iii)  E_V(f g | A inv) = E_A(f oplus) E_{A^c}(g oplus)
    if (p_inv > 0) {
        double worst = 0.0;
        std::vector<double> rhs_a, rhs_c;
        for (const auto& f : lib_a) rhs_a.push_back(subgraph_expectation(g, a, alpha, f));
        for (const auto& h : lib_c) rhs_c.push_back(subgraph_expectation(g, ac, alpha, h));
        // precompute per-config functional values on the invariant event
        std::vector<std::vector<double>> fa(lib_a.size()), fc(lib_c.size());
        std::vector<double> inv_w;
        for (std::size_t i = 0; i < ens.configs.size(); ++i) {
            if (!set_invariant(ens.configs[i], a)) continue;
            inv_w.push_back(ens.weights[i]);
            for (std::size_t j = 0; j < lib_a.size(); ++j)
                fa[j].push_back(lib_a[j].eval(ens.configs[i]));
            for (std::size_t j = 0; j < lib_c.size(); ++j)
                fc[j].push_back(lib_c[j].eval(ens.configs[i]));
        }
        double wsum = 0.0;
        for (double w : inv_w) wsum += w;
        for (std::size_t jf = 0; jf < lib_a.size(); ++jf)
            for (std::size_t jg = 0; jg < lib_c.size(); ++jg) {
                double lhs = 0.0;
                for (std::size_t i = 0; i < inv_w.size(); ++i)
                    lhs += inv_w[i] * fa[jf][i] * fc[jg][i];
                lhs /= wsum;
                worst = std::max(worst, std::abs(lhs - rhs_a[jf] * rhs_c[jg]));
            }
        CheckReport r{"spatial-markov-iii", params, worst, 0.0, tol - worst, worst <= tol};
        reports.push_back(r);
    }

    // (iv)  E_V(f | A inv, B) = E_A(f oplus) for events B over A^c
    if (p_inv > 0 && !a.empty()) {
        double worst = 0.0;
        std::vector<Functional> events;
        int picked = 0;
        ac.for_each([&](int u) {
            if (picked++ < 3)
                events.push_back({"ev-fix(" + std::to_string(u) + ")", ac, 1.0,
                                  [u](const std::vector<int>& im) {
                                      return im[u] == u ? 1.0 : 0.0;
                                  }});
        });
        for (const auto& f : lib_a) {
            double rhs = subgraph_expectation(g, a, alpha, f);
            for (const auto& ev : events) {
                double mass = ens.expect([&](const std::vector<int>& im) {
                    return set_invariant(im, a) ? ev.eval(im) : 0.0;
                });
                if (mass <= 0) continue;
                double lhs = ens.expect([&](const std::vector<int>& im) {
                                 return set_invariant(im, a) ? f.eval(im) * ev.eval(im) : 0.0;
                             }) /
                             mass;
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
        CheckReport r{"spatial-markov-iv", params, worst, 0.0, tol - worst, worst <= tol};
        reports.push_back(r);
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Minimal Phi-compatible invariant closure: least fixed point of
// S -> S u pi(S) u pi^{-1}(S) u phi(S).

inline VertexSet minimal_invariant_closure(const GraphPermutation& p, const SymmetryGroup& phi,
                                           const VertexSet& a) {
    VertexSet s = a;
    bool grew = true;
    while (grew) {
        grew = false;
        VertexSet add(s.universe_size());
        s.for_each([&](int v) {
            if (!s.contains(p(v))) add.add(p(v));
            if (!s.contains(p.inverse(v))) add.add(p.inverse(v));
        });
        for (const auto& ph : phi.elements())
            s.for_each([&](int v) {
                if (!s.contains(ph[v])) add.add(ph[v]);
            });
        if (!add.empty()) {
            s |= add;
            grew = true;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Strong Markov property for admissible random invariant sets.

using InvariantSetBuilder = std::function<VertexSet(const GraphPermutation&)>;

class AdmissibilityError : public std::logic_error {
  public:
    explicit AdmissibilityError(const std::string& what) : std::logic_error(what) {}
};

// Verifies admissibility exhaustively, then the identity
//   E_V(f 1{Q=A}) = E_{A^c}(f oplus id) P_V(Q=A)
// for every value A of Q with A disjoint from B, f in the library over B.
inline std::vector<CheckReport> check_strong_markov(const Graph& g, double alpha,
                                                    const InvariantSetBuilder& q_builder,
                                                    const std::string& q_name,
                                                    const VertexSet& b, double tol = 1e-9) {
    const Ensemble ens = Ensemble::closed(g, alpha);
    const int n = g.vertex_count();

    std::vector<VertexSet> q_of(ens.configs.size(), VertexSet(n));
    for (std::size_t i = 0; i < ens.configs.size(); ++i) {
        GraphPermutation p(g, ens.configs[i]);
        q_of[i] = q_builder(p);
        if (orbit(p, q_of[i]) != q_of[i])
            throw AdmissibilityError("Q(" + q_name + ") is not pi-invariant");
    }

    // {Q = A} must be determined by the restriction of (pi, pi^{-1}) to A.
    std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < ens.configs.size(); ++i) {
        const VertexSet& qa = q_of[i];
        GraphPermutation p(g, ens.configs[i]);
        std::vector<std::uint64_t> sig{qa.low_mask()};
        qa.for_each([&](int v) {
            sig.push_back(static_cast<std::uint64_t>(p(v)));
            sig.push_back(static_cast<std::uint64_t>(p.inverse(v)) << 32);
        });
        buckets[sig].push_back(i);
    }
    // configs sharing the F_A signature with a config where Q = A must also
    // have Q = A; scan every config against every realized Q-value
    std::map<std::uint64_t, VertexSet> q_values;
    for (const auto& q : q_of) q_values.emplace(q.low_mask(), q);
    for (const auto& [mask, qa] : q_values) {
        std::map<std::vector<std::uint64_t>, bool> seen;
        for (std::size_t i = 0; i < ens.configs.size(); ++i) {
            GraphPermutation p(g, ens.configs[i]);
            std::vector<std::uint64_t> sig;
            qa.for_each([&](int v) {
                sig.push_back(static_cast<std::uint64_t>(p(v)));
                sig.push_back(static_cast<std::uint64_t>(p.inverse(v)) << 32);
            });
            bool indicator = q_of[i] == qa;
            auto [it, inserted] = seen.emplace(sig, indicator);
            if (!inserted && it->second != indicator)
                throw AdmissibilityError("{Q=A} for " + q_name +
                                         " is not measurable on A: same restriction, "
                                         "different indicator");
        }
    }

    auto lib = local_functionals(g, b);
    double worst = 0.0;
    int identities = 0;
    for (const auto& [mask, qa] : q_values) {
        if (qa.intersects(b)) continue;
        double p_q = 0.0;
        for (std::size_t i = 0; i < ens.configs.size(); ++i)
            if (q_of[i] == qa) p_q += ens.weights[i];
        p_q /= ens.z;
        if (p_q <= 0) continue;
        for (const auto& f : lib) {
            double lhs = 0.0;
            for (std::size_t i = 0; i < ens.configs.size(); ++i)
                if (q_of[i] == qa) lhs += ens.weights[i] * f.eval(ens.configs[i]);
            lhs /= ens.z;
            double rhs = subgraph_expectation(g, qa.complement(), alpha, f) * p_q;
            worst = std::max(worst, std::abs(lhs - rhs));
            ++identities;
        }
    }
    CheckReport r{"strong-markov(" + q_name + ")",
                  json{{"B", b.to_vector()}, {"alpha", alpha}, {"identities", identities}},
                  worst,
                  0.0,
                  tol - worst,
                  worst <= tol};
    return {r};
}

// ---------------------------------------------------------------------------
// Boundary-condition decay (the explicit-constant form):
//   |E_V(f) - E_U(f)| <= 2 C ||f||_inf sum_{x in V \ U} e^{-kappa d(x, B)}
// with (C, kappa) certified for the Galton-Watson population tail.

inline std::vector<CheckReport> verify_boundary_decay(const Graph& g, const VertexSet& u,
                                                      const VertexSet& b, double alpha,
                                                      double c_gw, double kappa,
                                                      double tol = 1e-9) {
    if (!b.subset_of(u))
        throw std::invalid_argument("verify_boundary_decay: B must be contained in U");
    const Ensemble ens = Ensemble::closed(g, alpha);
    auto lib = local_functionals(g, b);
    auto dist = bfs_distances(g, b);

    double envelope = 0.0;
    u.complement().for_each([&](int x) {
        if (dist[x] != kUnreachable) envelope += std::exp(-kappa * dist[x]);
    });

    std::vector<CheckReport> out;
    double worst_gap = -1e300;
    for (const auto& f : lib) {
        double ev = ens.expect([&](const std::vector<int>& im) { return f.eval(im); });
        double eu = subgraph_expectation(g, u, alpha, f);
        double lhs = std::abs(ev - eu);
        double rhs = 2.0 * c_gw * f.sup_norm * envelope;
        worst_gap = std::max(worst_gap, lhs - rhs);
    }
    CheckReport r{"boundary-decay",
                  json{{"U", u.to_vector()},
                       {"B", b.to_vector()},
                       {"alpha", alpha},
                       {"C", c_gw},
                       {"kappa", kappa}},
                  worst_gap,
                  0.0,
                  tol - worst_gap,
                  worst_gap <= tol};
    out.push_back(r);
    return out;
}

// ---------------------------------------------------------------------------
// Two-sided partition-ratio stability across volumes and its weaker corollary:
//   (1/D) Z(V1\A)/Z(V1) <= Z(V0\A)/Z(V0) <= D Z(V1\A)/Z(V1),
//   D = exp( (2C/c1) sum_{x in A} sum_{y in V0\V1} e^{-kappa d(x,y)} ),
// corollary form with |A||B| e^{-kappa d(A,B)} in the exponent, B = V0\V1.

inline std::vector<CheckReport> verify_partition_ratio_bounds(const Graph& g,
                                                              const VertexSet& v0,
                                                              const VertexSet& v1,
                                                              const VertexSet& a, double alpha,
                                                              const ConstantsBundle& bundle,
                                                              double tol = 1e-9) {
    if (!v1.subset_of(v0) || !a.subset_of(v1))
        throw std::invalid_argument("verify_partition_ratio_bounds: need A ⊆ V1 ⊆ V0");
    double r0 = partition_closed_on(g, v0 - a, alpha).value() /
                partition_closed_on(g, v0, alpha).value();
    double r1 = partition_closed_on(g, v1 - a, alpha).value() /
                partition_closed_on(g, v1, alpha).value();
    VertexSet b = v0 - v1;

    double pair_sum = 0.0;
    a.for_each([&](int x) {
        auto dist = bfs_distances(g, VertexSet::of(g.vertex_count(), {x}));
        b.for_each([&](int y) {
            if (dist[y] != kUnreachable) pair_sum += std::exp(-bundle.kappa * dist[y]);
        });
    });
    double d_exact = std::exp(2.0 * bundle.c_gw / bundle.c1 * pair_sum);

    double d_cor = 1.0;
    if (!a.empty() && !b.empty()) {
        int dab = graph_distance(g, a, b);
        if (dab != kUnreachable)
            d_cor = std::exp(2.0 * bundle.c_gw / bundle.c1 * a.count() * b.count() *
                             std::exp(-bundle.kappa * dab));
    }

    std::vector<CheckReport> out;
    json params{{"V0", v0.count()}, {"V1", v1.count()}, {"A", a.to_vector()},
                {"alpha", alpha}};
    auto push = [&](const std::string& name, double d) {
        double lo = r1 / d, hi = r1 * d;
        double margin = std::min(r0 - lo, hi - r0);
        CheckReport r{name, params, r0, d, margin + tol, margin >= -tol};
        r.params["ratio_inner"] = r1;
        out.push_back(r);
    };
    push("partition-ratio-D", d_exact);
    push("partition-ratio-corollary", d_cor);
    return out;
}

// ---------------------------------------------------------------------------
// Uniform lower bound on vacancy ratios:  Z(U\A)/Z(U) >= c1^{|A|}, verified
// together with the telescoping identity it is derived from.

inline std::vector<CheckReport> verify_c1_bound(const Graph& g, const VertexSet& u,
                                                const VertexSet& a, double alpha,
                                                const ConstantsBundle& bundle,
                                                double tol = 1e-9) {
    if (!a.subset_of(u)) throw std::invalid_argument("verify_c1_bound: need A ⊆ U");
    double ratio = partition_closed_on(g, u - a, alpha).value() /
                   partition_closed_on(g, u, alpha).value();
    double bound = std::pow(bundle.c1, a.count());

    // telescoping product over the one-point removals
    double telescoped = 1.0;
    VertexSet rest = a;
    VertexSet shrinking = u;
    a.for_each([&](int x) {
        VertexSet next = shrinking;
        next.remove(x);
        telescoped *= partition_closed_on(g, next, alpha).value() /
                      partition_closed_on(g, shrinking, alpha).value();
        shrinking = next;
    });

    std::vector<CheckReport> out;
    json params{{"U", u.count()}, {"A", a.to_vector()}, {"alpha", alpha}, {"c1", bundle.c1}};
    CheckReport ineq{"c1-lower-bound", params, ratio, bound, ratio - bound + tol,
                     ratio >= bound - tol};
    CheckReport tele{"c1-telescoping", params, ratio, telescoped,
                     tol - std::abs(ratio - telescoped),
                     std::abs(ratio - telescoped) <= tol};
    out.push_back(ineq);
    out.push_back(tele);
    return out;
}

}  // namespace srp
