// Named verification suites run by both the CLI and the acceptance tests.
// Every suite exhaustively checks one family of identities or inequalities on
// the small-graph matrix and returns per-check reports.
#pragma once

#include <string>
#include <vector>

#include "srp/analysis.hpp"
#include "srp/branching.hpp"
#include "srp/exact.hpp"
#include "srp/regen.hpp"
#include "srp/saw.hpp"
#include "srp/strategy.hpp"

namespace srp {

struct NamedGraph {
    std::string name;
    Graph graph;
};

// The standard small-graph matrix: paths, grids and cylinders up to 9
// vertices, all exactly enumerable.
inline std::vector<NamedGraph> test_matrix() {
    return {
        {"K2", complete_graph(2)},
        {"P3", path_graph(3)},
        {"P4", path_graph(4)},
        {"P5", path_graph(5)},
        {"grid2x2", grid_graph(2, 2)},
        {"grid2x3", grid_graph(2, 3)},
        {"grid2x4", grid_graph(2, 4)},
        {"grid3x3", grid_graph(3, 3)},
        {"cyl3x2", build_cylinder(2, 2).graph()},
        {"cyl4x2", CylinderLattice::build_rect(4, 2).graph()},
        {"cyl3x4", CylinderLattice::build_rect(3, 4).graph()},
    };
}

struct SuiteResult {
    std::string suite;
    std::vector<CheckReport> reports;
    bool pass = true;

    void add(CheckReport r) {
        pass = pass && r.pass;
        reports.push_back(std::move(r));
    }
    void add(const std::vector<CheckReport>& rs) {
        for (const auto& r : rs) add(r);
    }
};

// ---------------------------------------------------------------------------
// Suite: spatial Markov identities over every subset of every matrix graph
// with at most `max_vertices` vertices.

inline SuiteResult suite_markov(double alpha = 0.7, int max_vertices = 8, double tol = 1e-9) {
    SuiteResult suite{"markov", {}, true};
    for (const auto& [name, g] : test_matrix()) {
        int n = g.vertex_count();
        if (n > max_vertices) continue;
        for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
            auto reports = check_spatial_markov(g, alpha, VertexSet::from_mask(n, mask), tol);
            for (auto& r : reports) {
                r.params["graph"] = name;
                suite.add(r);
            }
        }
    }
    return suite;
}

// ---------------------------------------------------------------------------
// Suite: assembled-law exactness of the recursive sampling procedure, on all
// matrix graphs with at most 6 vertices and several strategies (including the
// symmetrization strategy).

inline SuiteResult suite_sampling_lemma(double alpha = 0.9, double tol = 1e-9) {
    SuiteResult suite{"sampling-lemma", {}, true};
    for (const auto& [name, g] : test_matrix()) {
        int n = g.vertex_count();
        if (n > 6) continue;
        std::vector<SamplingStrategy> strategies = {
            one_step_strategy(),
            first_vertex_strategy(),
            orbit_by_orbit_strategy(VertexSet::of(n, {0, n - 1})),
            phi_compatible_strategy(SymmetryGroup(n), VertexSet::of(n, {0})),
        };
        // a genuine mirror symmetry where the graph has one
        if (name == "grid2x2")
            strategies.push_back(phi_compatible_strategy(
                SymmetryGroup::generated(g, {{1, 0, 3, 2}}), VertexSet::of(n, {0})));
        for (const auto& strat : strategies) {
            double gap = assembled_law_gap(g, strat, alpha);
            CheckReport r{"sampling-lemma",
                          json{{"graph", name}, {"strategy", strat.name}, {"alpha", alpha}},
                          gap,
                          0.0,
                          tol - gap,
                          gap <= tol};
            suite.add(r);
        }
    }
    return suite;
}

// ---------------------------------------------------------------------------
// Suite: the partition-ratio upper bound along every self-avoiding path and
// cycle:  Z(U \ gamma) / Z(U) <= (1 + e^{-2 alpha})^{-||gamma||/2}.

inline SuiteResult suite_prop31(const std::vector<double>& alphas = {0.5, 1.0, 2.0},
                                int max_vertices = 8) {
    SuiteResult suite{"prop31", {}, true};
    for (const auto& [name, g] : test_matrix()) {
        int n = g.vertex_count();
        if (n > max_vertices) continue;
        VertexSet full = VertexSet::full(n);
        std::vector<double> zu;
        for (double alpha : alphas) zu.push_back(partition_closed(g, alpha).value());

        double worst = 1e300;
        std::uint64_t checked = 0;
        auto check_gamma = [&](const std::vector<int>& gamma, int edge_count) {
            VertexSet rest = full;
            for (int v : gamma) rest.remove(v);
            auto hist = closed_energy_histogram(g, rest);
            for (std::size_t i = 0; i < alphas.size(); ++i) {
                double ratio = PartitionFunction::from_histogram(hist, alphas[i]).value() /
                               zu[i];
                double bound =
                    std::pow(1.0 + std::exp(-2 * alphas[i]), -0.5 * edge_count);
                worst = std::min(worst, bound - ratio);
                ++checked;
            }
        };
        for (int root = 0; root < n; ++root) {
            enumerate_saws_from(g, root, n, kDefaultEnumerationCap,
                                [&](const std::vector<int>& path) {
                                    if (path.size() >= 2 && path.front() < path.back())
                                        check_gamma(path, static_cast<int>(path.size()) - 1);
                                });
            enumerate_rooted_cycles(g, root, n, kDefaultEnumerationCap,
                                    [&](const std::vector<int>& cyc) {
                                        bool min_rooted = true;
                                        for (int v : cyc) min_rooted &= cyc.front() <= v;
                                        if (min_rooted)
                                            check_gamma(cyc, static_cast<int>(cyc.size()));
                                    });
        }
        CheckReport r{"prop31",
                      json{{"graph", name}, {"checked", checked}},
                      worst,
                      0.0,
                      worst + 1e-12,
                      worst >= -1e-12};
        suite.add(r);
    }
    return suite;
}

// ---------------------------------------------------------------------------
// Suite: the one-point expansion.  For every root x the exact identity
//   Z(U) = Z(U\{x}) + sum_{n>=2} sum_{gamma in SAP_n(x)} e^{-alpha n} Z(U\gamma)
// and the bound
//   Z(U)/Z(U\{x}) <= 1 + (1+e^{-2a}) sum_n |SAP_n(x)| e^{-na} (1+e^{-2a})^{-n/2}.

inline SuiteResult suite_prop33(const std::vector<double>& alphas = {0.5, 1.0, 2.0},
                                int max_vertices = 8, double tol = 1e-9) {
    SuiteResult suite{"prop33", {}, true};
    for (const auto& [name, g] : test_matrix()) {
        int n = g.vertex_count();
        if (n > max_vertices) continue;
        VertexSet full = VertexSet::full(n);
        for (double alpha : alphas) {
            double worst_identity = 0.0, worst_margin = 1e300;
            for (int x = 0; x < n; ++x) {
                VertexSet minus_x = full;
                minus_x.remove(x);
                double z_u = partition_closed(g, alpha).value();
                double z_minus = partition_closed_on(g, minus_x, alpha).value();
                double expansion = z_minus;
                double bound_sum = 0.0;
                enumerate_rooted_cycles(g, x, n, kDefaultEnumerationCap,
                                        [&](const std::vector<int>& cyc) {
                                            int edges = static_cast<int>(cyc.size());
                                            VertexSet rest = full;
                                            for (int v : cyc) rest.remove(v);
                                            expansion +=
                                                std::exp(-alpha * edges) *
                                                partition_closed_on(g, rest, alpha).value();
                                            bound_sum += std::exp(-alpha * edges) *
                                                         std::pow(1 + std::exp(-2 * alpha),
                                                                  -0.5 * edges);
                                        });
                worst_identity =
                    std::max(worst_identity, std::abs(expansion - z_u) / z_u);
                double bound = 1.0 + (1.0 + std::exp(-2 * alpha)) * bound_sum;
                worst_margin = std::min(worst_margin, bound - z_u / z_minus);
            }
            CheckReport identity{"prop33-expansion-identity",
                                 json{{"graph", name}, {"alpha", alpha}},
                                 worst_identity,
                                 0.0,
                                 tol - worst_identity,
                                 worst_identity <= tol};
            CheckReport bound{"prop33-bound",
                              json{{"graph", name}, {"alpha", alpha}},
                              worst_margin,
                              0.0,
                              worst_margin + 1e-12,
                              worst_margin >= -1e-12};
            suite.add(identity);
            suite.add(bound);
        }
    }
    return suite;
}

// ---------------------------------------------------------------------------
// Suite: boundary-condition decay with fitted branching constants, plus the
// two-sided partition-ratio stability bounds.

inline SuiteResult suite_boundary(double alpha = 2.0, double log_mu = std::log(2.64)) {
    SuiteResult suite{"boundary", {}, true};
    auto census = saw_census(grid_graph(9, 9), 4 * 9 + 4, 10);
    struct Instance {
        std::string name;
        Graph g;
        VertexSet u, b, a;  // for the decay check: B in U in V; ratio check: A
    };
    std::vector<Instance> instances;
    {
        Graph p3 = path_graph(3);
        instances.push_back(
            {"P3", p3, VertexSet::of(3, {0, 1}), VertexSet::of(3, {0}), VertexSet::of(3, {0})});
        Graph g23 = grid_graph(2, 3);
        instances.push_back({"grid2x3", g23, VertexSet::of(6, {0, 1, 2, 3, 4}),
                             VertexSet::of(6, {0}), VertexSet::of(6, {2})});
        Graph c32 = build_cylinder(2, 2).graph();
        instances.push_back({"cyl3x2", c32, VertexSet::of(6, {0, 1, 2, 3}),
                             VertexSet::of(6, {0}), VertexSet::of(6, {0})});
    }
    for (const auto& inst : instances) {
        auto bound = fit_cycle_bound(inst.g, all_subsets_family(inst.g), alpha);
        if (!bound.mean_below_two) {
            CheckReport r{"boundary-precondition",
                          json{{"graph", inst.name}, {"alpha", alpha}},
                          bound.mean,
                          2.0,
                          2.0 - bound.mean,
                          false};
            suite.add(r);
            continue;
        }
        GWProcess gw{bound.offspring_minus_one(), 1};
        auto law = total_population_tail(gw, 60);
        auto fit = fit_gw_tail(law, {0.1, 0.25, 0.5, 0.75, 1.0, 1.5}, 20.0);
        for (auto& r : verify_boundary_decay(inst.g, inst.u, inst.b, alpha, fit.c, fit.kappa)) {
            r.params["graph"] = inst.name;
            suite.add(r);
        }
        auto bundle =
            constants_bundle(alpha, log_mu, std::nullopt, census, GwFit{fit.c, fit.kappa});
        VertexSet full = VertexSet::full(inst.g.vertex_count());
        for (auto& r :
             verify_partition_ratio_bounds(inst.g, full, inst.u, inst.a, alpha, bundle)) {
            r.params["graph"] = inst.name;
            suite.add(r);
        }
        for (auto& r : verify_c1_bound(inst.g, full, inst.a, alpha, bundle)) {
            r.params["graph"] = inst.name;
            suite.add(r);
        }
    }
    return suite;
}

// ---------------------------------------------------------------------------
// Suite: orbit-size domination by independent cycle-length copies, exact on
// both sides, for every seed subset of the smaller matrix graphs.

inline SuiteResult suite_orbit_domination(const std::vector<double>& alphas = {0.5, 1.0, 2.0},
                                          int max_vertices = 6) {
    SuiteResult suite{"orbit-dom", {}, true};
    for (const auto& [name, g] : test_matrix()) {
        int n = g.vertex_count();
        if (n > max_vertices) continue;
        auto family = all_subsets_family(g);
        for (double alpha : alphas) {
            auto bound = fit_cycle_bound(g, family, alpha);
            double worst = 0.0;
            for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask) {
                auto rep =
                    check_orbit_domination(g, VertexSet::from_mask(n, mask), alpha, bound);
                worst = std::max(worst, rep.max_violation);
            }
            CheckReport r{"orbit-domination",
                          json{{"graph", name}, {"alpha", alpha}},
                          worst,
                          0.0,
                          1e-9 - worst,
                          worst <= 1e-9};
            suite.add(r);
        }
    }
    return suite;
}

// ---------------------------------------------------------------------------
// Suite: the deterministic pre-regeneration count, exhaustively over every
// qualifying self-avoiding walk spanning L levels on the given cylinder.

inline SuiteResult suite_numbregpoint(int levels = 10, int period = 6, int span = 6,
                                      const std::vector<double>& deltas = {0.1, 0.2}) {
    SuiteResult suite{"numbregpoint", {}, true};
    auto lat = CylinderLattice::build_rect(levels, period);
    int width = regen_width(lat);
    double max_delta = *std::max_element(deltas.begin(), deltas.end());
    int edge_budget = static_cast<int>((1 + max_delta) * span);  // strict < (1+d)L
    std::uint64_t qualifying = 0, violations = 0;
    for (int root = 0; root < lat.vertex_count(); ++root) {
        enumerate_saws_from(lat.graph(), root, edge_budget, kDefaultEnumerationCap,
                            [&](const std::vector<int>& path) {
                                for (double delta : deltas) {
                                    auto rep = check_numbregpoint(lat, {path, false}, span,
                                                                  delta, width);
                                    if (!rep) continue;
                                    ++qualifying;
                                    if (!rep->pass) ++violations;
                                }
                            });
    }
    CheckReport r{"numbregpoint-exhaustive",
                  json{{"levels", levels},
                       {"period", period},
                       {"span", span},
                       {"qualifying", qualifying}},
                  static_cast<double>(violations),
                  0.0,
                  violations == 0 ? 1.0 : -static_cast<double>(violations),
                  violations == 0 && qualifying > 0};
    suite.add(r);
    return suite;
}

// ---------------------------------------------------------------------------
// Suite: regeneration-set maximality against the exhaustive subset scan, plus
// the four defining properties on every computed set.

inline SuiteResult suite_regen_maximality(int trials = 20, double alpha = 0.8) {
    SuiteResult suite{"regen-maximality", {}, true};
    auto lat = CylinderLattice::build_rect(5, 3);  // 15 vertices: subset scan feasible
    int width = 2;
    auto dist = exact_open_distribution(lat.graph(), VertexSet::full(lat.vertex_count()),
                                        0, lat.last_hyperplane(), alpha);
    RngStream rng(2024, 7);
    std::uint64_t points_checked = 0, mismatches = 0, property_failures = 0;
    for (int t = 0; t < trials; ++t) {
        const auto& config = dist.configs[dist.sample(rng)];
        auto walk = walk_of(config);
        for (int x : pre_regeneration_points(lat, walk, width)) {
            if (x == config.source || x == config.sink) continue;
            auto lib = regeneration_set(lat, config, x, width);
            VertexSet best(lat.vertex_count());
            bool any = false;
            for (std::uint64_t mask = 0; mask < (1ULL << 15); ++mask) {
                VertexSet r = VertexSet::from_mask(15, mask);
                if (!regen_r1(lat, r, x) || !regen_r2(lat, r, x, width) ||
                    !regen_r3(lat, r, x) || !regen_r4(config, r))
                    continue;
                any = true;
                best |= r;
            }
            ++points_checked;
            if (lib.has_value() != any || (any && *lib != best)) ++mismatches;
            if (lib) {
                bool props = regen_r1(lat, *lib, x) && regen_r2(lat, *lib, x, width) &&
                             regen_r3(lat, *lib, x) && regen_r4(config, *lib);
                if (!props) ++property_failures;
            }
        }
    }
    CheckReport r{"regen-maximality",
                  json{{"points", points_checked}, {"alpha", alpha}},
                  static_cast<double>(mismatches + property_failures),
                  0.0,
                  mismatches + property_failures == 0 ? 1.0 : -1.0,
                  mismatches == 0 && property_failures == 0 && points_checked > 0};
    suite.add(r);
    return suite;
}

// ---------------------------------------------------------------------------
// Registry.

inline std::vector<std::string> suite_names() {
    return {"markov",       "sampling-lemma", "prop31",       "prop33",
            "boundary",     "orbit-dom",      "numbregpoint", "regen-maximality"};
}

inline SuiteResult run_suite(const std::string& name) {
    if (name == "markov") return suite_markov();
    if (name == "sampling-lemma") return suite_sampling_lemma();
    if (name == "prop31") return suite_prop31();
    if (name == "prop33") return suite_prop33();
    if (name == "boundary") return suite_boundary();
    if (name == "orbit-dom") return suite_orbit_domination();
    if (name == "numbregpoint") return suite_numbregpoint();
    if (name == "regen-maximality") return suite_regen_maximality();
    throw std::invalid_argument("unknown suite: " + name);
}

}  // namespace srp
