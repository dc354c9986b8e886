#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "srp/analysis.hpp"
#include "srp/branching.hpp"

using namespace srp;

TEST_CASE("alpha0 solver") {
    double a = solve_alpha0(1.0);
    CHECK(std::abs(alpha0_lhs(a) - 1.0) < 1e-12);
    CHECK(a == doctest::Approx(0.9273).epsilon(1e-3));

    // lhs(0) = log(2)/2, so alpha0 = 0 exactly there
    CHECK(std::abs(solve_alpha0(0.5 * std::log(2.0))) < 1e-12);

    double big = solve_alpha0(50.0);
    CHECK(big > 49.99);
    CHECK(big <= 50.0 + 1e-12);
    CHECK(std::abs(alpha0_lhs(big) - 50.0) < 1e-12);

    CHECK_THROWS_AS(solve_alpha0(0.0), std::domain_error);
    CHECK_THROWS_AS(solve_alpha0(-1.0), std::domain_error);

    double prev = 0.0;
    for (int i = 1; i <= 20; ++i) {
        double lm = 0.4 + 0.45 * i;
        double a0 = solve_alpha0(lm);
        CHECK(a0 > prev);
        CHECK(a0 < lm);
        prev = a0;
    }
}

TEST_CASE("constants bundle formulas") {
    Graph patch = grid_graph(9, 9);
    auto census = saw_census(patch, 4 * 9 + 4, 8);

    // explicit delta = 1 at alpha = 3, log_mu = 1
    auto b = constants_bundle(3.0, 1.0, 1.0, census);
    double expect_c0 = 3.0 + 0.5 * std::log1p(std::exp(-6.0)) - std::log(std::exp(1.0) + 1.0);
    CHECK(b.c0 == doctest::Approx(expect_c0).epsilon(1e-12));
    CHECK(b.c0 > 0);
    CHECK(b.c1 > 0);
    CHECK(b.c1 < 1);

    // default delta policy splits the slack: c0 = (alpha - alpha0) / 2
    auto bd = constants_bundle(2.0, 1.0, std::nullopt, census);
    CHECK(bd.c0 == doctest::Approx((2.0 - bd.alpha0) / 2).epsilon(1e-9));

    // c0 / alpha climbs toward 1, c1 climbs toward 1
    double prev_ratio = 0.0, prev_c1 = 0.0;
    for (double alpha : {2.0, 4.0, 8.0, 16.0}) {
        auto bb = constants_bundle(alpha, 1.0, 1.0, census);
        CHECK(bb.c0 / alpha > prev_ratio);
        CHECK(bb.c1 > prev_c1);
        prev_ratio = bb.c0 / alpha;
        prev_c1 = bb.c1;
    }
    CHECK(prev_ratio > 0.85);
    CHECK(prev_c1 > 0.99);

    // a census with no polygons leaves C_delta at its floor
    SawCensus flat;
    flat.saw.assign(5, 0);
    flat.sap.assign(5, 0);
    flat.saw[0] = flat.sap[0] = 1;
    auto bf = constants_bundle(2.0, 1.0, 1.0, flat);
    CHECK(bf.c_delta == doctest::Approx(1.0));

    CHECK_THROWS_AS(constants_bundle(0.5, 1.0, std::nullopt, census), InfeasibleParameters);
    CHECK_THROWS_AS(constants_bundle(2.0, 1.0, 100.0, census), InfeasibleParameters);
}

TEST_CASE("spatial Markov identities: edge cases") {
    Graph g = grid_graph(2, 2);
    // A empty and A = V: item (i) reduces to the Z(empty) = 1 convention
    for (auto mask : {0x0ULL, 0xFULL}) {
        auto reports = check_spatial_markov(g, 0.8, VertexSet::from_mask(4, mask));
        for (const auto& r : reports) CHECK(r.pass);
    }

    // isolated vertex is invariant with probability one
    Graph k2_plus(3);
    k2_plus.add_edge(0, 1);
    auto reports = check_spatial_markov(k2_plus, 1.1, VertexSet::of(3, {2}));
    REQUIRE(!reports.empty());
    CHECK(reports[0].lhs == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : reports) CHECK(r.pass);
}

TEST_CASE("spatial Markov identities: every subset of small graphs") {
    for (const Graph& g : {grid_graph(2, 2), path_graph(4), build_cylinder(2, 2).graph()}) {
        int n = g.vertex_count();
        for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
            auto reports = check_spatial_markov(g, 0.7, VertexSet::from_mask(n, mask));
            for (const auto& r : reports) {
                CAPTURE(r.check);
                CAPTURE(mask);
                CHECK(r.pass);
            }
        }
    }
}

TEST_CASE("minimal invariant closure") {
    Graph g = grid_graph(2, 2);
    SymmetryGroup trivial(4);
    GraphPermutation id(g);
    VertexSet a = VertexSet::of(4, {1});
    CHECK(minimal_invariant_closure(id, trivial, a) == a);

    GraphPermutation four_cycle(g, {1, 3, 0, 2});
    CHECK(minimal_invariant_closure(four_cycle, trivial, a) == VertexSet::full(4));

    // doubled graph with copy swap: closure is the union of mirrored orbits
    auto [dbl, phi] = doubled_graph(path_graph(3));
    RngStream rng(3, 0);
    auto dist = exact_closed_distribution(dbl, 0.5);
    for (int trial = 0; trial < 60; ++trial) {
        GraphPermutation p(dbl, dist.configs[dist.sample(rng)]);
        VertexSet seed = VertexSet::from_mask(6, 1 + (rng.next_u64() % 63));
        auto closure = minimal_invariant_closure(p, phi, seed);
        CHECK(closure == oracle::brute_force_minimal_closure(p, phi, seed));
        CHECK(minimal_invariant_closure(p, phi, closure) == closure);  // idempotent
        CHECK(phi.stabilizes(closure));
        CHECK(orbit(p, closure) == closure);
        // monotone in the seed
        VertexSet bigger = seed;
        bigger.add(static_cast<int>(rng.uniform_below(6)));
        CHECK(closure.subset_of(minimal_invariant_closure(p, phi, bigger)));
    }
}

TEST_CASE("strong Markov property for admissible builders") {
    Graph g = grid_graph(2, 2);
    double alpha = 0.9;
    VertexSet b = VertexSet::of(4, {3});

    InvariantSetBuilder orbit_of_0 = [](const GraphPermutation& p) {
        return orbit(p, VertexSet::of(p.size(), {0}));
    };
    for (const auto& r : check_strong_markov(g, alpha, orbit_of_0, "orbit(0)", b))
        CHECK(r.pass);

    InvariantSetBuilder whole = [](const GraphPermutation& p) {
        return VertexSet::full(p.size());
    };
    for (const auto& r : check_strong_markov(g, alpha, whole, "constant-V", b)) {
        CHECK(r.pass);
        CHECK(r.params.at("identities").get<int>() == 0);  // V always meets B
    }

    SymmetryGroup trivial(4);
    InvariantSetBuilder closure = [&](const GraphPermutation& p) {
        return minimal_invariant_closure(p, trivial, VertexSet::of(4, {0, 1}));
    };
    for (const auto& r : check_strong_markov(g, alpha, closure, "closure(0,1)", b))
        CHECK(r.pass);
}

TEST_CASE("non-admissible builders are rejected") {
    Graph g = grid_graph(2, 2);
    // peeks at pi(3), which is outside the produced set when pi fixes 0
    InvariantSetBuilder peeking = [](const GraphPermutation& p) {
        if (p(3) == 3) return orbit(p, VertexSet::of(4, {0}));
        return orbit(p, VertexSet::of(4, {0, 1}));
    };
    CHECK_THROWS_AS(check_strong_markov(g, 0.9, peeking, "peeking", VertexSet::of(4, {3})),
                    AdmissibilityError);

    // not even invariant
    InvariantSetBuilder not_invariant = [](const GraphPermutation& p) {
        return VertexSet::of(p.size(), {0});
    };
    bool threw = false;
    try {
        check_strong_markov(g, 0.9, not_invariant, "plain-singleton", VertexSet::of(4, {3}));
    } catch (const AdmissibilityError&) {
        threw = true;
    }
    CHECK(threw);
}

TEST_CASE("doubled-graph boundary inequality, fully exact") {
    // |E_U(f) - E_V(f)| <= 2 ||f|| P( Q_A hits B | identity on A ) with the
    // minimal copy-compatible closure Q_A on the doubled graph.
    Graph g = grid_graph(2, 2);
    double alpha = 0.8;
    VertexSet u = VertexSet::of(4, {0, 1, 2});  // V minus one corner
    VertexSet b = VertexSet::of(4, {0});
    auto [dbl, phi] = doubled_graph(g);
    int n = g.vertex_count();

    VertexSet a(2 * n);  // V1 \ U1
    u.complement().for_each([&](int v) { a.add(v); });

    Ensemble ens = Ensemble::closed(dbl, alpha);
    double cond_mass = 0.0, hit_mass = 0.0;
    for (std::size_t i = 0; i < ens.configs.size(); ++i) {
        bool id_on_a = true;
        a.for_each([&](int v) {
            if (ens.configs[i][v] != v) id_on_a = false;
        });
        if (!id_on_a) continue;
        cond_mass += ens.weights[i];
        GraphPermutation p(dbl, ens.configs[i]);
        auto q = minimal_invariant_closure(p, phi, a);
        if (q.intersects(b)) hit_mass += ens.weights[i];
    }
    double p_hit = hit_mass / cond_mass;

    for (const auto& f : local_functionals(g, b)) {
        double ev = Ensemble::closed(g, alpha).expect(f.eval);
        double eu = subgraph_expectation(g, u, alpha, f);
        CHECK(std::abs(ev - eu) <= 2 * f.sup_norm * p_hit + 1e-12);
    }
}

TEST_CASE("boundary decay with fitted branching constants") {
    Graph g = path_graph(3);
    double alpha = 3.0;
    auto bound = fit_cycle_bound(g, all_subsets_family(g), alpha);
    REQUIRE(bound.mean_below_two);
    GWProcess gw{bound.offspring_minus_one(), 1};
    auto law = total_population_tail(gw, 40);
    auto fit = fit_gw_tail(law, {0.1, 0.25, 0.5, 1.0, 1.5}, 10.0);

    // U = V: both sides coincide, margin is the full envelope
    auto trivial = verify_boundary_decay(g, VertexSet::full(3), VertexSet::of(3, {0}), alpha,
                                         fit.c, fit.kappa);
    CHECK(trivial[0].pass);

    // drop the far endpoint
    auto rep = verify_boundary_decay(g, VertexSet::of(3, {0, 1}), VertexSet::of(3, {0}), alpha,
                                     fit.c, fit.kappa);
    CHECK(rep[0].pass);

    // alpha sweep: the exact discrepancy shrinks as alpha grows (diagnostic)
    double prev = 1e9;
    for (double aa : {1.0, 2.0, 4.0}) {
        Ensemble full = Ensemble::closed(g, aa);
        Functional f = local_functionals(g, VertexSet::of(3, {0}))[0];
        double lhs = std::abs(full.expect(f.eval) -
                              subgraph_expectation(g, VertexSet::of(3, {0, 1}), aa, f));
        CHECK(lhs < prev);
        prev = lhs;
    }
}

TEST_CASE("partition ratio bounds") {
    Graph g = grid_graph(2, 3);
    double alpha = 2.0;
    auto census = saw_census(grid_graph(9, 9), 4 * 9 + 4, 10);
    auto bound = fit_cycle_bound(g, all_subsets_family(g), alpha);
    GWProcess gw{bound.offspring_minus_one(), 1};
    auto law = total_population_tail(gw, 40);
    auto fit = fit_gw_tail(law, {0.25, 0.5, 1.0, 1.5, 2.0}, 10.0);
    auto bundle = constants_bundle(alpha, std::log(2.64), std::nullopt, census,
                                   GwFit{fit.c, fit.kappa});

    VertexSet v0 = VertexSet::full(6);
    VertexSet v1 = VertexSet::of(6, {0, 1, 2, 3, 4});  // omit one corner
    VertexSet a = VertexSet::of(6, {2});               // opposite corner

    for (const auto& r : verify_partition_ratio_bounds(g, v0, v1, a, alpha, bundle)) {
        CAPTURE(r.check);
        CHECK(r.pass);
    }
    // A empty: ratios are 1, any D >= 1 works
    for (const auto& r : verify_partition_ratio_bounds(g, v0, v1, VertexSet(6), alpha, bundle))
        CHECK(r.pass);
    // V1 = V0: D = 1 and the two ratios coincide exactly
    auto same = verify_partition_ratio_bounds(g, v0, v0, a, alpha, bundle);
    for (const auto& r : same) {
        CHECK(r.pass);
        CHECK(r.rhs == doctest::Approx(1.0));
    }
}

TEST_CASE("c1 lower bound and telescoping") {
    auto census = saw_census(grid_graph(9, 9), 4 * 9 + 4, 10);
    double alpha = 2.0;
    auto bundle = constants_bundle(alpha, std::log(2.64), std::nullopt, census);

    Graph k2 = complete_graph(2);
    auto rep = verify_c1_bound(k2, VertexSet::full(2), VertexSet::of(2, {0}), alpha, bundle);
    CHECK(rep[0].pass);
    CHECK(rep[0].lhs == doctest::Approx(1.0 / (1 + std::exp(-2 * alpha))).epsilon(1e-12));
    CHECK(rep[1].pass);

    Graph g = grid_graph(2, 2);
    auto rep2 = verify_c1_bound(g, VertexSet::full(4), VertexSet::of(4, {0, 1}), alpha, bundle);
    for (const auto& r : rep2) CHECK(r.pass);

    // A empty: 1 >= c1^0
    auto rep3 = verify_c1_bound(g, VertexSet::full(4), VertexSet(4), alpha, bundle);
    CHECK(rep3[0].pass);
}

TEST_CASE("check reports serialize") {
    Graph g = complete_graph(2);
    auto reports = check_spatial_markov(g, 1.0, VertexSet::of(2, {0}));
    auto j = reports[0].to_json();
    CHECK(j.at("check").get<std::string>() == "spatial-markov-i");
    CHECK(j.contains("margin"));
    CHECK(j.at("pass").get<bool>());
}
