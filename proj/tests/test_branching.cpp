#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "srp/branching.hpp"
#include "srp/strategy.hpp"

using namespace srp;

namespace {
OffspringLaw law_of(std::vector<double> pmf) {
    OffspringLaw law;
    law.pmf = std::move(pmf);
    law.validate();
    return law;
}
}  // namespace

TEST_CASE("degenerate processes") {
    GWProcess zero{law_of({1.0}), 3};
    auto law = total_population_tail(zero, 10);
    CHECK(law.pmf[3] == doctest::Approx(1.0));
    CHECK(law.remainder == doctest::Approx(0.0));

    GWProcess empty{law_of({0.5, 0.5}), 0};
    auto law0 = total_population_tail(empty, 10);
    CHECK(law0.pmf[0] == doctest::Approx(1.0));

    RngStream rng(1, 0);
    auto sim = simulate_gw(zero, 100, 1000, rng);
    CHECK(sim.total == 3);
    CHECK(!sim.capped);
}

TEST_CASE("exact total-population law matches the tree-enumeration oracle") {
    struct Case {
        std::vector<double> pmf;
        int z0;
    };
    std::vector<Case> cases = {
        {{0.5, 0.0, 0.5}, 1}, {{0.3, 0.4, 0.3}, 1}, {{0.6, 0.0, 0.0, 0.4}, 1},
        {{0.5, 0.0, 0.5}, 2}, {{0.7, 0.2, 0.1}, 3},
    };
    for (const auto& c : cases) {
        GWProcess gw{law_of(c.pmf), c.z0};
        auto lib = total_population_tail(gw, 9);
        auto ind = oracle::gw_law_by_tree_enumeration(c.pmf, c.z0, 9);
        double mass = lib.remainder;
        for (int w = 0; w <= 9; ++w) {
            double expect = ind.pmf.count(w) ? ind.pmf.at(w) : 0.0;
            CHECK(lib.pmf[w] == doctest::Approx(expect).epsilon(1e-12));
            mass += lib.pmf[w];
        }
        CHECK(lib.remainder == doctest::Approx(ind.remainder).epsilon(1e-12));
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("hand values for the binary offspring law") {
    GWProcess gw{law_of({0.5, 0.0, 0.5}), 1};
    auto law = total_population_tail(gw, 9);
    CHECK(law.pmf[1] == doctest::Approx(0.5));
    CHECK(law.pmf[2] == doctest::Approx(0.0));
    CHECK(law.pmf[3] == doctest::Approx(0.125));  // root births 2, both die
}

TEST_CASE("simulation agrees with the exact law at a fixed seed") {
    GWProcess gw{law_of({0.6, 0.2, 0.2}), 1};
    auto exact = total_population_tail(gw, 40);
    RngStream rng(77, 0);
    const int n = 200000;
    std::vector<std::uint64_t> counts(41, 0);
    int overflow = 0;
    for (int i = 0; i < n; ++i) {
        auto sim = simulate_gw(gw, 1000, 1000000, rng);
        if (sim.total <= 40 && !sim.capped)
            ++counts[sim.total];
        else
            ++overflow;
    }
    double tv = 0.0;
    for (int w = 0; w <= 40; ++w)
        tv += std::abs(static_cast<double>(counts[w]) / n - exact.pmf[w]);
    tv += std::abs(static_cast<double>(overflow) / n - exact.remainder);
    CHECK(tv / 2 < 0.005);

    // Pearson chi-square over the cells with adequate expected counts; the
    // 0.999 critical value for ~25 cells is ~52, so 80 is a loose fixed gate
    double chi2 = 0.0;
    int cells = 0;
    double pooled_obs = static_cast<double>(overflow), pooled_exp = exact.remainder * n;
    for (int w = 0; w <= 40; ++w) {
        double expected = exact.pmf[w] * n;
        if (expected < 5.0) {
            pooled_obs += static_cast<double>(counts[w]);
            pooled_exp += expected;
            continue;
        }
        double diff = static_cast<double>(counts[w]) - expected;
        chi2 += diff * diff / expected;
        ++cells;
    }
    if (pooled_exp >= 5.0) {
        double diff = pooled_obs - pooled_exp;
        chi2 += diff * diff / pooled_exp;
        ++cells;
    }
    CHECK(cells > 5);
    CHECK(chi2 < 80.0);
}

TEST_CASE("subcritical mean identity within a Monte Carlo interval") {
    GWProcess gw{law_of({0.5, 0.5}), 1};  // m = 1/2, E[W] = 2
    CHECK(gw.expected_total() == doctest::Approx(2.0));
    RngStream rng(13, 0);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        auto sim = simulate_gw(gw, 10000, 1000000, rng);
        REQUIRE(!sim.capped);
        sum += static_cast<double>(sim.total);
        sumsq += static_cast<double>(sim.total) * static_cast<double>(sim.total);
    }
    double mean = sum / n;
    double half_ci = 1.96 * std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - 2.0) < half_ci + 1e-9);
}

TEST_CASE("supercritical refusal and cap sentinels") {
    GWProcess super{law_of({0.2, 0.0, 0.8}), 1};
    CHECK_THROWS_AS(total_population_tail(super, 20, /*require_full_mass=*/true),
                    std::domain_error);
    auto truncated = total_population_tail(super, 20);
    CHECK(truncated.remainder > 0.3);  // survival probability is positive

    RngStream rng(5, 0);
    int capped = 0;
    for (int i = 0; i < 200; ++i) {
        auto sim = simulate_gw(super, 100000, 5000, rng);
        if (sim.capped) ++capped;
    }
    CHECK(capped > 0);
}

TEST_CASE("monotone coupling is pathwise dominated on every draw") {
    auto law = law_of({0.4, 0.3, 0.3});
    RngStream rng(31, 0);
    for (int trial = 0; trial < 500; ++trial) {
        auto coupled = simulate_gw_coupled(law, 1, 2, 200, 100000, rng);
        CHECK(coupled.pathwise_dominated);
        REQUIRE(coupled.small.size() == coupled.large.size());
        for (std::size_t j = 0; j < coupled.small.size(); ++j)
            CHECK(coupled.small[j] <= coupled.large[j]);
    }
}

TEST_CASE("tail fit certifies the exponential envelope on the range") {
    GWProcess gw{law_of({0.7, 0.3}), 1};
    auto law = total_population_tail(gw, 60);
    auto fit = fit_gw_tail(law, {0.05, 0.1, 0.2, 0.3, 0.5}, 50.0);
    CHECK(fit.kappa > 0.0);
    for (int n = 0; n < 60; ++n)
        CHECK(law.tail(n) <= fit.c * std::exp(-2 * fit.kappa * n) + 1e-12);
}

TEST_CASE("cycle bound envelope on the K2 family") {
    Graph k2 = complete_graph(2);
    double alpha = 1.0;
    auto bound = fit_cycle_bound(k2, all_subsets_family(k2), alpha);
    double z = 1 + std::exp(-2 * alpha);
    CHECK(bound.tail[1] == doctest::Approx(1.0));
    CHECK(bound.tail[2] == doctest::Approx(std::exp(-2 * alpha) / z).epsilon(1e-12));
    CHECK(bound.mean == doctest::Approx(1.0 + std::exp(-2 * alpha) / z).epsilon(1e-12));
    CHECK(bound.mean_below_two);
}

TEST_CASE("cycle bound mean tends to one as alpha grows") {
    Graph g = grid_graph(2, 3);
    auto family = all_subsets_family(g);
    double prev = 2.0;
    for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
        auto bound = fit_cycle_bound(g, family, alpha);
        CHECK(bound.mean < prev);
        prev = bound.mean;
    }
    CHECK(prev < 1.05);
}

TEST_CASE("orbit-size domination on the 2x2 grid") {
    Graph g = grid_graph(2, 2);
    auto family = all_subsets_family(g);
    for (double alpha : {0.5, 1.0, 2.0}) {
        auto bound = fit_cycle_bound(g, family, alpha);
        for (std::uint64_t mask : {0x1ULL, 0x9ULL, 0x3ULL, 0xFULL}) {
            auto rep = check_orbit_domination(g, VertexSet::from_mask(4, mask), alpha, bound);
            CHECK(rep.dominated);
        }
    }
}

TEST_CASE("comparison harness: process compared with itself is dominated") {
    // the dominating process *is* a Galton-Watson total population: simulate
    // its per-generation sizes as the round sequence
    auto law = law_of({0.6, 0.4});
    GWProcess gw{law, 1};
    RngStream rng(9, 0);
    std::vector<std::vector<int>> seqs;
    for (int i = 0; i < 4000; ++i) {
        auto sim = simulate_gw(gw, 1000, 100000, rng);
        std::vector<int> q(sim.generations.begin(), sim.generations.end());
        seqs.push_back(q);
    }
    CycleLengthBound xi;
    // beta law: P(xi = 1) = 0.6, P(xi = 2) = 0.4  =>  offspring xi-1 = law
    xi.tail = {1.0, 1.0, 0.4};
    xi.recompute_mean();
    auto rep = comparison_lemma_harness(seqs, {}, 1, xi, 25);
    CHECK(rep.step_certificates_ok);
    CHECK(rep.sum_dominated);
}

TEST_CASE("comparison harness: symmetrized sampler rounds against the branching bound") {
    Graph base = grid_graph(2, 2);
    auto [dbl, phi] = doubled_graph(base);
    VertexSet a = VertexSet::of(dbl.vertex_count(), {0});
    double alpha = 1.2;
    int m = static_cast<int>(phi.order()) - 1;

    auto bound = fit_cycle_bound(dbl, all_subsets_family(dbl), alpha);
    REQUIRE(bound.mean_below_two);

    std::vector<std::vector<int>> seqs;
    std::vector<int> hat_sizes;
    for (int s = 0; s < 3000; ++s) {
        RngStream srng(100 + s, 0), prng(100 + s, 1);
        auto sample = sample_phi_compatible_set(dbl, phi, a, alpha, srng, prng);
        auto q = phi_round_growth(dbl, phi, sample.trace);
        q.insert(q.begin(), static_cast<int>(phi.image(a).count()));  // q_0 = |K_V|
        seqs.push_back(q);
        hat_sizes.push_back(sample.hat_a.count());
    }
    auto rep = comparison_lemma_harness(seqs, hat_sizes, m, bound, 16);
    CHECK(rep.step_certificates_ok);
    CHECK(rep.sum_dominated);
    CHECK(rep.hat_size_dominated);
}

TEST_CASE("offspring law json round-trip") {
    auto law = law_of({0.25, 0.5, 0.25});
    auto j = law.to_json();
    auto back = OffspringLaw::from_json(j);
    REQUIRE(back.pmf.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(back.pmf[k] == doctest::Approx(law.pmf[k]));
    CHECK_THROWS_AS(OffspringLaw::from_json(json{{"0", 0.5}, {"1", 0.4}}),
                    std::invalid_argument);
}
