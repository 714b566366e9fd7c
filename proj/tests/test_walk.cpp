#include <doctest.h>

#include <cmath>
#include <memory>

#include "sieve/bounds.hpp"
#include "sieve/errors.hpp"
#include "sieve/instances.hpp"
#include "sieve/rng.hpp"
#include "sieve/spectral.hpp"
#include "sieve/stats.hpp"
#include "sieve/walk.hpp"

using namespace sieve;

namespace {

struct TwoBlockFixture {
    Instance inst;
    std::shared_ptr<const GeneratorSystem> gs;
    QuotientSpace pair_space;
    std::vector<BlockDetector> detectors;

    explicit TwoBlockFixture(uint64_t seed = 31) {
        inst = make_coloring_instance(2, 3);
        gs = std::make_shared<const GeneratorSystem>(
            build_generator_system(inst.system, 0.5, {}, seed));
        pair_space = make_quotient(inst.system, std::vector<uint32_t>{1, 2});
        detectors = {inst.block_detector(1), inst.block_detector(2)};
    }
};

} // namespace

TEST_CASE("walk endpoints") {
    TwoBlockFixture fx;
    Labeling g0 = fx.inst.theta_free_start();
    WalkConfig cfg(fx.gs, g0, 5);
    CHECK(walk(cfg, 0) == g0);
    CHECK(walk(cfg, 0, 99) == g0);

    // identity-only step set keeps the walk fixed
    auto one_block = make_block_system(GroundSet::integer_cells(3), 3, {{}});
    auto gs_id = std::make_shared<const GeneratorSystem>(
        build_generator_system(one_block, 0.5, {1.0}, 1));
    REQUIRE(gs_id->steps.size() == 1);
    Labeling start(one_block->ground, 3);
    WalkConfig cfg_id(gs_id, start, 2);
    CHECK(walk(cfg_id, 17) == start);
}

TEST_CASE("walk reproducibility per (seed, trial, k)") {
    TwoBlockFixture fx;
    WalkConfig cfg(fx.gs, Labeling(fx.inst.system->ground, 3), 1234);
    Labeling a = walk(cfg, 25, 3);
    Labeling b = walk(cfg, 25, 3);
    CHECK(a == b);
    // different trial gives an independent stream
    CHECK_FALSE(walk(cfg, 25, 4) == a);
}

TEST_CASE("uniform steps over the whole klein group mix in one step") {
    auto ground = GroundSet::grid_box_edges(1); // any two sites will do
    auto bs = make_block_system(ground, 2, {{0, 1}});
    // draws saturate the 4-element quotient for this seed
    GeneratorSystem gs = build_generator_system(bs, 0.5, {5.0}, 3);
    REQUIRE(gs.block_sets[0].size() == 4);
    auto gsp = std::make_shared<const GeneratorSystem>(gs);
    WalkConfig cfg(gsp, Labeling(ground, 2), 77);
    QuotientSpace q = make_quotient(bs, std::vector<uint32_t>{1});

    std::vector<uint64_t> counts(4, 0);
    const uint64_t trials = 100000;
    for (uint64_t t = 0; t < trials; ++t) ++counts[q.project(walk(cfg, 3, t))];
    CHECK(chi_square_uniform_pvalue(counts) >= 1e-3);
}

TEST_CASE("character transform") {
    TwoBlockFixture fx;
    QuotientSpace q1 = make_quotient(fx.inst.system, std::vector<uint32_t>{1});

    // trivial character
    CHECK(std::abs(character_transform(*fx.gs, q1, 0) - std::complex<double>{1.0, 0.0}) <= 1e-12);

    // |M_chi| <= 1 and real for all characters of the pair quotient
    auto all = character_transforms(*fx.gs, fx.pair_space);
    for (uint64_t chi = 0; chi < fx.pair_space.group.order(); ++chi) {
        CHECK(std::abs(all[chi]) <= 1.0 + 1e-12);
        CHECK(std::abs(all[chi].imag()) <= 1e-12);
        CHECK(std::abs(all[chi] - character_transform(*fx.gs, fx.pair_space, chi)) <= 1e-12);
    }

    // Z/3 with all three residues as steps: nontrivial M = 0
    auto cells = make_block_system(GroundSet::integer_cells(1), 3, {{0}});
    GeneratorSystem full;
    full.system = cells;
    full.delta = 0.5;
    full.b_seq = {1.0};
    full.kappa_seq = {3};
    full.samples = {{Labeling(cells->ground, 3), Labeling::from_pairs(cells->ground, 3, {{0, 1}}),
                     Labeling::from_pairs(cells->ground, 3, {{0, 2}})}};
    full.block_sets = full.samples;
    full.steps = full.samples[0];
    full.step_prob = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    QuotientSpace qz3 = make_quotient(cells, std::vector<uint32_t>{1});
    CHECK(std::abs(character_transform(full, qz3, 1)) <= 1e-12);
    CHECK(std::abs(character_transform(full, qz3, 2)) <= 1e-12);
}

TEST_CASE("exact moment") {
    TwoBlockFixture fx;
    Labeling g0 = fx.inst.theta_free_start();
    WalkConfig cfg(fx.gs, g0, 5);
    const QuotientSpace& q = fx.pair_space;

    for (uint64_t chi : {uint64_t{0}, uint64_t{1}, uint64_t{100}}) {
        Character ch{&q, chi};
        CHECK(std::abs(exact_moment(cfg, q, chi, 0) - ch.eval(g0)) <= 1e-12);
    }

    // Monte Carlo mean of chi(X_k) within CLT tolerance
    const uint64_t trials = 100000, k = 5;
    uint64_t chi = 40;
    Character ch{&q, chi};
    std::complex<double> mean{0.0, 0.0};
    for (uint64_t t = 0; t < trials; ++t) mean += ch.eval(walk(cfg, k, t));
    mean /= static_cast<double>(trials);
    std::complex<double> expected = exact_moment(cfg, q, chi, k);
    double tol = 4.0 / std::sqrt(static_cast<double>(trials));
    CHECK(std::abs(mean.real() - expected.real()) <= tol);
    CHECK(std::abs(mean.imag() - expected.imag()) <= tol);
}

TEST_CASE("character type evaluates frequencies") {
    TwoBlockFixture fx;
    const QuotientSpace& q = fx.pair_space;
    RngStream rng(71);
    for (int i = 0; i < 40; ++i) {
        uint64_t chi = rng.next_below(q.group.order());
        Character ch{&q, chi};
        Labeling f = q.lift(rng.next_below(q.group.order()));
        Labeling g = q.lift(rng.next_below(q.group.order()));
        CHECK(std::abs(ch.eval(f.add(g)) - ch.eval(f) * ch.eval(g)) <= 1e-12);
    }
    Character trivial{&q, 0};
    CHECK(std::abs(trivial.eval(q.lift(123)) - std::complex<double>{1.0, 0.0}) <= 1e-15);
    Character ch{&q, 5};
    uint32_t digit0 = static_cast<uint32_t>(5 % 3);
    CHECK(ch.frequency(q.sites[0]) == digit0);
}

TEST_CASE("exact block distribution") {
    TwoBlockFixture fx;
    Labeling g0 = fx.inst.theta_free_start();
    WalkConfig cfg(fx.gs, g0, 5);
    const QuotientSpace& q = fx.pair_space;

    SUBCASE("k=0 is a point mass at the start") {
        auto dist = exact_block_distribution(cfg, q, 0);
        uint64_t at = q.project(g0);
        for (uint64_t x = 0; x < q.group.order(); ++x)
            CHECK(dist[x] == doctest::Approx(x == at ? 1.0 : 0.0).epsilon(1e-10));
    }

    SUBCASE("distribution is a probability vector") {
        auto dist = exact_block_distribution(cfg, q, 7);
        double sum = 0.0;
        for (double p : dist) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("projected steps covering Z/2 are uniform from k=1") {
        auto ground = GroundSet::grid_box_edges(1);
        auto bs = make_block_system(ground, 2, {{0}});
        GeneratorSystem gs = build_generator_system(bs, 0.5, {3.0}, 2);
        REQUIRE(gs.block_sets[0].size() == 2); // both residues sampled
        auto gsp = std::make_shared<const GeneratorSystem>(gs);
        WalkConfig c2(gsp, Labeling(ground, 2), 1);
        QuotientSpace qz2 = make_quotient(bs, std::vector<uint32_t>{1});
        for (uint64_t k : {1, 2, 9}) {
            auto dist = exact_block_distribution(c2, qz2, k);
            CHECK(dist[0] == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(dist[1] == doctest::Approx(0.5).epsilon(1e-12));
        }
    }

    SUBCASE("total variation against an empirical histogram") {
        const uint64_t trials = 100000, k = 5;
        auto dist = exact_block_distribution(cfg, q, k);
        std::vector<double> hist(q.group.order(), 0.0);
        for (uint64_t t = 0; t < trials; ++t)
            hist[q.project(walk(cfg, k, t))] += 1.0 / static_cast<double>(trials);
        double tv = 0.0;
        for (uint64_t x = 0; x < q.group.order(); ++x) tv += std::abs(hist[x] - dist[x]);
        tv /= 2.0;
        CHECK(tv <= 3.0 * std::sqrt(static_cast<double>(q.group.order()) /
                                    static_cast<double>(trials)));
    }

    SUBCASE("dft matches the direct reference transform") {
        auto data = character_transforms(*fx.gs, q);
        std::vector<std::complex<double>> raw(q.group.order(), {0.0, 0.0});
        for (size_t i = 0; i < fx.gs->steps.size(); ++i)
            raw[q.project(fx.gs->steps[i])] += fx.gs->step_prob[i];
        auto direct = abelian_dft_direct(q.group, raw, false);
        for (uint64_t chi = 0; chi < q.group.order(); ++chi)
            CHECK(std::abs(data[chi] - direct[chi]) <= 1e-10);
    }

    SUBCASE("serial and parallel agree bitwise") {
        auto a = exact_block_distribution(cfg, q, 11, Exec::serial);
        auto b = exact_block_distribution(cfg, q, 11, Exec::parallel);
        CHECK(a == b);
    }
}

TEST_CASE("exact survival probability") {
    TwoBlockFixture fx;

    SUBCASE("zero coloring is monochromatic at k=0") {
        WalkConfig cfg(fx.gs, Labeling(fx.inst.system->ground, 3), 5);
        CHECK(exact_survival_probability(cfg, fx.pair_space, fx.detectors, 0) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("empty theta survives everything") {
        WalkConfig cfg(fx.gs, Labeling(fx.inst.system->ground, 3), 5);
        std::vector<BlockDetector> empty_theta{
            [](const Labeling&, const Block&) { return false; },
            [](const Labeling&, const Block&) { return false; }};
        for (uint64_t k : {0, 1, 25})
            CHECK(exact_survival_probability(cfg, fx.pair_space, empty_theta, k) ==
                  doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("oracle matches Monte Carlo within the Wilson interval") {
        WalkConfig cfg(fx.gs, fx.inst.theta_free_start(), 5);
        std::vector<uint64_t> ks{1, 5, 25};
        SurvivalCounts counts = mc_survival(cfg, fx.pair_space, fx.detectors, ks, 100000);
        for (size_t i = 0; i < ks.size(); ++i) {
            double exact = exact_survival_probability(cfg, fx.pair_space, fx.detectors, ks[i]);
            WilsonInterval ci = wilson_ci(counts.surviving[i], counts.trials);
            CHECK(exact >= ci.lo);
            CHECK(exact <= ci.hi);
        }
    }
}

TEST_CASE("distribution converges to uniform when transforms decay") {
    TwoBlockFixture fx;
    WalkConfig cfg(fx.gs, fx.inst.theta_free_start(), 5);
    auto transforms = character_transforms(*fx.gs, fx.pair_space);
    for (uint64_t chi = 1; chi < fx.pair_space.group.order(); ++chi)
        REQUIRE(std::abs(transforms[chi]) < 1.0);
    auto dist = exact_block_distribution(cfg, fx.pair_space, 4000);
    double uniform = 1.0 / static_cast<double>(fx.pair_space.group.order());
    for (double p : dist) CHECK(p == doctest::Approx(uniform).epsilon(1e-6));
}

TEST_CASE("walk decay bound from verified expanders") {
    TwoBlockFixture fx;
    // verify both block graphs are delta-expanders first
    for (uint32_t l : {1u, 2u}) {
        QuotientSpace q = make_quotient(fx.inst.system, std::vector<uint32_t>{l});
        std::vector<uint64_t> gens;
        for (const Labeling& s : fx.gs->block_sets[l - 1]) gens.push_back(q.project(s));
        REQUIRE(is_delta_expander(cayley_spectrum(q.group, gens), 0.5));
    }
    EtaReport eta = compute_eta(*fx.gs, EtaMode::proof_faithful);
    REQUIRE(eta.valid);
    const double bound = 1.0 - eta.min_nu;

    for (auto labels : {std::vector<uint32_t>{1}, {2}, {1, 2}}) {
        QuotientSpace q = make_quotient(fx.inst.system, labels);
        auto transforms = character_transforms(*fx.gs, q);
        for (uint64_t chi = 1; chi < q.group.order(); ++chi)
            CHECK(std::abs(transforms[chi]) <= bound + 1e-12);
    }
}

TEST_CASE("mc survival is deterministic across thread counts") {
    TwoBlockFixture fx;
    WalkConfig cfg(fx.gs, fx.inst.theta_free_start(), 5);
    std::vector<uint64_t> ks{1, 5, 10};
    SurvivalCounts a = mc_survival(cfg, fx.pair_space, fx.detectors, ks, 5000, nullptr,
                                   Exec::serial);
    SurvivalCounts b = mc_survival(cfg, fx.pair_space, fx.detectors, ks, 5000, nullptr,
                                   Exec::parallel);
    CHECK(a.surviving == b.surviving);
    CHECK(a.instance_free == b.instance_free);
}

TEST_CASE("quotient capacity") {
    Instance grid = make_grid_instance(1); // 2^104 states
    CHECK_THROWS_AS(make_quotient(grid.system, std::vector<uint32_t>{1}), capacity_error);
}

TEST_CASE("walk config validation") {
    TwoBlockFixture fx;
    Labeling wrong_c(fx.inst.system->ground, 4);
    CHECK_THROWS_AS(WalkConfig(fx.gs, wrong_c, 1), structure_error);

    GeneratorSystem broken = *fx.gs;
    broken.step_prob[1] += 0.5; // no longer sums to 1
    auto bp = std::make_shared<const GeneratorSystem>(broken);
    CHECK_THROWS_AS(WalkConfig(bp, Labeling(fx.inst.system->ground, 3), 1), structure_error);
}
