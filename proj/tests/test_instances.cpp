#include <doctest.h>

#include <cmath>
#include <set>

#include "sieve/errors.hpp"
#include "sieve/instances.hpp"
#include "sieve/rng.hpp"

using namespace sieve;

TEST_CASE("coloring instance with triples") {
    Instance inst = make_coloring_instance(3, 3);
    REQUIRE(inst.system->blocks.size() == 3);
    for (const Block& b : inst.system->blocks) {
        CHECK(b.sites.size() == 3);
        CHECK(inst.system->quotient_index(b.label) == 27);
    }
    CHECK(inst.paper_parameters);
    // blocks pairwise disjoint
    std::set<uint32_t> seen;
    for (const Block& b : inst.system->blocks)
        for (uint32_t s : b.sites) CHECK(seen.insert(s).second);
}

TEST_CASE("triangular partition needs permissive mode") {
    CHECK_THROWS_AS(make_coloring_instance(3, 3, ColoringPartition::triangular), structure_error);
    Instance inst =
        make_coloring_instance(3, 3, ColoringPartition::triangular, InstanceMode::permissive);
    // i(l) = l+1 gives edge counts 1, 3, 6
    CHECK(inst.system->blocks[0].sites.size() == 1);
    CHECK(inst.system->blocks[1].sites.size() == 3);
    CHECK(inst.system->blocks[2].sites.size() == 6);
    CHECK_FALSE(inst.detector(1).enabled); // i(1)=2 < 3
    CHECK(inst.detector(2).enabled);
    Labeling anything = Labeling::from_pairs(inst.system->ground, 3, {});
    CHECK_FALSE(inst.detector(1).matches(anything));
}

TEST_CASE("overlapping custom partitions are rejected") {
    std::vector<std::vector<int32_t>> overlap{{1, 2, 3}, {3, 4, 5}};
    CHECK_THROWS_AS(
        make_coloring_instance(2, 3, ColoringPartition::custom, InstanceMode::strict, overlap),
        structure_error);
}

TEST_CASE("monochromatic triangle detection") {
    Instance inst = make_coloring_instance(2, 3);
    const PatternDetector& det = inst.detector(1);
    const Block& b = inst.system->block(1);

    Labeling zero(inst.system->ground, 3);
    CHECK(detect_mono_triangle(zero, det)); // constant color 0

    Labeling rainbow = Labeling::from_pairs(inst.system->ground, 3,
                                            {{b.sites[0], 1}, {b.sites[1], 2}});
    CHECK_FALSE(detect_mono_triangle(rainbow, det)); // colors (1,2,0)

    // exact count over all 27 labelings: exactly 3 monochromatic
    uint64_t hits = 0;
    for (uint32_t r0 = 0; r0 < 3; ++r0)
        for (uint32_t r1 = 0; r1 < 3; ++r1)
            for (uint32_t r2 = 0; r2 < 3; ++r2) {
                Labeling f = Labeling::from_pairs(
                    inst.system->ground, 3,
                    {{b.sites[0], r0}, {b.sites[1], r1}, {b.sites[2], r2}});
                if (detect_mono_triangle(f, det)) ++hits;
            }
    CHECK(hits == 3);
    CHECK(theta_density(*inst.system, det, DensityMode::exact) == doctest::Approx(1.0 / 9));
}

TEST_CASE("detectors read only their block") {
    Instance inst = make_coloring_instance(2, 3);
    const Block& b1 = inst.system->block(1);
    const Block& b2 = inst.system->block(2);
    RngStream rng(83);
    for (int i = 0; i < 50; ++i) {
        std::vector<std::pair<uint32_t, uint32_t>> pairs;
        for (uint32_t s : b1.sites) {
            uint32_t r = static_cast<uint32_t>(rng.next_below(3));
            if (r) pairs.push_back({s, r});
        }
        Labeling f = Labeling::from_pairs(inst.system->ground, 3, pairs);
        // add foreign-block noise
        Labeling noisy = f.add(Labeling::from_pairs(
            inst.system->ground, 3, {{b2.sites[rng.next_below(3)], 1 + (uint32_t)rng.next_below(2)}}));
        CHECK(inst.detector(1).matches(f) == inst.detector(1).matches(noisy));
    }
}

TEST_CASE("grid instance geometry") {
    Instance inst = make_grid_instance(10);
    for (uint32_t l = 1; l <= 10; ++l)
        CHECK(inst.system->block(l).sites.size() ==
              static_cast<size_t>(grid_annulus_edge_count(l)));
    CHECK(inst.system->block(1).sites.size() == 104);

    // disc edge counts 4l(2l+1)
    for (int64_t l = 1; l <= 10; ++l) {
        auto ground = GroundSet::grid_box_edges(static_cast<int32_t>(l));
        CHECK(static_cast<int64_t>(ground->size()) == grid_disc_edge_count(l));
    }
    CHECK(grid_disc_edge_count(2) == 40);

    // nested discs telescope: blocks are disjoint by construction
    std::set<uint32_t> seen;
    for (const Block& b : inst.system->blocks)
        for (uint32_t s : b.sites) CHECK(seen.insert(s).second);
}

TEST_CASE("four cycle detection") {
    Instance inst = make_grid_instance(2);
    const PatternDetector& det = inst.detector(1);
    const Block& b = inst.system->block(1);
    auto ground = inst.system->ground;

    Labeling empty(ground, 2);
    CHECK_FALSE(detect_four_cycle(empty, det));

    // the unit square past the inner disc: corners (2l+1, 2l+1)..(2l+2, 2l+2), l=1
    auto edge = [&](int32_t x1, int32_t y1, int32_t x2, int32_t y2) {
        auto idx = ground->index_of(Site::grid_edge(x1, y1, x2, y2));
        REQUIRE(idx.has_value());
        return *idx;
    };
    Labeling square = Labeling::from_pairs(ground, 2,
                                           {{edge(3, 3, 4, 3), 1},
                                            {edge(3, 4, 4, 4), 1},
                                            {edge(3, 3, 3, 4), 1},
                                            {edge(4, 3, 4, 4), 1}});
    for (uint32_t s : square.support()) CHECK(b.contains(s));
    CHECK(detect_four_cycle(square, det));
}

TEST_CASE("single-square block density is exactly 1/16") {
    Instance inst = make_grid_instance(1, GridScale::reduced({0, 1}));
    // D(0,1) holds four unit squares; carve a custom single-square block
    auto ground = inst.system->ground;
    auto edge = [&](int32_t x1, int32_t y1, int32_t x2, int32_t y2) {
        return *ground->index_of(Site::grid_edge(x1, y1, x2, y2));
    };
    std::vector<uint32_t> square_sites{edge(0, 0, 1, 0), edge(0, 1, 1, 1), edge(0, 0, 0, 1),
                                       edge(1, 0, 1, 1)};
    auto bs = make_block_system(ground, 2, {square_sites}, "custom");
    PatternDetector det;
    det.kind = PatternKind::four_cycle;
    det.block_label = 1;
    std::vector<uint32_t> sorted_sites = bs->block(1).sites;
    det.patterns.push_back(sorted_sites);
    CHECK(theta_density(*bs, det, DensityMode::exact) == doctest::Approx(1.0 / 16));
    CHECK(theta_density(*bs, det, DensityMode::lower_bound) == doctest::Approx(1.0 / 16));
}

TEST_CASE("reduced grid scale validation") {
    CHECK_NOTHROW(make_grid_instance(2, GridScale::reduced({0, 2, 4})));
    CHECK_THROWS_AS(make_grid_instance(2, GridScale::reduced({0, 2})), structure_error);
    CHECK_THROWS_AS(make_grid_instance(1, GridScale::reduced({2, 2})), structure_error);
}

TEST_CASE("ap instance structure") {
    Instance inst = make_ap_instance(3, 5, 3, 5);
    CHECK(inst.system->blocks.size() == 5);
    // blocks partition [30] into residue classes mod 5
    std::set<uint32_t> all;
    for (const Block& b : inst.system->blocks) {
        CHECK(b.sites.size() == 6);
        for (uint32_t s : b.sites) CHECK(all.insert(s).second);
    }
    CHECK(all.size() == 30);
    CHECK(inst.system->ground->size() == 30);
    CHECK(inst.system->quotient_index(1) == 729); // c^{2s} = 3^6

    CHECK_THROWS_WITH_AS(make_ap_instance(3, 2, 3, 5), doctest::Contains("overlap"),
                         structure_error);
}

TEST_CASE("monochromatic ap detection") {
    Instance inst = make_ap_instance(3, 5, 3, 5);
    const PatternDetector& det = inst.detector(1);
    auto ground = inst.system->ground;

    // constant on {1, 6, 11}: cells 1+5j have indices 0,5,10
    Labeling mono = Labeling::from_pairs(ground, 3, {{0, 2}, {5, 2}, {10, 2}});
    CHECK(detect_mono_ap(mono, det));

    // injective on I_1 needs c >= 2s; with c=7 > 6 use distinct colors
    Instance big = make_ap_instance(3, 5, 7, 5);
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    for (uint32_t j = 0; j < 6; ++j) pairs.push_back({j * 5, j + 1});
    Labeling inj = Labeling::from_pairs(big.system->ground, 7, pairs);
    CHECK_FALSE(detect_mono_ap(inj, big.detector(1)));

    // density for (c=3, s=2) meets the guaranteed constant
    Instance small = make_ap_instance(2, 4, 3, 4);
    double exact = theta_density(*small.system, small.detector(1), DensityMode::exact);
    double bound = theta_density(*small.system, small.detector(1), DensityMode::lower_bound);
    CHECK(bound == doctest::Approx(1.0 / 9));
    CHECK(exact >= bound);
    // with 4 cells and 3 colors some pair always repeats, and any pair in
    // I_l is an AP, so the density is 1
    CHECK(exact == doctest::Approx(1.0));
}

TEST_CASE("exact density for a 4-vertex coloring block by inclusion-exclusion") {
    std::vector<std::vector<int32_t>> groups{{1, 2, 3}, {4, 5, 6, 7}};
    Instance inst =
        make_coloring_instance(2, 3, ColoringPartition::custom, InstanceMode::strict, groups);
    double exact = theta_density(*inst.system, inst.detector(2), DensityMode::exact);
    // 4 triangles of K4: 4/9 - 6/81 + 4/243 - 1/243 = 31/81
    CHECK(exact == doctest::Approx(31.0 / 81).epsilon(1e-12));
    CHECK(exact >= 1.0 / 9);
}

TEST_CASE("exact densities dominate the guaranteed constants") {
    Instance coloring = make_coloring_instance(2, 3);
    for (uint32_t l : {1u, 2u}) {
        double exact = theta_density(*coloring.system, coloring.detector(l), DensityMode::exact);
        double lower = theta_density(*coloring.system, coloring.detector(l),
                                     DensityMode::lower_bound);
        CHECK(exact >= lower - 1e-12);
    }
    Instance grid = make_grid_instance(1, GridScale::reduced({0, 2}));
    double exact = theta_density(*grid.system, grid.detector(1), DensityMode::exact);
    CHECK(exact >= 1.0 / 16 - 1e-12);
}

TEST_CASE("density enumeration is deterministic across exec policies") {
    Instance inst = make_coloring_instance(2, 3);
    double a = theta_density(*inst.system, inst.detector(1), DensityMode::exact, Exec::serial);
    double b = theta_density(*inst.system, inst.detector(1), DensityMode::exact, Exec::parallel);
    CHECK(a == b);
}

TEST_CASE("density cap") {
    Instance grid = make_grid_instance(1); // 2^104 labelings
    CHECK_THROWS_AS(theta_density(*grid.system, grid.detector(1), DensityMode::exact),
                    capacity_error);
}

TEST_CASE("theta-free start avoids every block pattern") {
    for (Instance inst : {make_coloring_instance(2, 3), make_grid_instance(1),
                          make_ap_instance(3, 5, 7, 5)}) {
        Labeling g0 = inst.theta_free_start();
        for (const PatternDetector& det : inst.detectors) CHECK_FALSE(det.matches(g0));
    }
}

TEST_CASE("instance reconstruction from descriptors") {
    Instance inst = make_ap_instance(2, 4, 3, 4);
    Instance back = instance_from_system(inst.system);
    CHECK(back.kind == inst.kind);
    REQUIRE(back.detectors.size() == inst.detectors.size());
    for (size_t i = 0; i < back.detectors.size(); ++i)
        CHECK(back.detectors[i].patterns == inst.detectors[i].patterns);
}
