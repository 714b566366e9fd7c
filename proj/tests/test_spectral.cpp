#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sieve/errors.hpp"
#include "sieve/rng.hpp"
#include "sieve/spectral.hpp"

using namespace sieve;

namespace {

AbelianGroup random_group(RngStream& rng, uint64_t max_order) {
    std::vector<uint32_t> orders;
    uint64_t order = 1;
    do {
        uint32_t m = 2 + static_cast<uint32_t>(rng.next_below(7));
        if (order * m > max_order) break;
        orders.push_back(m);
        order *= m;
    } while (rng.next_below(4) != 0);
    if (orders.empty()) orders.push_back(2 + static_cast<uint32_t>(rng.next_below(3)));
    return AbelianGroup(std::move(orders));
}

std::vector<uint64_t> random_nonidentity_generators(const AbelianGroup& g, RngStream& rng,
                                                    size_t max_count) {
    std::set<uint64_t> gens;
    size_t count = 1 + rng.next_below(max_count);
    for (size_t i = 0; i < count; ++i) gens.insert(1 + rng.next_below(g.order() - 1));
    return {gens.begin(), gens.end()};
}

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

TEST_CASE("cyclic four with a single generator") {
    AbelianGroup g({4});
    std::vector<uint64_t> s{1};
    SpectrumReport r = cayley_spectrum(g, s);
    CHECK(sorted(r.eigenvalues) == std::vector<double>{-1.0, 0.0, 0.0, 1.0});
    CHECK(r.strict_gap == doctest::Approx(0.0));
    CHECK(r.paper_gap == doctest::Approx(1.0));
    CHECK(r.bipartite);
    CHECK(r.connected);
    CHECK(r.max_imag <= 1e-12);
}

TEST_CASE("klein four with the standard generators") {
    AbelianGroup g({2, 2});
    std::vector<uint64_t> s{1, 2}; // (1,0), (0,1)
    SpectrumReport r = cayley_spectrum(g, s);
    CHECK(sorted(r.eigenvalues) == std::vector<double>{-1.0, 0.0, 0.0, 1.0});
}

TEST_CASE("full generator set flattens the spectrum") {
    AbelianGroup g({3, 3});
    std::vector<uint64_t> s;
    for (uint64_t e = 1; e < g.order(); ++e) s.push_back(e);
    SpectrumReport r = cayley_spectrum(g, s);
    CHECK(r.eigenvalues[0] == doctest::Approx(1.0));
    for (uint64_t chi = 1; chi < g.order(); ++chi)
        CHECK(std::abs(r.eigenvalues[chi]) <= 1e-12);
    CHECK(r.paper_gap == doctest::Approx(1.0));
    CHECK(r.strict_gap == doctest::Approx(1.0));
}

TEST_CASE("eigenvalues are real and in [-1,1] for random symmetric sets") {
    RngStream rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        AbelianGroup g = random_group(rng, 256);
        auto s = random_nonidentity_generators(g, rng, 6);
        SpectrumReport r = cayley_spectrum(g, s);
        CHECK(r.max_imag <= 1e-12);
        for (double l : r.eigenvalues) {
            CHECK(l <= 1.0 + 1e-12);
            CHECK(l >= -1.0 - 1e-12);
        }
        CHECK(r.paper_gap >= r.strict_gap);
        CHECK(r.eigenvalues[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("character values form a homomorphism") {
    RngStream rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        AbelianGroup g = random_group(rng, 128);
        uint64_t chi = rng.next_below(g.order());
        uint64_t x = rng.next_below(g.order());
        uint64_t y = rng.next_below(g.order());
        auto lhs = g.character_value(chi, g.add(x, y));
        auto rhs = g.character_value(chi, x) * g.character_value(chi, y);
        CHECK(std::abs(lhs - rhs) <= 1e-12);
        CHECK(std::abs(g.character_value(0, x) - std::complex<double>{1.0, 0.0}) <= 1e-15);
    }
}

TEST_CASE("delta expander verdicts") {
    AbelianGroup z4({4});
    std::vector<uint64_t> s{1};
    SpectrumReport r4 = cayley_spectrum(z4, s);
    CHECK(is_delta_expander(r4, 0.5, GapConvention::paper));
    CHECK_FALSE(is_delta_expander(r4, 0.5, GapConvention::strict));

    AbelianGroup z3({3});
    SpectrumReport r3 = cayley_spectrum(z3, s);
    CHECK(r3.eigenvalues[1] == doctest::Approx(-0.5));
    CHECK(r3.eigenvalues[2] == doctest::Approx(-0.5));
    CHECK(is_delta_expander(r3, 0.5, GapConvention::paper));
    CHECK(is_delta_expander(r3, 0.5, GapConvention::strict));

    CHECK_THROWS_AS(is_delta_expander(r3, 0.7), structure_error);
    CHECK_NOTHROW(is_delta_expander(r3, 0.7, GapConvention::paper, false));

    // a disconnected graph is never an expander
    AbelianGroup z6({6});
    std::vector<uint64_t> even{2};
    SpectrumReport r6 = cayley_spectrum(z6, even);
    CHECK_FALSE(r6.connected);
    CHECK(r6.paper_gap == doctest::Approx(0.0));
}

TEST_CASE("product construction on two triangles") {
    AbelianGroup z3({3});
    std::vector<uint64_t> s{1};
    SpectrumReport factor = cayley_spectrum(z3, s);
    CHECK(factor.paper_gap == doctest::Approx(0.5));

    ProductGraph pg = product_cayley(z3, s, z3, s, 0, 0);
    CHECK(pg.gamma == doctest::Approx(1.0));
    SpectrumReport pr = cayley_spectrum(pg.group, pg.edge_set);
    // guarantee (1+gamma)^{-1} delta = 1/4; actual gap 1/2
    CHECK(pr.paper_gap == doctest::Approx(0.5));
    CHECK(pr.paper_gap >= (1.0 / (1.0 + pg.gamma)) * 0.5 - 1e-12);

    for (uint64_t chi_j = 0; chi_j < 3; ++chi_j) {
        for (uint64_t chi_k = 0; chi_k < 3; ++chi_k) {
            double expected = (std::cos(2 * M_PI * chi_j / 3) + std::cos(2 * M_PI * chi_k / 3)) / 2;
            CHECK(pr.eigenvalues[chi_j + 3 * chi_k] == doctest::Approx(expected));
        }
    }
}

TEST_CASE("product with a trivial factor keeps the other spectrum") {
    AbelianGroup z5({5});
    AbelianGroup one({1});
    std::vector<uint64_t> s{1, 2};
    std::vector<uint64_t> t{0}; // only the identity
    ProductGraph pg = product_cayley(z5, s, one, t, 0, 0);
    SpectrumReport pr = cayley_spectrum(pg.group, pg.edge_set);
    SpectrumReport base = cayley_spectrum(z5, s);
    // the identity column adds a loop, so compare against the add-identity relation
    CHECK(pr.group.order() == 5);
    for (uint64_t chi = 0; chi < 5; ++chi) {
        double l = base.eigenvalues[chi];
        double expected = l + (1.0 - 2.0 * l) / (2.0 + static_cast<double>(base.sstar_size));
        CHECK(pr.eigenvalues[chi] == doctest::Approx(expected));
    }

    CHECK_THROWS_AS(product_cayley(z5, s, one, t, 1, 0), structure_error); // 1^2 != 0 in Z/5
}

TEST_CASE("product guarantee on random factor pairs") {
    RngStream rng(47);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        AbelianGroup g = random_group(rng, 64);
        AbelianGroup h = random_group(rng, 64);
        auto s = random_nonidentity_generators(g, rng, 5);
        auto t = random_nonidentity_generators(h, rng, 5);
        SpectrumReport rs = cayley_spectrum(g, s);
        SpectrumReport rt = cayley_spectrum(h, t);
        double delta = std::min(rs.paper_gap, rt.paper_gap);
        ProductGraph pg = product_cayley(g, s, h, t, 0, 0);
        SpectrumReport pr = cayley_spectrum(pg.group, pg.edge_set);
        CHECK(pr.paper_gap >= delta / (1.0 + pg.gamma) - 1e-12);
        ++checked;
    }
    CHECK(checked == 200);
}

TEST_CASE("add-identity eigenvalue relation") {
    AbelianGroup z3({3});
    std::vector<uint64_t> s{1};
    AddIdentityCheck chk = add_identity_check(z3, s);
    CHECK(chk.max_relation_error <= 1e-12);
    // lambda = -1/2 maps to 0; gap improves from 1/2 to 1
    CHECK(chk.base.eigenvalues[1] == doctest::Approx(-0.5));
    CHECK(chk.with_id.eigenvalues[1] == doctest::Approx(0.0));
    CHECK(chk.base.paper_gap == doctest::Approx(0.5));
    CHECK(chk.with_id.paper_gap == doctest::Approx(1.0));
    CHECK(chk.preserves(0.5));

    // lambda = 1/2 is the fixed point of the relation
    double l = 0.5;
    CHECK(l + (1.0 - 2.0 * l) / (2.0 + 4.0) == doctest::Approx(0.5));

    std::vector<uint64_t> with_id{0, 1};
    CHECK_THROWS_AS(add_identity_check(z3, with_id), structure_error);
}

TEST_CASE("add-identity preserves one-sided expansion on random cases") {
    RngStream rng(53);
    for (int trial = 0; trial < 200; ++trial) {
        AbelianGroup g = random_group(rng, 128);
        auto s = random_nonidentity_generators(g, rng, 6);
        AddIdentityCheck chk = add_identity_check(g, s);
        CHECK(chk.max_relation_error <= 1e-12);
        for (double delta : {0.1, 0.3, 0.5}) CHECK(chk.preserves(delta));
    }
}

TEST_CASE("edge expansion brute force") {
    AbelianGroup z2({2});
    std::vector<uint64_t> s{1};
    Ratio h2 = edge_expansion(z2, s);
    CHECK(h2.num == 1);
    CHECK(h2.den == 1);

    AbelianGroup z4({4});
    Ratio h4 = edge_expansion(z4, s); // 4-cycle: two adjacent vertices, boundary 2
    CHECK(h4.value() == doctest::Approx(1.0));

    std::vector<uint64_t> k4{1, 2};
    Ratio hk4 = edge_expansion(z4, k4); // K4
    CHECK(hk4.value() == doctest::Approx(2.0));

    AbelianGroup z32({2, 2, 2, 2, 2});
    CHECK_THROWS_AS(edge_expansion(z32, s), capacity_error);
}

TEST_CASE("cheeger sandwich on small regular graphs") {
    RngStream rng(59);
    for (int trial = 0; trial < 60; ++trial) {
        AbelianGroup g = random_group(rng, 16);
        if (g.order() < 2) continue;
        auto s = random_nonidentity_generators(g, rng, 4);
        SpectrumReport r = cayley_spectrum(g, s);
        if (!r.connected) continue;
        Ratio h = edge_expansion(g, s);
        double k = static_cast<double>(r.sstar_size);
        std::vector<double> eig = sorted(r.eigenvalues);
        double lambda2 = eig[eig.size() - 2]; // second-largest signed eigenvalue
        CHECK((1.0 - lambda2) / 2.0 <= h.value() / k + 1e-9);
        CHECK(h.value() / k <= std::sqrt(2.0 * (1.0 - lambda2)) + 1e-9);
    }
}

TEST_CASE("matrix oracle agrees with character sums") {
    AbelianGroup z4({4});
    std::vector<uint64_t> s{1};
    auto m = matrix_spectrum_oracle(z4, s);
    REQUIRE(m.size() == 4);
    for (size_t i = 0; i < 4; ++i)
        CHECK(std::abs(m[i] - std::vector<double>{-1.0, 0.0, 0.0, 1.0}[i]) <= 1e-12);

    AbelianGroup g({3, 3});
    std::vector<uint64_t> whole;
    for (uint64_t e = 1; e < g.order(); ++e) whole.push_back(e);
    auto mw = matrix_spectrum_oracle(g, whole);
    for (size_t i = 0; i + 1 < mw.size(); ++i) CHECK(std::abs(mw[i]) <= 1e-9);
    CHECK(mw.back() == doctest::Approx(1.0));

    RngStream rng(61);
    AbelianGroup z27({3, 3, 3});
    for (int trial = 0; trial < 10; ++trial) {
        auto gens = random_nonidentity_generators(z27, rng, 6);
        auto chars = sorted(cayley_spectrum(z27, gens).eigenvalues);
        auto mat = matrix_spectrum_oracle(z27, gens);
        REQUIRE(chars.size() == mat.size());
        for (size_t i = 0; i < chars.size(); ++i)
            CHECK(std::abs(chars[i] - mat[i]) <= 1e-9);
    }
}

TEST_CASE("loop convention variants agree with the oracle") {
    AbelianGroup g({3, 2});
    std::vector<uint64_t> gens{1, 0, 4}; // includes the identity: loop
    for (LoopConvention lc : {LoopConvention::half_weight, LoopConvention::full_weight}) {
        auto chars = sorted(cayley_spectrum(g, gens, lc).eigenvalues);
        auto mat = matrix_spectrum_oracle(g, gens, lc);
        for (size_t i = 0; i < chars.size(); ++i) CHECK(std::abs(chars[i] - mat[i]) <= 1e-12);
    }
}

TEST_CASE("serial and parallel spectra are bit-identical") {
    RngStream rng(67);
    AbelianGroup g({2, 2, 2, 2, 3});
    auto s = random_nonidentity_generators(g, rng, 8);
    SpectrumReport a = cayley_spectrum(g, s, LoopConvention::half_weight, Exec::serial);
    SpectrumReport b = cayley_spectrum(g, s, LoopConvention::half_weight, Exec::parallel);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.paper_gap == b.paper_gap);
}

TEST_CASE("spectrum caps and errors") {
    AbelianGroup g({4});
    std::vector<uint64_t> none;
    CHECK_THROWS_AS(cayley_spectrum(g, none), structure_error);
    std::vector<uint64_t> s{1};
    CHECK_THROWS_AS(cayley_spectrum(g, s, LoopConvention::half_weight, Exec::serial, 2),
                    capacity_error);
    CHECK_THROWS_AS(matrix_spectrum_oracle(g, s, LoopConvention::half_weight, 2), capacity_error);
}
