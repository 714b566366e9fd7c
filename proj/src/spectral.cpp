#include "sieve/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <omp.h>

#include <Eigen/Dense>

#include "sieve/errors.hpp"

namespace sieve {

namespace {

constexpr double kEigTol = 1e-12;

// Deduplicated S u S^{-1}, identity split off as a loop flag.
std::pair<std::vector<uint64_t>, bool> symmetrize(const AbelianGroup& g,
                                                  std::span<const uint64_t> generators) {
    std::set<uint64_t> sstar;
    bool loop = false;
    for (uint64_t s : generators) {
        if (s >= g.order()) throw structure_error("generator outside the group");
        if (s == 0) {
            loop = true;
            continue;
        }
        sstar.insert(s);
        sstar.insert(g.negate(s));
    }
    return {std::vector<uint64_t>(sstar.begin(), sstar.end()), loop};
}

void finalize_report(SpectrumReport& r) {
    r.trivial_eigenvalue = r.eigenvalues.empty() ? 1.0 : r.eigenvalues[0];
    double max_paper = 0.0, max_strict = 0.0;
    bool bipartite = false;
    size_t ones = 0;
    for (size_t i = 0; i < r.eigenvalues.size(); ++i) {
        double l = r.eigenvalues[i];
        if (std::abs(l - 1.0) <= kEigTol) ++ones;
        if (i == 0) continue;
        max_strict = std::max(max_strict, std::abs(l));
        if (l <= -1.0 + kEigTol)
            bipartite = true;
        else
            max_paper = std::max(max_paper, std::abs(l));
    }
    r.paper_gap = 1.0 - max_paper;
    r.strict_gap = 1.0 - max_strict;
    r.bipartite = bipartite;
    r.connected = ones == 1;
}

} // namespace

SpectrumReport cayley_spectrum(const AbelianGroup& g, std::span<const uint64_t> generators,
                               LoopConvention lc, Exec exec, uint64_t char_cap) {
    if (g.order() > char_cap) throw capacity_error("group order exceeds the character cap");
    auto [sstar, loop] = symmetrize(g, generators);
    if (sstar.empty() && !loop) throw structure_error("empty generator set");

    const double loop_degree = loop ? 2.0 : 0.0;
    const double loop_weight = loop ? (lc == LoopConvention::half_weight ? 1.0 : 2.0) : 0.0;
    const double degree = static_cast<double>(sstar.size()) + loop_degree;

    SpectrumReport r;
    r.group = g;
    r.eigenvalues.resize(g.order());
    r.sstar_size = sstar.size();
    r.has_loop = loop;

    const int64_t n = static_cast<int64_t>(g.order());
    std::vector<double> imag(omp_get_max_threads(), 0.0);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (int64_t chi = 0; chi < n; ++chi) {
        std::complex<double> acc{loop_weight, 0.0};
        for (uint64_t s : sstar) acc += g.character_value(static_cast<uint64_t>(chi), s);
        r.eigenvalues[chi] = acc.real() / degree;
        double im = std::abs(acc.imag()) / degree;
        int t = omp_get_thread_num();
        if (im > imag[t]) imag[t] = im;
    }
    r.max_imag = *std::max_element(imag.begin(), imag.end());
    finalize_report(r);
    return r;
}

bool is_delta_expander(const SpectrumReport& report, double delta, GapConvention gc,
                       bool strict_delta) {
    if (!(delta > 0.0) || !(delta < 1.0)) throw structure_error("delta must lie in (0,1)");
    if (strict_delta && delta > 0.5)
        throw structure_error("delta must lie in (0,1/2]; pass strict_delta=false to exceed it");
    return report.gap(gc) >= delta;
}

ProductGraph product_cayley(const AbelianGroup& g, std::span<const uint64_t> s,
                            const AbelianGroup& h, std::span<const uint64_t> t, uint64_t x0,
                            uint64_t y0) {
    if (g.add(x0, x0) != 0 || h.add(y0, y0) != 0)
        throw structure_error("product witness must square to the identity");

    std::vector<uint32_t> orders = g.orders();
    orders.insert(orders.end(), h.orders().begin(), h.orders().end());
    ProductGraph out;
    out.group = AbelianGroup(std::move(orders));

    auto embed = [&](uint64_t a, uint64_t b) { return a + g.order() * b; };
    std::set<uint64_t> edges;
    for (uint64_t e : s) edges.insert(embed(e, y0));
    for (uint64_t e : t) edges.insert(embed(x0, e));
    out.edge_set.assign(edges.begin(), edges.end());

    auto [sstar, sloop] = symmetrize(g, s);
    auto [tstar, tloop] = symmetrize(h, t);
    double ns = static_cast<double>(sstar.size() + (sloop ? 1 : 0));
    double nt = static_cast<double>(tstar.size() + (tloop ? 1 : 0));
    if (ns == 0 || nt == 0) throw structure_error("product factors need nonempty edge sets");
    out.gamma = std::max(ns / nt, nt / ns);
    return out;
}

bool AddIdentityCheck::preserves(double delta) const {
    double base_max = -1.0, with_max = -1.0;
    for (size_t i = 1; i < base.eigenvalues.size(); ++i) {
        base_max = std::max(base_max, base.eigenvalues[i]);
        with_max = std::max(with_max, with_id.eigenvalues[i]);
    }
    if (base_max > 1.0 - delta + kEigTol) return true; // premise empty
    return with_max <= 1.0 - delta + kEigTol;
}

AddIdentityCheck add_identity_check(const AbelianGroup& g, std::span<const uint64_t> s) {
    for (uint64_t e : s)
        if (e == 0) throw structure_error("add-identity check expects the identity outside S");
    AddIdentityCheck chk;
    chk.base = cayley_spectrum(g, s);
    std::vector<uint64_t> with(s.begin(), s.end());
    with.push_back(0);
    chk.with_id = cayley_spectrum(g, with, LoopConvention::half_weight);

    const double m = static_cast<double>(chk.base.sstar_size);
    double worst = 0.0;
    for (uint64_t chi = 0; chi < g.order(); ++chi) {
        double l = chk.base.eigenvalues[chi];
        double predicted = l + (1.0 - 2.0 * l) / (2.0 + m);
        worst = std::max(worst, std::abs(chk.with_id.eigenvalues[chi] - predicted));
    }
    chk.max_relation_error = worst;
    return chk;
}

Ratio edge_expansion(const AbelianGroup& g, std::span<const uint64_t> generators) {
    const uint64_t n = g.order();
    if (n > 20) throw capacity_error("edge expansion brute force caps at order 20");
    if (n < 2) throw structure_error("edge expansion needs at least two vertices");
    auto [sstar, loop] = symmetrize(g, generators);
    (void)loop; // loops never cross a cut

    std::vector<uint32_t> nbr(n, 0);
    for (uint64_t v = 0; v < n; ++v)
        for (uint64_t s : sstar) nbr[v] |= uint32_t{1} << g.add(v, s);

    Ratio best{-1, 1};
    const uint32_t full = static_cast<uint32_t>((uint64_t{1} << n) - 1);
    for (uint32_t mask = 1; mask <= full; ++mask) {
        int size = std::popcount(mask);
        if (size == 0 || 2 * size > static_cast<int>(n)) continue;
        int64_t boundary = 0;
        uint32_t rest = mask;
        while (rest) {
            int v = std::countr_zero(rest);
            rest &= rest - 1;
            boundary += std::popcount(nbr[v] & ~mask);
        }
        // Exact fraction comparison: boundary/size < best.
        if (best.num < 0 || boundary * best.den < best.num * size) best = {boundary, size};
    }
    int64_t d = std::gcd(best.num, best.den);
    return {best.num / d, best.den / d};
}

std::vector<double> matrix_spectrum_oracle(const AbelianGroup& g,
                                           std::span<const uint64_t> generators,
                                           LoopConvention lc, uint64_t cap) {
    if (g.order() > cap) throw capacity_error("matrix oracle caps at order " + std::to_string(cap));
    auto [sstar, loop] = symmetrize(g, generators);
    if (sstar.empty() && !loop) throw structure_error("empty generator set");

    const auto n = static_cast<Eigen::Index>(g.order());
    const double loop_degree = loop ? 2.0 : 0.0;
    const double loop_weight = loop ? (lc == LoopConvention::half_weight ? 1.0 : 2.0) : 0.0;
    const double degree = static_cast<double>(sstar.size()) + loop_degree;

    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    for (uint64_t v = 0; v < g.order(); ++v) {
        for (uint64_t s : sstar) adj(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(g.add(v, s))) += 1.0;
        if (loop) adj(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)) += loop_weight;
    }
    adj /= degree;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(adj, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw invariant_error("eigensolver failed to converge");
    std::vector<double> eig(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::sort(eig.begin(), eig.end());
    return eig;
}

} // namespace sieve
