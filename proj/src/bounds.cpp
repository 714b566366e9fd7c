#include "sieve/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sieve/errors.hpp"

namespace sieve {

double log1p_exp(double x) {
    if (x > 36.8) return x; // e^{-x} below double epsilon
    return std::log1p(std::exp(x));
}

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

EtaReport compute_eta(double p_identity, double p_min, double delta, double c0, EtaMode mode) {
    if (!(p_identity > 0.0) || !(p_min > 0.0))
        throw structure_error("eta needs positive identity and minimum step probabilities");
    if (!(delta > 0.0) || !(delta < 1.0)) throw structure_error("delta must lie in (0,1)");
    if (!(c0 >= 1.0)) throw structure_error("C0 is a max of reciprocal ratios, hence >= 1");

    EtaReport r;
    r.mode = mode;
    r.delta = delta;
    r.c0 = c0;
    r.nu_minus = 2.0 * p_identity;
    r.nu_plus = mode == EtaMode::as_stated ? 2.0 * delta / p_min : p_min * delta / (1.0 + c0);
    r.min_nu = std::min(r.nu_minus, r.nu_plus);
    if (r.min_nu < 1.0) {
        r.valid = true;
        r.eta = -std::log1p(-r.min_nu);
    }
    return r;
}

EtaReport compute_eta(const GeneratorSystem& gs, EtaMode mode) {
    if (!gs.steps[0].is_zero())
        throw structure_error("eta needs the identity in the step set");
    return compute_eta(gs.p_identity(), gs.p_min(), gs.delta, gs.c0, mode);
}

bool sieve_window_ok(uint32_t index_range, double L1, double L2) {
    if (L1 > L2) return false;
    int64_t lo = static_cast<int64_t>(std::ceil(L1));
    int64_t hi = static_cast<int64_t>(std::floor(L2));
    // Lambda cap [L1,L2] must be exactly {ceil L1, ..., floor L2}.
    return lo >= 1 && hi <= static_cast<int64_t>(index_range) && lo <= hi;
}

SieveParams make_sieve_params(const GeneratorSystem& gs, double L1, double L2, EtaMode mode) {
    SieveParams p;
    p.delta = gs.delta;
    p.L1 = L1;
    p.L2 = L2;
    p.c0 = gs.c0;
    p.eta = compute_eta(gs, mode);
    p.window_ok = sieve_window_ok(gs.system->index_range, L1, L2);
    int64_t lo = static_cast<int64_t>(std::ceil(L1));
    int64_t hi = static_cast<int64_t>(std::floor(L2));
    for (int64_t l = lo; l <= hi; ++l) p.b_seq.push_back(gs.b_seq.at(static_cast<size_t>(l - 1)));
    return p;
}

BoundReport sieve_bound(const SieveParams& params, std::span<const double> densities,
                        double ln_group_order_L2, uint64_t k) {
    if (!params.eta.valid)
        throw invariant_error("no valid eta: min(nu-, nu+) >= 1 is reported, not clamped");
    if (densities.size() != params.b_seq.size())
        throw structure_error("one density per window block required");

    BoundReport r;
    r.mode = params.eta.mode;
    r.window_ok = params.window_ok;

    double e_ln = -std::numeric_limits<double>::infinity();
    for (double b : params.b_seq) e_ln = log_add_exp(e_ln, -b);
    r.term_error_sum_ln = e_ln;

    double dsum = 0.0;
    for (double d : densities) {
        if (!(d > 0.0)) throw structure_error("densities must be positive");
        dsum += d;
    }
    r.density_sum = dsum;

    const double eta_k = params.eta.eta * static_cast<double>(k);
    const double span_ln = params.L2 > params.L1
                               ? std::log(params.L2 - params.L1)
                               : -std::numeric_limits<double>::infinity();
    r.main_factor_ln = log1p_exp(span_ln + 1.5 * ln_group_order_L2 - eta_k);

    const double second_ln = r.main_factor_ln - std::log(dsum);
    const double total_ln = log_add_exp(e_ln, second_ln);
    r.total_unclamped = std::exp(total_ln);
    r.vacuous = !(r.total_unclamped < 1.0);
    r.total = std::min(1.0, r.total_unclamped);
    return r;
}

ColoringBoundTerms coloring_bound_terms(uint32_t c, uint32_t i_of_2L1) {
    ColoringBoundTerms t;
    t.coeff_const = static_cast<int64_t>(c) * c + 1;
    // (3/4) i(i-1) + 2 as an exact rational.
    int64_t num = 3 * static_cast<int64_t>(i_of_2L1) * (static_cast<int64_t>(i_of_2L1) - 1) + 8;
    int64_t den = 4;
    int64_t g = std::gcd(num, den);
    t.exp_num = num / g;
    t.exp_den = den / g;
    return t;
}

WindowedBound coloring_bound(uint32_t c, uint64_t L1, uint32_t i_of_2L1, double eta_k,
                             uint32_t R) {
    if (L1 < 1) throw structure_error("coloring bound needs L1 >= 1");
    ColoringBoundTerms t = coloring_bound_terms(c, i_of_2L1);
    double lc = std::log(static_cast<double>(c));
    double power_ln = static_cast<double>(t.exp_num) / static_cast<double>(t.exp_den) * lc;

    WindowedBound wb;
    wb.window_limit = std::floor(static_cast<double>(R) / 2.0);
    wb.window_ok = static_cast<double>(L1) <= wb.window_limit;
    wb.value = static_cast<double>(t.coeff_const) / static_cast<double>(L1) +
               std::exp(power_ln - eta_k);
    return wb;
}

WindowedBound coloring_cor1_bound(uint32_t c, double eta_k, uint32_t R) {
    WindowedBound wb;
    wb.window_limit = std::log(static_cast<double>(R) / 2.0) - 1.0;
    wb.window_ok = eta_k <= wb.window_limit;
    double lc = std::log(static_cast<double>(c));
    double coeff = std::exp(6.5 * lc) + static_cast<double>(c) * c + 1.0;
    wb.value = coeff * std::exp(-eta_k);
    return wb;
}

WindowedBound corollary2_bound(uint32_t c, double eta_k, uint32_t R) {
    if (!(eta_k > 0.0)) throw structure_error("corollary bound needs eta k > 0");
    double lc = std::log(static_cast<double>(c));
    WindowedBound wb;
    wb.window_limit = std::pow(4.0 * R - 4.0, 2.0) * lc;
    wb.window_ok = eta_k <= wb.window_limit;
    double coeff = std::pow(static_cast<double>(c), 8.0) + static_cast<double>(c) * c + 1.0;
    wb.value = 8.0 * coeff * std::sqrt(lc) / std::sqrt(eta_k);
    return wb;
}

WindowedBound grid_bound(double eta_k, uint32_t R) {
    if (!(eta_k > 0.0)) throw structure_error("grid bound needs eta k > 0");
    WindowedBound wb;
    wb.window_limit = 75.0 * static_cast<double>(R) - 149.0;
    wb.window_ok = eta_k <= wb.window_limit;
    wb.value = 2551.0 / eta_k;
    return wb;
}

uint64_t grid_bound_L1(double eta_k) {
    return static_cast<uint64_t>(std::ceil(eta_k / 150.0));
}

WindowedBound ap_bound(uint32_t c, uint32_t s, double eta_k, uint32_t R) {
    WindowedBound wb;
    wb.window_limit = std::log(static_cast<double>(R) / 2.0) - 1.0;
    wb.window_ok = eta_k <= wb.window_limit;
    double lc = std::log(static_cast<double>(c));
    double coeff = std::exp(4.0 * s * lc) + std::exp(static_cast<double>(s) * lc) + 1.0;
    wb.value = coeff * std::exp(-eta_k);
    return wb;
}

} // namespace sieve
