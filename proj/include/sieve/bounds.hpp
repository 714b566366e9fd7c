#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sieve/block_system.hpp"

namespace sieve {

// log(1 + e^x) without overflow; carries the magnitude of 1 + X for huge X.
double log1p_exp(double x);
// log(e^a + e^b)
double log_add_exp(double a, double b);

enum class EtaMode { as_stated, proof_faithful };

// Decay constants of the walk's character transforms.
//   nu_minus = 2 p(identity)                      (both modes)
//   nu_plus  = 2 delta / min_s p(s)               (as_stated)
//   nu_plus  = min_s p(s) * delta / (1 + C0)      (proof_faithful)
// eta solves 1 - exp(-eta) = min(nu_minus, nu_plus); no eta exists when that
// minimum reaches 1, which is reported rather than clamped.
struct EtaReport {
    EtaMode mode = EtaMode::proof_faithful;
    double delta = 0.5;
    double c0 = 1.0;
    double nu_minus = 0.0;
    double nu_plus = 0.0;
    double min_nu = 0.0;
    bool valid = false;
    double eta = 0.0;
};

EtaReport compute_eta(const GeneratorSystem& gs, EtaMode mode);
EtaReport compute_eta(double p_identity, double p_min, double delta, double c0, EtaMode mode);

struct SieveParams {
    double delta = 0.5;
    std::vector<double> b_seq; // aligned with window labels ceil(L1)..floor(L2)
    double L1 = 1.0;
    double L2 = 1.0;
    double c0 = 1.0;
    EtaReport eta;
    bool window_ok = true; // Lambda cap [L1,L2] = {ceil L1, ..., floor L2}
};

// Window validity against the instance's label set [1..R].
bool sieve_window_ok(uint32_t index_range, double L1, double L2);

SieveParams make_sieve_params(const GeneratorSystem& gs, double L1, double L2, EtaMode mode);

// The general sieve bound, assembled in log space so that |G_{L2}|^{3/2} and
// exp(-eta k) may individually overflow:
//   sum_l e^{-b_l}  +  (1 + (L2-L1) |G_{L2}|^{3/2} e^{-eta k}) / sum_l theta_l/n_l.
struct BoundReport {
    double term_error_sum_ln = 0.0; // ln sum e^{-b_l}
    double density_sum = 0.0;       // sum theta_l / n_l
    double main_factor_ln = 0.0;    // ln(1 + (L2-L1)|G_{L2}|^{3/2} e^{-eta k})
    double total_unclamped = 0.0;   // may be +inf
    double total = 0.0;             // min(1, total_unclamped)
    bool vacuous = false;           // total_unclamped >= 1
    bool window_ok = true;
    EtaMode mode = EtaMode::proof_faithful;
};

BoundReport sieve_bound(const SieveParams& params, std::span<const double> densities,
                        double ln_group_order_L2, uint64_t k);

// Specialized printed bounds. Each reports its validity window.
struct WindowedBound {
    double value = 0.0;
    bool window_ok = true;
    double window_limit = 0.0; // upper limit on eta*k (or on L1 for the theorem form)
};

// (c^2+1)/L1 + c^{(3/4) i(i-1) + 2} e^{-eta k}, i = i(2 L1). Window: L1 in
// [floor(R/2)].
WindowedBound coloring_bound(uint32_t c, uint64_t L1, uint32_t i_of_2L1, double eta_k,
                             uint32_t R);

// Exact decomposition used for symbolic reconstruction of the corollary
// constant: the bound equals (coeff_const + c^{exp_num/exp_den}) / L1 when
// e^{-eta k} = 1/L1.
struct ColoringBoundTerms {
    int64_t coeff_const = 0; // c^2 + 1
    int64_t exp_num = 0;     // numerator of (3/4) i(i-1) + 2
    int64_t exp_den = 0;
};
ColoringBoundTerms coloring_bound_terms(uint32_t c, uint32_t i_of_2L1);

// (c^{13/2} + c^2 + 1) e^{-eta k}, valid while eta k <= ln(R/2) - 1.
WindowedBound coloring_cor1_bound(uint32_t c, double eta_k, uint32_t R);

// 8 (c^8 + c^2 + 1) sqrt(ln c) / sqrt(eta k), valid while eta k <= (4R-4)^2 ln c.
WindowedBound corollary2_bound(uint32_t c, double eta_k, uint32_t R);

// 2551 / (eta k), valid while eta k <= 75R - 149.
WindowedBound grid_bound(double eta_k, uint32_t R);
// L1 prescription used by the grid theorem's proof.
uint64_t grid_bound_L1(double eta_k);

// (c^{4s} + c^s + 1) e^{-eta k}, valid while eta k <= ln(R/2) - 1.
WindowedBound ap_bound(uint32_t c, uint32_t s, double eta_k, uint32_t R);

} // namespace sieve
