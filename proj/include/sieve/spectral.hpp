#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sieve/abelian.hpp"

namespace sieve {

// Loop bookkeeping when the identity belongs to the generator set:
//   half_weight: a loop adds 2 to the degree and 1 to the eigenvalue numerator
//                (the convention the add-identity eigenvalue relation uses);
//   full_weight: a loop adds 2 to both.
enum class LoopConvention { half_weight, full_weight };

enum class GapConvention { paper, strict };

struct SpectrumReport {
    AbelianGroup group;
    std::vector<double> eigenvalues; // indexed by character index; entry 0 is the trivial character
    double trivial_eigenvalue = 1.0;
    // 1 - max{|l| : chi nontrivial, l != -1}; the -1 branch of a bipartite
    // graph is excluded. A disconnected graph has a nontrivial eigenvalue 1,
    // which forces the gap to 0.
    double paper_gap = 1.0;
    // 1 - max{|l| : chi nontrivial}, no exclusion.
    double strict_gap = 1.0;
    bool bipartite = false;
    bool connected = true;
    double max_imag = 0.0;   // residual imaginary mass; symmetric sets keep this at ~0
    size_t sstar_size = 0;   // |S*| excluding the loop
    bool has_loop = false;

    double gap(GapConvention gc) const {
        return gc == GapConvention::paper ? paper_gap : strict_gap;
    }
};

// Exact eigenvalues of the Cayley graph X(G,S) via character sums.
// `generators` may repeat and may include the identity (handled by the loop
// convention); the edge set is S u S^{-1} with set semantics. Parallel over
// characters; identical output for any thread count.
SpectrumReport cayley_spectrum(const AbelianGroup& g, std::span<const uint64_t> generators,
                               LoopConvention lc = LoopConvention::half_weight,
                               Exec exec = Exec::parallel,
                               uint64_t char_cap = uint64_t{1} << 24);

// strict_delta rejects delta outside (0, 1/2] as a parameter error; false
// tolerates delta in (0, 1), matching the permissive instance mode.
bool is_delta_expander(const SpectrumReport& report, double delta,
                       GapConvention gc = GapConvention::paper,
                       bool strict_delta = true);

struct ProductGraph {
    AbelianGroup group;               // G x H
    std::vector<uint64_t> edge_set;   // Y = (S x {y0}) u ({x0} x T), deduplicated
    double gamma = 1.0;               // max(|S*|/|T*|, |T*|/|S*|)
};

// Cayley graph on G x H with the cross-shaped edge set of the product
// construction. Requires x0^2 = 1 = y0^2.
ProductGraph product_cayley(const AbelianGroup& g, std::span<const uint64_t> s,
                            const AbelianGroup& h, std::span<const uint64_t> t,
                            uint64_t x0, uint64_t y0);

struct AddIdentityCheck {
    SpectrumReport base;      // X(G,S), identity not in S
    SpectrumReport with_id;   // X(G,S u {1}) under the half-weight loop convention
    double max_relation_error = 0.0; // max |l' - (l + (1-2l)/(2+|S*|))|
    // One-sided preservation: if every nontrivial signed eigenvalue of the
    // base graph is <= 1-delta, the same holds after adjoining the identity.
    bool preserves(double delta) const;
};

AddIdentityCheck add_identity_check(const AbelianGroup& g, std::span<const uint64_t> s);

struct Ratio {
    int64_t num = 0;
    int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Exact edge expansion h(X) = min over subsets A, 1 <= |A| <= |G|/2, of
// |boundary(A)| / |A|. Brute force; |G| <= 20.
Ratio edge_expansion(const AbelianGroup& g, std::span<const uint64_t> generators);

// Dense normalized adjacency spectrum via a symmetric eigensolver; sorted
// ascending. Independent oracle for cayley_spectrum. |G| <= 4096.
std::vector<double> matrix_spectrum_oracle(const AbelianGroup& g,
                                           std::span<const uint64_t> generators,
                                           LoopConvention lc = LoopConvention::half_weight,
                                           uint64_t cap = 4096);

} // namespace sieve
