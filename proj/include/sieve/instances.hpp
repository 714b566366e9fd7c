#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sieve/block_system.hpp"
#include "sieve/walk.hpp"

namespace sieve {

enum class PatternKind { monochromatic_triangle, four_cycle, monochromatic_ap };
enum class InstanceMode { strict, permissive };
enum class DensityMode { exact, lower_bound };

// Pure pattern predicate on one block. The site tuples are global site
// indices, all inside the block, so detection reads nothing outside it.
struct PatternDetector {
    PatternKind kind = PatternKind::monochromatic_triangle;
    uint32_t block_label = 0;
    bool enabled = true;          // permissive coloring mode disables i(l) < 3 blocks
    bool zero_is_color = true;    // count residue 0 as a color in monochromatic checks
    std::vector<std::vector<uint32_t>> patterns; // triangles: 3 edges; squares: 4; APs: s cells

    bool matches(const Labeling& f) const;
    // First matching pattern, if any.
    std::optional<std::span<const uint32_t>> find(const Labeling& f) const;
    // Digit-vector variant for exhaustive enumeration: residue_of(site).
    bool matches_digits(std::span<const uint32_t> digits,
                        std::span<const uint32_t> site_to_digit) const;
};

struct Instance {
    BlockSystemPtr system;
    PatternKind kind = PatternKind::monochromatic_triangle;
    std::vector<PatternDetector> detectors;       // one per block, block order
    std::vector<std::vector<uint32_t>> instance_patterns; // patterns anywhere in scope (theorem event)
    bool paper_parameters = true;                 // false if c < 3 or other out-of-range inputs

    const PatternDetector& detector(uint32_t label) const;
    BlockDetector block_detector(uint32_t label) const;
    // Event "the labeling contains no target structure at all".
    bool instance_pattern_free(const Labeling& f) const;
    // A deterministic pattern-free start for walks (identity when already free).
    Labeling theta_free_start() const;
};

enum class ColoringPartition { triples, triangular, custom };

// Edge c-colorings of the complete graph on [t], blocks E_l = edges inside
// I_l. `triples` uses I_l = {3l-2, 3l-1, 3l}; `triangular` uses
// I_l = {l(l+1)/2, ..., l(l+1)/2 + l}. t is the maximum covered index, raised
// to 3R+1 if the partition covers less.
Instance make_coloring_instance(uint32_t R, uint32_t c,
                                ColoringPartition partition = ColoringPartition::triples,
                                InstanceMode mode = InstanceMode::strict,
                                std::span<const std::vector<int32_t>> custom = {});

bool detect_mono_triangle(const Labeling& f, const PatternDetector& d);

struct GridScale {
    // Empty: paper scale, block l = E(D(0,2l+2)) \ E(D(0,2l)), |B_l| = 64l+40.
    // Otherwise R+1 strictly increasing radii r_0 < ... < r_R and block l is
    // E(D(0,r_l)) \ E(D(0,r_{l-1})); every block must contain a unit square.
    std::vector<int32_t> radii;

    static GridScale paper() { return {}; }
    static GridScale reduced(std::vector<int32_t> r) { return {std::move(r)}; }
};

// Spanning subgraphs (c=2) of the grid box; blocks are square annuli.
Instance make_grid_instance(uint32_t R, GridScale scale = GridScale::paper());

bool detect_four_cycle(const Labeling& f, const PatternDetector& d);

// c-colorings of [t(R)] with t(R) = R + q(2s-1) and I_l = {l + q j : 0 <= j <= 2s-1}.
// Requires q >= R so the blocks are pairwise disjoint.
Instance make_ap_instance(uint32_t s, uint32_t q, uint32_t c, uint32_t R,
                          InstanceMode mode = InstanceMode::strict);

bool detect_mono_ap(const Labeling& f, const PatternDetector& d);

// Number of unit-square edge counts helpers used by the grid construction.
int64_t grid_disc_edge_count(int64_t radius);      // 4r(2r+1)
int64_t grid_annulus_edge_count(int64_t ell);      // 64l+40 at paper scale

// |Theta_l| / n_l. Exact mode enumerates all c^{|B_l|} block labelings
// (requires n_l <= cap, default 10^7, parallel over labelings); lower_bound
// mode returns the instance family's guaranteed constant (c^-2, 2^-4, c^-s).
double theta_density(const BlockSystem& bs, const PatternDetector& d, DensityMode mode,
                     Exec exec = Exec::parallel, uint64_t cap = 10'000'000);

// Rebuilds detectors for a block system restored from JSON. The descriptor
// (kind + params) must name one of the three instance families.
Instance instance_from_system(BlockSystemPtr bs);

} // namespace sieve
