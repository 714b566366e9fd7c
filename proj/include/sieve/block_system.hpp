#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sieve/labeling.hpp"

namespace sieve {

enum class DeltaPolicy { strict, permissive };
enum class StepWeighting { uniform_distinct, multiset };

// Quotient structure: pairwise-disjoint blocks B_l of a common ground set.
// The quotient at block l is (Z/c)^{B_l}; its index is c^{|B_l|}.
struct BlockSystem {
    GroundPtr ground;
    uint32_t modulus = 2;
    std::vector<Block> blocks; // labels 1..index_range, stored in label order
    uint32_t index_range = 0;  // R

    // Instance descriptor used for serialization ("coloring", "grid", "ap",
    // "custom") plus its integer parameters.
    std::string kind = "custom";
    std::map<std::string, int64_t> params;

    const Block& block(uint32_t label) const;
    double ln_quotient_index(uint32_t label) const; // |B_l| * ln c
    // c^{|B_l|}; throws capacity_error if it does not fit in 64 bits.
    uint64_t quotient_index(uint32_t label) const;

    void validate() const; // disjointness, site ranges, label ordering
};

using BlockSystemPtr = std::shared_ptr<const BlockSystem>;

BlockSystemPtr make_block_system(GroundPtr ground, uint32_t modulus,
                                 std::vector<std::vector<uint32_t>> block_sites,
                                 std::string kind = "custom",
                                 std::map<std::string, int64_t> params = {});

// Generator count that makes a random Cayley graph on a quotient of index
// e^{ln_index} a delta-expander except with probability < e^{-b}:
//   ceil( 2 / ((2-d)ln(2-d) + d ln d) * (ln_index + b + ln 2) ).
// Evaluated in extended precision before the ceiling.
int64_t kappa_from_log(double ln_index, double b, double delta,
                       DeltaPolicy policy = DeltaPolicy::strict);
int64_t kappa(uint64_t quotient_index, double b, double delta,
              DeltaPolicy policy = DeltaPolicy::strict);
// Index c^{num_sites} without forming the power.
int64_t kappa_power(uint32_t c, uint64_t num_sites, double b, double delta,
                    DeltaPolicy policy = DeltaPolicy::strict);

// `count` independent uniform draws from the quotient at block `ell`,
// returned as canonical lifts (support inside the block). Draw i uses the
// stream derived from (seed, ell, i), so identical seeds give identical
// output and blocks can be sampled concurrently.
std::vector<Labeling> sample_generators(const BlockSystem& bs, uint32_t ell,
                                        int64_t count, uint64_t seed);

// Per-block sampled generators with their symmetrized lifted sets, the global
// step set S = {identity} u union of lifted sets, and the step distribution.
struct GeneratorSystem {
    BlockSystemPtr system;
    double delta = 0.5;
    bool delta_supported = true; // false when permissive mode admitted delta > 1/2
    std::vector<double> b_seq;
    std::vector<int64_t> kappa_seq;
    std::vector<std::vector<Labeling>> samples;    // raw draws, possibly repeated
    std::vector<std::vector<Labeling>> block_sets; // deduplicated symmetrized lifts per block
    std::vector<Labeling> steps;                   // S; identity first, then canonical order
    std::vector<double> step_prob;                 // p_s, symmetric, sums to 1
    StepWeighting weighting = StepWeighting::uniform_distinct;
    double c0 = 1.0;
    uint64_t seed = 0;

    size_t identity_pos() const { return 0; }
    double p_identity() const { return step_prob[0]; }
    double p_min() const;
};

GeneratorSystem build_generator_system(BlockSystemPtr bs, double delta,
                                       std::vector<double> b_seq, uint64_t seed,
                                       StepWeighting weighting = StepWeighting::uniform_distinct,
                                       DeltaPolicy policy = DeltaPolicy::strict);

// Derived generator system with the same samples but a replaced step set;
// used by tests that perturb lifts.
GeneratorSystem with_replaced_step(const GeneratorSystem& gs, size_t step_index,
                                   Labeling replacement);

// True iff the product of the two quotient maps is surjective, confirmed by
// constructing a preimage for every pair of quotient elements. Throws
// capacity_error when n_l * n_l' exceeds `cap`; disjointness of the blocks
// already guarantees surjectivity in that regime.
bool verify_linear_disjointness(const BlockSystem& bs, uint32_t ell, uint32_t ell_prime,
                                uint64_t cap = uint64_t{1} << 24);

// True iff projecting S to block `ell` yields exactly the block's symmetrized
// generator set plus the identity.
bool verify_nice_lifting(const GeneratorSystem& gs, uint32_t ell);

struct NiceImageResult {
    bool ok = false;
    std::optional<Labeling> witness_x0, witness_y0; // canonical quotient representatives
    std::string failure;                            // offending element, when !ok
};

// Checks the cross-shaped inclusion of the projected step set in the pair
// quotient, with the identity pair as witness.
NiceImageResult verify_nice_image(const GeneratorSystem& gs, uint32_t ell, uint32_t ell_prime);

// Versioned JSON round-trip; dumps are byte-stable for identical inputs.
nlohmann::json generator_system_to_json(const GeneratorSystem& gs);
GeneratorSystem generator_system_from_json(const nlohmann::json& doc);
nlohmann::json block_system_to_json(const BlockSystem& bs);
BlockSystemPtr block_system_from_json(const nlohmann::json& doc);

} // namespace sieve
