#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sieve/ground_set.hpp"

namespace sieve {

// Sites per labeling below which c=2 labelings are stored as packed bits.
uint32_t dense_threshold();
void set_dense_threshold(uint32_t sites);

// A distinguished subset of ground-set sites. Blocks of one BlockSystem are
// pairwise disjoint; `sites` is kept sorted.
struct Block {
    uint32_t label = 0;
    std::vector<uint32_t> sites;

    bool contains(uint32_t site) const;
    // Position of `site` within `sites`, if present.
    std::optional<uint32_t> local_index(uint32_t site) const;
};

// Element of (Z/c)^X in canonical sparse form: residues 0 are never stored.
// For c=2 and small ground sets the values live in a packed bit vector and
// addition is a word-level XOR. Labelings are immutable values; every
// operation returns a fresh labeling.
class Labeling {
public:
    Labeling(GroundPtr ground, uint32_t modulus);
    static Labeling from_pairs(GroundPtr ground, uint32_t modulus,
                               std::vector<std::pair<uint32_t, uint32_t>> site_residues);

    uint32_t modulus() const { return c_; }
    const GroundPtr& ground() const { return ground_; }

    uint32_t at(uint32_t site) const;
    bool is_zero() const;
    size_t support_size() const;
    std::vector<uint32_t> support() const;

    Labeling add(const Labeling& g) const;
    Labeling negate() const;
    Labeling restrict_to(const Block& b) const;

    // In-place accumulation; used by the walk inner loop.
    void add_in_place(const Labeling& g);

    bool operator==(const Labeling& o) const;
    bool operator<(const Labeling& o) const; // canonical order, for deduplicated sets

    // Canonical text form `c=<int>; <site>:<residue>,...` with sites in index
    // order. Identical labelings serialize to identical bytes.
    std::string serialize() const;
    static Labeling deserialize(GroundPtr ground, std::string_view text);

    std::vector<std::pair<uint32_t, uint32_t>> pairs() const;

private:
    void check_compatible(const Labeling& o) const;
    void set(uint32_t site, uint32_t residue);

    GroundPtr ground_;
    uint32_t c_ = 2;
    bool dense_ = false;
    std::vector<uint64_t> bits_;                       // dense storage
    std::vector<std::pair<uint32_t, uint32_t>> vals_;  // sparse storage, sorted by site
};

inline Labeling add(const Labeling& f, const Labeling& g) { return f.add(g); }
inline Labeling negate(const Labeling& f) { return f.negate(); }
inline Labeling restrict_to(const Labeling& f, const Block& b) { return f.restrict_to(b); }

} // namespace sieve
