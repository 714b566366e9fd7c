#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sieve/abelian.hpp"
#include "sieve/block_system.hpp"

namespace sieve {

// Random walk X_{k+1} = X_k + xi_{k+1} on the labeling group, with steps
// drawn from the generator system's step set under its symmetric
// distribution. Trials are reproducible: trial t consumes the stream derived
// from (seed, t) regardless of how trials are scheduled.
struct WalkConfig {
    std::shared_ptr<const GeneratorSystem> steps;
    Labeling start;
    uint64_t seed = 0;

    WalkConfig(std::shared_ptr<const GeneratorSystem> gs, Labeling g0, uint64_t seed_);
};

const Labeling& sample_step(const GeneratorSystem& gs, class RngStream& rng);

Labeling walk(const WalkConfig& cfg, uint64_t k, uint64_t trial = 0);

// Product quotient over a subset of blocks: Q = prod_{l in labels} G_l.
// Digit i of a state is the residue at sites[i].
struct QuotientSpace {
    BlockSystemPtr system;
    std::vector<uint32_t> labels;
    std::vector<uint32_t> sites;    // concatenated block sites, block order
    std::vector<size_t> offsets;    // digit offset of each block, plus a final end marker
    AbelianGroup group;

    uint64_t project(const Labeling& f) const;
    // Canonical representative of a state: the labeling equal to the state's
    // digits on `sites` and 0 elsewhere.
    Labeling lift(uint64_t state) const;
};

QuotientSpace make_quotient(BlockSystemPtr system, std::span<const uint32_t> labels,
                            uint64_t cap = uint64_t{1} << 20);

// Character of a quotient space, indexed within the space's group; evaluates
// chi(f) = exp(2*pi*i * sum_e a_e f(e) / c) on whole labelings.
struct Character {
    const QuotientSpace* space = nullptr;
    uint64_t index = 0;

    uint32_t frequency(uint32_t global_site) const;
    std::complex<double> eval(const Labeling& f) const;
};

// Step transform M_chi = sum_s p_s chi(rho(s)). Real up to rounding because
// the step distribution is symmetric.
std::complex<double> character_transform(const GeneratorSystem& gs, const QuotientSpace& q,
                                         uint64_t chi);

// All step transforms at once: one projection pass plus one DFT.
std::vector<std::complex<double>> character_transforms(const GeneratorSystem& gs,
                                                       const QuotientSpace& q,
                                                       Exec exec = Exec::parallel);

// E(chi(X_k)) = chi(g0) * M_chi^k, exactly.
std::complex<double> exact_moment(const WalkConfig& cfg, const QuotientSpace& q,
                                  uint64_t chi, uint64_t k);

// Distribution of the projected walk at time k by Fourier inversion:
//   Pr(rho(X_k) = x) = |Q|^{-1} sum_chi conj(chi(x)) chi(rho(g0)) M_chi^k.
std::vector<double> exact_block_distribution(const WalkConfig& cfg, const QuotientSpace& q,
                                             uint64_t k, Exec exec = Exec::parallel);

// Detector on one block: true iff the restriction of the labeling to the
// block contains the target pattern.
using BlockDetector = std::function<bool(const Labeling&, const Block&)>;

// P(forall l in Q.labels : rho_l(X_k) not in Theta_l), summed from the exact
// distribution. This is the quantity the sieve bounds from above.
double exact_survival_probability(const WalkConfig& cfg, const QuotientSpace& q,
                                  std::span<const BlockDetector> detectors, uint64_t k,
                                  Exec exec = Exec::parallel);

// Per-block membership table Theta_l over the block quotient, enumerated once
// through the detector.
std::vector<std::vector<char>> theta_tables(const QuotientSpace& q,
                                            std::span<const BlockDetector> detectors);

struct SurvivalCounts {
    std::vector<uint64_t> ks;
    std::vector<uint64_t> surviving;      // block event: no Theta hit in any inspected block
    std::vector<uint64_t> instance_free;  // optional stronger event (see harness)
    uint64_t trials = 0;
};

// Monte Carlo survival frequencies at the requested times. `instance_event`,
// when set, is evaluated on the whole labeling (not per block). Trials run in
// parallel; counts are identical for any thread count.
SurvivalCounts mc_survival(const WalkConfig& cfg, const QuotientSpace& q,
                           std::span<const BlockDetector> detectors,
                           std::span<const uint64_t> ks, uint64_t trials,
                           const std::function<bool(const Labeling&)>& instance_event = nullptr,
                           Exec exec = Exec::parallel);

} // namespace sieve
