#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sieve/bounds.hpp"
#include "sieve/instances.hpp"
#include "sieve/spectral.hpp"
#include "sieve/stats.hpp"
#include "sieve/walk.hpp"

namespace sieve {

// Flat, fully serializable experiment description. Re-running an archived
// config reproduces byte-identical result files.
struct ExperimentConfig {
    std::string kind = "coloring"; // coloring | grid | ap
    uint32_t R = 2;
    uint32_t c = 3;
    std::string partition = "triples"; // coloring only
    uint32_t s = 2;                    // ap only
    uint32_t q = 0;                    // ap only; 0 means q = R
    std::vector<int32_t> radii;        // grid only; empty means paper scale

    double delta = 0.5;
    std::string b_rule = "ell"; // b_l = l
    uint64_t seed = 1;
    std::vector<uint64_t> ks{1};
    uint64_t trials = 1000;
    double L1 = 1.0;
    double L2 = 0.0; // 0 means R
    EtaMode eta_mode = EtaMode::proof_faithful;
    std::string g0 = "theta-free"; // theta-free | identity | serialized labeling
    std::string out;               // output path stem; empty writes to stdout
    std::string format = "csv";    // csv | json
    int threads = 0;               // 0 keeps the OpenMP default

    static ExperimentConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct ResultRow {
    uint64_t k = 0;
    uint64_t trials = 0;
    double freq = 0.0; // block event: no Theta hit in any window block
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    std::optional<double> exact;        // oracle value when the quotient fits the cap
    std::optional<double> bound_proof;  // proof-faithful eta
    std::optional<double> bound_stated; // as-stated eta
    bool vacuous = true;
    bool window_ok = true;
    double instance_free_freq = 0.0; // no target structure anywhere (theorem event)

    bool operator==(const ResultRow&) const = default;
};

struct AlonRoichmanReport {
    uint64_t trials = 0;
    uint64_t failures = 0; // trials whose Cayley graph missed delta-expansion
    double failure_rate = 0.0;
    double e_minus_b = 0.0;
    // P(X >= failures) under Bin(trials, e^{-b}); near 1 when failures run
    // far below the theorem's allowance.
    double binom_p_upper = 1.0;
    int64_t kappa_used = 0;
};

// Samples kappa(n, b, delta) generators per trial and tests delta-expansion
// exactly on the given group.
AlonRoichmanReport run_alon_roichman(const AbelianGroup& group, double b, double delta,
                                     uint64_t trials, uint64_t seed,
                                     std::optional<int64_t> kappa_override = std::nullopt,
                                     Exec exec = Exec::parallel);

struct ExperimentOutput {
    Instance instance;
    GeneratorSystem generators; // note: rows reference the window blocks only
    EtaReport eta_proof;
    EtaReport eta_stated;
    std::vector<ResultRow> rows;
    bool oracle_skipped = false;
};

ExperimentOutput run_sieve_experiment(const ExperimentConfig& cfg);

// Stable column order:
// k,trials,freq,ci_lo,ci_hi,exact,bound_proof,bound_stated,vacuous,window_ok
void emit_csv(std::span<const ResultRow> rows, std::ostream& os);
void emit_json(std::span<const ResultRow> rows, std::ostream& os);
std::vector<ResultRow> parse_csv(std::istream& is);
std::vector<ResultRow> parse_json(std::istream& is);

// Default output directory for the CLI ($SIEVE_OUT_DIR, falling back to ".").
std::string default_out_dir();

} // namespace sieve
