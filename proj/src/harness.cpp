#include "sieve/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <omp.h>

#include <nlohmann/json.hpp>

#include "sieve/errors.hpp"
#include "sieve/rng.hpp"

namespace sieve {

namespace {

constexpr uint64_t kAlonRoichmanTag = 0x414c4f4e;

// Shortest-roundtrip precision so CSV and JSON emissions parse back to the
// same row set.
std::string fmt_double(double v) {
    char buf[40];
    snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

EtaMode eta_mode_from_string(const std::string& s) {
    if (s == "as-stated") return EtaMode::as_stated;
    if (s == "proof-faithful") return EtaMode::proof_faithful;
    throw structure_error("unknown eta mode '" + s + "'");
}

std::string eta_mode_to_string(EtaMode m) {
    return m == EtaMode::as_stated ? "as-stated" : "proof-faithful";
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
    ExperimentConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("kind", cfg.kind);
    get("R", cfg.R);
    get("c", cfg.c);
    get("partition", cfg.partition);
    get("s", cfg.s);
    get("q", cfg.q);
    get("radii", cfg.radii);
    get("delta", cfg.delta);
    get("b_rule", cfg.b_rule);
    get("seed", cfg.seed);
    get("k", cfg.ks);
    get("trials", cfg.trials);
    get("L1", cfg.L1);
    get("L2", cfg.L2);
    if (doc.contains("eta_mode")) cfg.eta_mode = eta_mode_from_string(doc.at("eta_mode"));
    get("g0", cfg.g0);
    get("out", cfg.out);
    get("format", cfg.format);
    get("threads", cfg.threads);
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json doc;
    doc["kind"] = kind;
    doc["R"] = R;
    doc["c"] = c;
    doc["partition"] = partition;
    doc["s"] = s;
    doc["q"] = q;
    doc["radii"] = radii;
    doc["delta"] = delta;
    doc["b_rule"] = b_rule;
    doc["seed"] = seed;
    doc["k"] = ks;
    doc["trials"] = trials;
    doc["L1"] = L1;
    doc["L2"] = L2;
    doc["eta_mode"] = eta_mode_to_string(eta_mode);
    doc["g0"] = g0;
    doc["out"] = out;
    doc["format"] = format;
    doc["threads"] = threads;
    return doc;
}

AlonRoichmanReport run_alon_roichman(const AbelianGroup& group, double b, double delta,
                                     uint64_t trials, uint64_t seed,
                                     std::optional<int64_t> kappa_override, Exec exec) {
    AlonRoichmanReport rep;
    rep.trials = trials;
    rep.e_minus_b = std::exp(-b);
    rep.kappa_used = kappa_override ? *kappa_override : kappa(group.order(), b, delta);

    uint64_t failures = 0;
    const int64_t n = static_cast<int64_t>(trials);
#pragma omp parallel for schedule(static) reduction(+ : failures) if (exec == Exec::parallel)
    for (int64_t trial = 0; trial < n; ++trial) {
        RngStream rng = RngStream::derive(seed, {kAlonRoichmanTag, static_cast<uint64_t>(trial)});
        std::vector<uint64_t> gens(static_cast<size_t>(rep.kappa_used));
        for (auto& g : gens) g = rng.next_below(group.order());
        SpectrumReport sr = cayley_spectrum(group, gens, LoopConvention::half_weight, Exec::serial);
        if (!is_delta_expander(sr, delta)) ++failures;
    }
    rep.failures = failures;
    rep.failure_rate = trials ? static_cast<double>(failures) / static_cast<double>(trials) : 0.0;
    rep.binom_p_upper = binomial_upper_tail(failures, trials, rep.e_minus_b);
    return rep;
}

namespace {

Instance build_instance(const ExperimentConfig& cfg) {
    if (cfg.kind == "coloring") {
        ColoringPartition p = ColoringPartition::triples;
        if (cfg.partition == "triangular") p = ColoringPartition::triangular;
        else if (cfg.partition != "triples")
            throw structure_error("experiment partition must be triples or triangular");
        return make_coloring_instance(cfg.R, cfg.c, p, InstanceMode::permissive);
    }
    if (cfg.kind == "grid") {
        GridScale scale;
        scale.radii = cfg.radii;
        return make_grid_instance(cfg.R, scale);
    }
    if (cfg.kind == "ap") {
        uint32_t q = cfg.q == 0 ? cfg.R : cfg.q;
        return make_ap_instance(cfg.s, q, cfg.c, cfg.R, InstanceMode::permissive);
    }
    throw structure_error("unknown instance kind '" + cfg.kind + "'");
}

Labeling resolve_start(const Instance& inst, const std::string& g0) {
    if (g0 == "identity") return Labeling(inst.system->ground, inst.system->modulus);
    if (g0 == "theta-free") return inst.theta_free_start();
    return Labeling::deserialize(inst.system->ground, g0);
}

} // namespace

ExperimentOutput run_sieve_experiment(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    ExperimentOutput out;
    out.instance = build_instance(cfg);
    const BlockSystemPtr& bs = out.instance.system;

    std::vector<double> b_seq;
    if (cfg.b_rule != "ell") throw structure_error("unknown b rule '" + cfg.b_rule + "'");
    out.generators = build_generator_system(bs, cfg.delta, b_seq, cfg.seed,
                                            StepWeighting::uniform_distinct,
                                            DeltaPolicy::permissive);
    auto gs = std::make_shared<const GeneratorSystem>(out.generators);

    out.eta_proof = compute_eta(*gs, EtaMode::proof_faithful);
    out.eta_stated = compute_eta(*gs, EtaMode::as_stated);

    const double L1 = cfg.L1;
    const double L2 = cfg.L2 == 0.0 ? static_cast<double>(bs->index_range) : cfg.L2;
    const bool window_ok = sieve_window_ok(bs->index_range, L1, L2);

    std::vector<uint32_t> window_labels;
    for (int64_t l = static_cast<int64_t>(std::ceil(L1));
         l <= static_cast<int64_t>(std::floor(L2)); ++l)
        window_labels.push_back(static_cast<uint32_t>(l));
    if (window_labels.empty()) throw structure_error("empty sieve window");

    std::vector<BlockDetector> detectors;
    std::vector<double> densities;
    for (uint32_t l : window_labels) {
        detectors.push_back(out.instance.block_detector(l));
        densities.push_back(
            theta_density(*bs, out.instance.detector(l), DensityMode::lower_bound));
    }

    WalkConfig wcfg(gs, resolve_start(out.instance, cfg.g0), cfg.seed);

    std::optional<QuotientSpace> quotient;
    try {
        quotient = make_quotient(bs, window_labels);
    } catch (const capacity_error&) {
        out.oracle_skipped = true;
    }

    std::function<bool(const Labeling&)> instance_event;
    if (!out.instance.instance_patterns.empty()) {
        const Instance* inst = &out.instance;
        instance_event = [inst](const Labeling& f) { return inst->instance_pattern_free(f); };
    }

    QuotientSpace mc_space = quotient ? *quotient : [&] {
        QuotientSpace q;
        q.system = bs;
        q.labels = window_labels;
        return q;
    }();
    SurvivalCounts counts =
        mc_survival(wcfg, mc_space, detectors, cfg.ks, cfg.trials, instance_event);

    const double ln_G_L2 = bs->ln_quotient_index(window_labels.back());
    SieveParams params_proof = make_sieve_params(*gs, L1, L2, EtaMode::proof_faithful);
    SieveParams params_stated = make_sieve_params(*gs, L1, L2, EtaMode::as_stated);

    for (size_t i = 0; i < counts.ks.size(); ++i) {
        ResultRow row;
        row.k = counts.ks[i];
        row.trials = counts.trials;
        row.freq = static_cast<double>(counts.surviving[i]) / static_cast<double>(counts.trials);
        WilsonInterval ci = wilson_ci(counts.surviving[i], counts.trials);
        row.ci_lo = ci.lo;
        row.ci_hi = ci.hi;
        row.window_ok = window_ok;
        row.instance_free_freq =
            static_cast<double>(counts.instance_free[i]) / static_cast<double>(counts.trials);

        if (quotient)
            row.exact = exact_survival_probability(wcfg, *quotient, detectors, row.k);

        if (params_proof.eta.valid) {
            BoundReport br = sieve_bound(params_proof, densities, ln_G_L2, row.k);
            row.bound_proof = br.total_unclamped;
            row.vacuous = br.vacuous;
        }
        if (params_stated.eta.valid) {
            BoundReport br = sieve_bound(params_stated, densities, ln_G_L2, row.k);
            row.bound_stated = br.total_unclamped;
            if (!params_proof.eta.valid) row.vacuous = br.vacuous;
        }
        out.rows.push_back(row);
    }
    return out;
}

void emit_csv(std::span<const ResultRow> rows, std::ostream& os) {
    os << "k,trials,freq,ci_lo,ci_hi,exact,bound_proof,bound_stated,vacuous,window_ok\n";
    for (const ResultRow& r : rows) {
        os << r.k << ',' << r.trials << ',' << fmt_double(r.freq) << ',' << fmt_double(r.ci_lo)
           << ',' << fmt_double(r.ci_hi) << ',';
        if (r.exact) os << fmt_double(*r.exact);
        os << ',';
        if (r.bound_proof) os << fmt_double(*r.bound_proof);
        os << ',';
        if (r.bound_stated) os << fmt_double(*r.bound_stated);
        os << ',' << (r.vacuous ? 1 : 0) << ',' << (r.window_ok ? 1 : 0) << '\n';
    }
}

void emit_json(std::span<const ResultRow> rows, std::ostream& os) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ResultRow& r : rows) {
        nlohmann::json row;
        row["k"] = r.k;
        row["trials"] = r.trials;
        row["freq"] = r.freq;
        row["ci_lo"] = r.ci_lo;
        row["ci_hi"] = r.ci_hi;
        row["exact"] = r.exact ? nlohmann::json(*r.exact) : nlohmann::json();
        row["bound_proof"] = r.bound_proof ? nlohmann::json(*r.bound_proof) : nlohmann::json();
        row["bound_stated"] = r.bound_stated ? nlohmann::json(*r.bound_stated) : nlohmann::json();
        row["vacuous"] = r.vacuous;
        row["window_ok"] = r.window_ok;
        arr.push_back(std::move(row));
    }
    os << arr.dump(2) << '\n';
}

namespace {

std::optional<double> parse_opt(const std::string& field) {
    if (field.empty()) return std::nullopt;
    return std::stod(field);
}

} // namespace

std::vector<ResultRow> parse_csv(std::istream& is) {
    std::vector<ResultRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        while (fields.size() < 10) fields.push_back("");
        ResultRow r;
        r.k = std::stoull(fields[0]);
        r.trials = std::stoull(fields[1]);
        r.freq = std::stod(fields[2]);
        r.ci_lo = std::stod(fields[3]);
        r.ci_hi = std::stod(fields[4]);
        r.exact = parse_opt(fields[5]);
        r.bound_proof = parse_opt(fields[6]);
        r.bound_stated = parse_opt(fields[7]);
        r.vacuous = fields[8] == "1";
        r.window_ok = fields[9] == "1";
        rows.push_back(r);
    }
    return rows;
}

std::vector<ResultRow> parse_json(std::istream& is) {
    nlohmann::json arr = nlohmann::json::parse(is);
    std::vector<ResultRow> rows;
    for (auto& row : arr) {
        ResultRow r;
        r.k = row.at("k").get<uint64_t>();
        r.trials = row.at("trials").get<uint64_t>();
        r.freq = row.at("freq").get<double>();
        r.ci_lo = row.at("ci_lo").get<double>();
        r.ci_hi = row.at("ci_hi").get<double>();
        if (!row.at("exact").is_null()) r.exact = row.at("exact").get<double>();
        if (!row.at("bound_proof").is_null()) r.bound_proof = row.at("bound_proof").get<double>();
        if (!row.at("bound_stated").is_null())
            r.bound_stated = row.at("bound_stated").get<double>();
        r.vacuous = row.at("vacuous").get<bool>();
        r.window_ok = row.at("window_ok").get<bool>();
        rows.push_back(r);
    }
    return rows;
}

std::string default_out_dir() {
    const char* env = std::getenv("SIEVE_OUT_DIR");
    return env ? env : ".";
}

} // namespace sieve
