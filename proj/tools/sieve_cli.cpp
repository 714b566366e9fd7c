#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sieve/errors.hpp"
#include "sieve/harness.hpp"
#include "sieve/rng.hpp"

namespace {

using namespace sieve;

std::unique_ptr<std::ostream> open_out(const std::string& path, std::ostream*& os) {
    if (path.empty()) {
        os = &std::cout;
        return nullptr;
    }
    auto file = std::make_unique<std::ofstream>(path);
    if (!*file) throw structure_error("cannot open output file: " + path);
    os = file.get();
    return file;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw structure_error("cannot open input file: " + path);
    return nlohmann::json::parse(in);
}

Instance load_instance(const nlohmann::json& doc, GeneratorSystem& gs) {
    gs = generator_system_from_json(doc);
    return instance_from_system(gs.system);
}

std::vector<uint32_t> parse_orders(const std::string& text) {
    std::vector<uint32_t> orders;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) orders.push_back(std::stoul(item));
    return orders;
}

int cmd_instance(const std::string& kind, uint32_t R, uint32_t c, const std::string& partition,
                 uint32_t s, uint32_t q, double delta, uint64_t seed, bool system_only,
                 const std::string& out_path) {
    Instance inst;
    if (kind == "coloring")
        inst = make_coloring_instance(R, c,
                                      partition == "triangular" ? ColoringPartition::triangular
                                                                : ColoringPartition::triples,
                                      InstanceMode::permissive);
    else if (kind == "grid")
        inst = make_grid_instance(R);
    else if (kind == "ap")
        inst = make_ap_instance(s, q == 0 ? R : q, c, R, InstanceMode::permissive);
    else
        throw structure_error("unknown instance kind '" + kind + "'");

    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);
    if (system_only) {
        *os << block_system_to_json(*inst.system).dump(2) << '\n';
    } else {
        GeneratorSystem gs = build_generator_system(inst.system, delta, {}, seed,
                                                    StepWeighting::uniform_distinct,
                                                    DeltaPolicy::permissive);
        *os << generator_system_to_json(gs).dump(2) << '\n';
    }
    return 0;
}

int cmd_spectrum(const std::string& in_path, uint32_t block, const std::string& out_path) {
    GeneratorSystem gs;
    Instance inst = load_instance(load_json(in_path), gs);
    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);

    *os << "block,character,lambda,abs_lambda\n";
    std::vector<uint32_t> labels;
    if (block != 0)
        labels.push_back(block);
    else
        for (const Block& b : inst.system->blocks) labels.push_back(b.label);

    for (uint32_t l : labels) {
        std::vector<uint32_t> one{l};
        QuotientSpace q = make_quotient(inst.system, one);
        std::vector<uint64_t> gens;
        for (const Labeling& g : gs.block_sets[l - 1]) gens.push_back(q.project(g));
        SpectrumReport rep = cayley_spectrum(q.group, gens);
        for (uint64_t chi = 0; chi < rep.group.order(); ++chi) {
            char buf[96];
            snprintf(buf, sizeof(buf), "%u,%llu,%.12g,%.12g\n", l,
                     static_cast<unsigned long long>(chi), rep.eigenvalues[chi],
                     std::abs(rep.eigenvalues[chi]));
            *os << buf;
        }
        char buf[160];
        snprintf(buf, sizeof(buf), "# block=%u paperGap=%.12g strictGap=%.12g bipartite=%d connected=%d\n",
                 l, rep.paper_gap, rep.strict_gap, rep.bipartite ? 1 : 0, rep.connected ? 1 : 0);
        *os << buf;
    }
    return 0;
}

int cmd_density(const std::string& in_path, const std::string& mode_text,
                const std::string& out_path) {
    GeneratorSystem gs;
    Instance inst = load_instance(load_json(in_path), gs);
    DensityMode mode = mode_text == "exact" ? DensityMode::exact : DensityMode::lower_bound;
    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);
    *os << "l,density,mode\n";
    for (const Block& b : inst.system->blocks) {
        double d = theta_density(*inst.system, inst.detector(b.label), mode);
        char buf[96];
        snprintf(buf, sizeof(buf), "%u,%.12g,%s\n", b.label, d, mode_text.c_str());
        *os << buf;
    }
    return 0;
}

int cmd_bound(const std::string& family, const std::string& in_path, uint32_t c, uint32_t s,
              uint32_t R, uint64_t L1, uint32_t i_of_2L1, const std::string& eta_mode,
              std::vector<uint64_t> ks, const std::string& out_path) {
    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);
    *os << "k,mode,term1,term2,term3,total,vacuous,window_ok\n";

    auto emit_simple = [&](uint64_t k, const WindowedBound& wb) {
        char buf[160];
        snprintf(buf, sizeof(buf), "%llu,%s,,,,%.12g,%d,%d\n",
                 static_cast<unsigned long long>(k), family.c_str(), wb.value,
                 wb.value >= 1.0 ? 1 : 0, wb.window_ok ? 1 : 0);
        *os << buf;
    };

    if (family == "sieve") {
        GeneratorSystem gs;
        Instance inst = load_instance(load_json(in_path), gs);
        EtaMode mode = eta_mode == "as-stated" ? EtaMode::as_stated : EtaMode::proof_faithful;
        double L2 = 2.0 * static_cast<double>(L1);
        SieveParams params = make_sieve_params(gs, static_cast<double>(L1), L2, mode);
        std::vector<double> densities;
        for (int64_t l = static_cast<int64_t>(L1); l <= static_cast<int64_t>(L2); ++l)
            densities.push_back(theta_density(*inst.system,
                                              inst.detector(static_cast<uint32_t>(l)),
                                              DensityMode::lower_bound));
        double lnG = inst.system->ln_quotient_index(static_cast<uint32_t>(L2));
        for (uint64_t k : ks) {
            BoundReport br = sieve_bound(params, densities, lnG, k);
            char buf[200];
            snprintf(buf, sizeof(buf), "%llu,%s,%.12g,%.12g,%.12g,%.12g,%d,%d\n",
                     static_cast<unsigned long long>(k), eta_mode.c_str(), br.term_error_sum_ln,
                     br.density_sum, br.main_factor_ln, br.total, br.vacuous ? 1 : 0,
                     br.window_ok ? 1 : 0);
            *os << buf;
        }
        return 0;
    }

    // Closed-form theorem bounds: eta*k is taken as k * eta with eta from the
    // generator system if given, else k alone is treated as eta*k.
    double eta = 1.0;
    if (!in_path.empty()) {
        GeneratorSystem gs;
        load_instance(load_json(in_path), gs);
        EtaMode mode = eta_mode == "as-stated" ? EtaMode::as_stated : EtaMode::proof_faithful;
        EtaReport er = compute_eta(gs, mode);
        if (!er.valid) throw invariant_error("no valid eta for this generator system");
        eta = er.eta;
    }
    for (uint64_t k : ks) {
        double eta_k = eta * static_cast<double>(k);
        if (family == "coloring")
            emit_simple(k, coloring_bound(c, L1, i_of_2L1, eta_k, R));
        else if (family == "cor1")
            emit_simple(k, coloring_cor1_bound(c, eta_k, R));
        else if (family == "cor2")
            emit_simple(k, corollary2_bound(c, eta_k, R));
        else if (family == "grid")
            emit_simple(k, grid_bound(eta_k, R));
        else if (family == "ap")
            emit_simple(k, ap_bound(c, s, eta_k, R));
        else
            throw structure_error("unknown bound family '" + family + "'");
    }
    return 0;
}

int cmd_walk(const std::string& in_path, const std::string& g0, std::vector<uint64_t> ks,
             uint64_t trials, uint64_t seed, bool aggregate, const std::string& out_path) {
    GeneratorSystem gs;
    Instance inst = load_instance(load_json(in_path), gs);
    auto gsp = std::make_shared<const GeneratorSystem>(gs);

    Labeling start = g0 == "identity" ? Labeling(inst.system->ground, inst.system->modulus)
                     : g0 == "theta-free" ? inst.theta_free_start()
                                          : Labeling::deserialize(inst.system->ground, g0);
    WalkConfig cfg(gsp, start, seed);

    std::vector<uint32_t> labels;
    std::vector<BlockDetector> detectors;
    for (const Block& b : inst.system->blocks) {
        labels.push_back(b.label);
        detectors.push_back(inst.block_detector(b.label));
    }

    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);

    if (aggregate) {
        QuotientSpace q;
        q.system = inst.system;
        q.labels = labels;
        SurvivalCounts counts = mc_survival(cfg, q, detectors, ks, trials);
        *os << "k,freq,ci_lo,ci_hi\n";
        for (size_t i = 0; i < counts.ks.size(); ++i) {
            WilsonInterval ci = wilson_ci(counts.surviving[i], counts.trials);
            char buf[128];
            snprintf(buf, sizeof(buf), "%llu,%.12g,%.12g,%.12g\n",
                     static_cast<unsigned long long>(counts.ks[i]),
                     static_cast<double>(counts.surviving[i]) / static_cast<double>(counts.trials),
                     ci.lo, ci.hi);
            *os << buf;
        }
        return 0;
    }

    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    *os << "k,trial";
    for (uint32_t l : labels) *os << ",block_" << l;
    *os << '\n';
    for (uint64_t trial = 0; trial < trials; ++trial) {
        for (uint64_t k : ks) {
            Labeling x = walk(cfg, k, trial);
            *os << k << ',' << trial;
            for (size_t i = 0; i < labels.size(); ++i)
                *os << ',' << (detectors[i](x, inst.system->block(labels[i])) ? 1 : 0);
            *os << '\n';
        }
    }
    return 0;
}

int cmd_alon_roichman(const std::string& orders_text, double b, double delta, uint64_t trials,
                      uint64_t seed, int64_t kappa_override, const std::string& out_path) {
    AbelianGroup group(parse_orders(orders_text));
    std::optional<int64_t> kappa_opt;
    if (kappa_override > 0) kappa_opt = kappa_override;
    AlonRoichmanReport rep = run_alon_roichman(group, b, delta, trials, seed, kappa_opt);
    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);
    *os << "trials,failures,failure_rate,e_minus_b,binom_p_upper,kappa\n";
    char buf[160];
    snprintf(buf, sizeof(buf), "%llu,%llu,%.12g,%.12g,%.12g,%lld\n",
             static_cast<unsigned long long>(rep.trials),
             static_cast<unsigned long long>(rep.failures), rep.failure_rate, rep.e_minus_b,
             rep.binom_p_upper, static_cast<long long>(rep.kappa_used));
    *os << buf;
    return 0;
}

int cmd_experiment(const std::string& config_path, const nlohmann::json& overrides) {
    nlohmann::json doc = config_path.empty() ? nlohmann::json::object() : load_json(config_path);
    for (auto& [key, value] : overrides.items()) doc[key] = value;
    ExperimentConfig cfg = ExperimentConfig::from_json(doc);

    ExperimentOutput out = run_sieve_experiment(cfg);

    std::string path = cfg.out;
    if (!path.empty() && path.find('/') == std::string::npos)
        path = default_out_dir() + "/" + path;
    std::ostream* os = nullptr;
    auto file = open_out(path, os);
    if (cfg.format == "json")
        emit_json(out.rows, *os);
    else
        emit_csv(out.rows, *os);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-walk sieve on labeling groups"};
    app.require_subcommand(1);

    std::string kind = "coloring", partition = "triples", in_path, out_path, format = "csv";
    std::string mode_text = "lower-bound", family = "sieve", g0 = "identity";
    std::string eta_mode = "proof-faithful", orders = "3,3,3", config_path;
    uint32_t R = 2, c = 3, s = 2, q = 0, block = 0, i_of_2L1 = 3;
    uint64_t seed = 1, trials = 1000, L1 = 1;
    int64_t kappa_override = 0;
    double delta = 0.5, b_param = 1.0;
    std::vector<uint64_t> ks{1};
    bool system_only = false, per_trial = false;

    auto* inst_cmd = app.add_subcommand("instance", "build an instance and serialize it");
    inst_cmd->add_option("--kind", kind);
    inst_cmd->add_option("--R", R);
    inst_cmd->add_option("--c", c);
    inst_cmd->add_option("--partition", partition);
    inst_cmd->add_option("--s", s);
    inst_cmd->add_option("--q", q);
    inst_cmd->add_option("--delta", delta);
    inst_cmd->add_option("--seed", seed);
    inst_cmd->add_flag("--system-only", system_only);
    inst_cmd->add_option("--out", out_path);

    auto* spec_cmd = app.add_subcommand("spectrum", "per-character eigenvalues of block graphs");
    spec_cmd->add_option("--in", in_path)->required();
    spec_cmd->add_option("--block", block);
    spec_cmd->add_option("--out", out_path);

    auto* dens_cmd = app.add_subcommand("density", "Theta densities per block");
    dens_cmd->add_option("--in", in_path)->required();
    dens_cmd->add_option("--mode", mode_text)->check(CLI::IsMember({"exact", "lower-bound"}));
    dens_cmd->add_option("--out", out_path);

    auto* bound_cmd = app.add_subcommand("bound", "sieve and theorem bounds");
    bound_cmd->add_option("--family", family)
        ->check(CLI::IsMember({"sieve", "coloring", "cor1", "cor2", "grid", "ap"}));
    bound_cmd->add_option("--in", in_path);
    bound_cmd->add_option("--c", c);
    bound_cmd->add_option("--s", s);
    bound_cmd->add_option("--R", R);
    bound_cmd->add_option("--L1", L1);
    bound_cmd->add_option("--i", i_of_2L1);
    bound_cmd->add_option("--eta-mode", eta_mode);
    bound_cmd->add_option("--k", ks);
    bound_cmd->add_option("--out", out_path);

    auto* walk_cmd = app.add_subcommand("walk", "simulate the random walk");
    walk_cmd->add_option("--in", in_path)->required();
    walk_cmd->add_option("--g0", g0);
    walk_cmd->add_option("--k", ks);
    walk_cmd->add_option("--trials", trials);
    walk_cmd->add_option("--seed", seed);
    walk_cmd->add_flag("--per-trial", per_trial, "emit one row per (k, trial)");
    walk_cmd->add_option("--out", out_path);

    auto* ar_cmd = app.add_subcommand("alon-roichman", "empirical expander failure rate");
    ar_cmd->add_option("--orders", orders);
    ar_cmd->add_option("--b", b_param);
    ar_cmd->add_option("--delta", delta);
    ar_cmd->add_option("--trials", trials);
    ar_cmd->add_option("--seed", seed);
    ar_cmd->add_option("--kappa", kappa_override);
    ar_cmd->add_option("--out", out_path);

    auto* exp_cmd = app.add_subcommand("experiment", "full sieve experiment from a config");
    exp_cmd->add_option("--config", config_path);
    std::string exp_kind, exp_g0, exp_format, exp_out, exp_eta;
    uint64_t exp_seed = 0, exp_trials = 0;
    double exp_delta = 0.0;
    std::vector<uint64_t> exp_ks;
    exp_cmd->add_option("--kind", exp_kind);
    exp_cmd->add_option("--seed", exp_seed);
    exp_cmd->add_option("--trials", exp_trials);
    exp_cmd->add_option("--k", exp_ks);
    exp_cmd->add_option("--delta", exp_delta);
    exp_cmd->add_option("--eta-mode", exp_eta);
    exp_cmd->add_option("--g0", exp_g0);
    exp_cmd->add_option("--format", exp_format);
    exp_cmd->add_option("--out", exp_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (inst_cmd->parsed())
            return cmd_instance(kind, R, c, partition, s, q, delta, seed, system_only, out_path);
        if (spec_cmd->parsed()) return cmd_spectrum(in_path, block, out_path);
        if (dens_cmd->parsed()) return cmd_density(in_path, mode_text, out_path);
        if (bound_cmd->parsed())
            return cmd_bound(family, in_path, c, s, R, L1, i_of_2L1, eta_mode, ks, out_path);
        if (walk_cmd->parsed())
            return cmd_walk(in_path, g0, ks, trials, seed, !per_trial, out_path);
        if (ar_cmd->parsed())
            return cmd_alon_roichman(orders, b_param, delta, trials, seed, kappa_override,
                                     out_path);
        if (exp_cmd->parsed()) {
            nlohmann::json overrides = nlohmann::json::object();
            if (!exp_kind.empty()) overrides["kind"] = exp_kind;
            if (exp_seed != 0) overrides["seed"] = exp_seed;
            if (exp_trials != 0) overrides["trials"] = exp_trials;
            if (!exp_ks.empty()) overrides["k"] = exp_ks;
            if (exp_delta != 0.0) overrides["delta"] = exp_delta;
            if (!exp_eta.empty()) overrides["eta_mode"] = exp_eta;
            if (!exp_g0.empty()) overrides["g0"] = exp_g0;
            if (!exp_format.empty()) overrides["format"] = exp_format;
            if (!exp_out.empty()) overrides["out"] = exp_out;
            return cmd_experiment(config_path, overrides);
        }
    } catch (const sieve::capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const sieve::invariant_error& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 2;
    } catch (const sieve::structure_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
