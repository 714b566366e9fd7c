#include "sieve/block_system.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "sieve/errors.hpp"
#include "sieve/rng.hpp"

namespace sieve {

namespace {

constexpr uint64_t kSampleTag = 0x53414d50; // stream domain separator

void check_delta(double delta, DeltaPolicy policy) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw structure_error("delta must lie in (0,1)");
    if (policy == DeltaPolicy::strict && delta > 0.5)
        throw structure_error("delta must lie in (0,1/2]; use permissive mode to exceed it");
}

Labeling decode_block_element(const BlockSystem& bs, const Block& b, uint64_t value) {
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    for (uint32_t site : b.sites) {
        uint32_t digit = static_cast<uint32_t>(value % bs.modulus);
        value /= bs.modulus;
        if (digit != 0) pairs.push_back({site, digit});
    }
    return Labeling::from_pairs(bs.ground, bs.modulus, std::move(pairs));
}

} // namespace

const Block& BlockSystem::block(uint32_t label) const {
    for (const Block& b : blocks)
        if (b.label == label) return b;
    throw structure_error("no block with label " + std::to_string(label));
}

double BlockSystem::ln_quotient_index(uint32_t label) const {
    return static_cast<double>(block(label).sites.size()) * std::log(static_cast<double>(modulus));
}

uint64_t BlockSystem::quotient_index(uint32_t label) const {
    const Block& b = block(label);
    uint64_t n = 1;
    for (size_t i = 0; i < b.sites.size(); ++i) {
        if (n > UINT64_MAX / modulus) throw capacity_error("quotient index exceeds 64 bits");
        n *= modulus;
    }
    return n;
}

void BlockSystem::validate() const {
    if (!ground) throw structure_error("block system needs a ground set");
    if (modulus < 2) throw structure_error("block system modulus must be >= 2");
    std::vector<char> seen(ground->size(), 0);
    uint32_t expected = 1;
    for (const Block& b : blocks) {
        if (b.label != expected++) throw structure_error("block labels must be 1..R in order");
        if (!std::is_sorted(b.sites.begin(), b.sites.end()))
            throw structure_error("block sites must be sorted");
        for (uint32_t s : b.sites) {
            if (s >= ground->size()) throw structure_error("block site outside ground set");
            if (seen[s]) throw structure_error("blocks must be pairwise disjoint");
            seen[s] = 1;
        }
    }
    if (index_range != blocks.size()) throw structure_error("index range must match block count");
}

BlockSystemPtr make_block_system(GroundPtr ground, uint32_t modulus,
                                 std::vector<std::vector<uint32_t>> block_sites,
                                 std::string kind, std::map<std::string, int64_t> params) {
    auto bs = std::make_shared<BlockSystem>();
    bs->ground = std::move(ground);
    bs->modulus = modulus;
    bs->index_range = static_cast<uint32_t>(block_sites.size());
    bs->kind = std::move(kind);
    bs->params = std::move(params);
    uint32_t label = 1;
    for (auto& sites : block_sites) {
        std::sort(sites.begin(), sites.end());
        bs->blocks.push_back(Block{label++, std::move(sites)});
    }
    bs->validate();
    return bs;
}

int64_t kappa_from_log(double ln_index, double b, double delta, DeltaPolicy policy) {
    if (!(ln_index >= 0.0)) throw structure_error("kappa needs a quotient index >= 1");
    if (!(b > 0.0)) throw structure_error("kappa needs b > 0");
    check_delta(delta, policy);
    const long double d = delta;
    const long double denom = (2.0L - d) * std::log(2.0L - d) + d * std::log(d);
    const long double value =
        2.0L / denom *
        (static_cast<long double>(ln_index) + static_cast<long double>(b) + std::log(2.0L));
    return static_cast<int64_t>(std::ceil(value));
}

int64_t kappa(uint64_t quotient_index, double b, double delta, DeltaPolicy policy) {
    if (quotient_index == 0) throw structure_error("kappa needs a quotient index >= 1");
    return kappa_from_log(std::log(static_cast<double>(quotient_index)), b, delta, policy);
}

int64_t kappa_power(uint32_t c, uint64_t num_sites, double b, double delta, DeltaPolicy policy) {
    return kappa_from_log(static_cast<double>(num_sites) * std::log(static_cast<double>(c)), b,
                          delta, policy);
}

std::vector<Labeling> sample_generators(const BlockSystem& bs, uint32_t ell, int64_t count,
                                        uint64_t seed) {
    const Block& b = bs.block(ell);
    std::vector<Labeling> out;
    out.reserve(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) {
        RngStream rng = RngStream::derive(seed, {kSampleTag, ell, static_cast<uint64_t>(i)});
        std::vector<std::pair<uint32_t, uint32_t>> pairs;
        for (uint32_t site : b.sites) {
            uint32_t residue = static_cast<uint32_t>(rng.next_below(bs.modulus));
            if (residue != 0) pairs.push_back({site, residue});
        }
        out.push_back(Labeling::from_pairs(bs.ground, bs.modulus, std::move(pairs)));
    }
    return out;
}

double GeneratorSystem::p_min() const {
    double m = 1.0;
    for (double p : step_prob) m = std::min(m, p);
    return m;
}

GeneratorSystem build_generator_system(BlockSystemPtr bs, double delta,
                                       std::vector<double> b_seq, uint64_t seed,
                                       StepWeighting weighting, DeltaPolicy policy) {
    if (!bs || bs->blocks.empty()) throw structure_error("generator system needs blocks");
    check_delta(delta, policy);
    if (b_seq.empty()) {
        for (const Block& b : bs->blocks) b_seq.push_back(static_cast<double>(b.label));
    }
    if (b_seq.size() != bs->blocks.size())
        throw structure_error("b sequence must match block count");

    GeneratorSystem gs;
    gs.system = bs;
    gs.delta = delta;
    gs.delta_supported = delta <= 0.5;
    gs.b_seq = std::move(b_seq);
    gs.weighting = weighting;
    gs.seed = seed;

    for (const Block& b : bs->blocks) {
        int64_t k = kappa_from_log(
            static_cast<double>(b.sites.size()) * std::log(static_cast<double>(bs->modulus)),
            gs.b_seq[b.label - 1], delta, policy);
        gs.kappa_seq.push_back(k);
        gs.samples.push_back(sample_generators(*bs, b.label, k, seed));
    }

    for (auto& draws : gs.samples) {
        std::set<Labeling> sset;
        for (const Labeling& s : draws) {
            sset.insert(s);
            sset.insert(s.negate());
        }
        gs.block_sets.emplace_back(sset.begin(), sset.end());
    }

    Labeling identity(bs->ground, bs->modulus);
    std::set<Labeling> all;
    for (auto& set_l : gs.block_sets)
        for (const Labeling& s : set_l) all.insert(s);
    all.erase(identity);
    gs.steps.push_back(identity);
    gs.steps.insert(gs.steps.end(), all.begin(), all.end());

    if (weighting == StepWeighting::uniform_distinct) {
        gs.step_prob.assign(gs.steps.size(), 1.0 / static_cast<double>(gs.steps.size()));
    } else {
        std::map<std::string, double> weight;
        weight[identity.serialize()] = 1.0;
        for (auto& draws : gs.samples) {
            for (const Labeling& s : draws) {
                weight[s.serialize()] += 1.0;
                weight[s.negate().serialize()] += 1.0;
            }
        }
        double total = 0.0;
        for (auto& [_, w] : weight) total += w;
        for (const Labeling& s : gs.steps) gs.step_prob.push_back(weight[s.serialize()] / total);
    }

    size_t min_sz = SIZE_MAX, max_sz = 0;
    for (auto& set_l : gs.block_sets) {
        min_sz = std::min(min_sz, set_l.size());
        max_sz = std::max(max_sz, set_l.size());
    }
    gs.c0 = bs->blocks.size() > 1
                ? static_cast<double>(max_sz) / static_cast<double>(min_sz)
                : 1.0;
    return gs;
}

GeneratorSystem with_replaced_step(const GeneratorSystem& gs, size_t step_index,
                                   Labeling replacement) {
    GeneratorSystem out = gs;
    if (step_index >= out.steps.size()) throw structure_error("step index out of range");
    out.steps[step_index] = std::move(replacement);
    return out;
}

bool verify_linear_disjointness(const BlockSystem& bs, uint32_t ell, uint32_t ell_prime,
                                uint64_t cap) {
    const Block& a = bs.block(ell);
    const Block& b = bs.block(ell_prime);
    double ln_pairs = (static_cast<double>(a.sites.size()) + static_cast<double>(b.sites.size())) *
                      std::log(static_cast<double>(bs.modulus));
    if (ln_pairs > std::log(static_cast<double>(cap)) + 1e-9)
        throw capacity_error("pair quotient too large to enumerate; disjoint blocks are "
                             "surjective by construction");
    uint64_t na = bs.quotient_index(ell);
    uint64_t nb = bs.quotient_index(ell_prime);
    for (uint64_t u = 0; u < na; ++u) {
        Labeling fu = decode_block_element(bs, a, u);
        for (uint64_t v = 0; v < nb; ++v) {
            Labeling fv = decode_block_element(bs, b, v);
            // Candidate preimage: agree with u on the first block and with v
            // on the second. A shared site forces equal residues, so the pair
            // is unreachable whenever the candidates disagree there.
            Labeling f = fu;
            for (auto& [site, residue] : fv.pairs()) {
                if (a.contains(site)) {
                    if (fu.at(site) != residue) return false;
                } else {
                    f = f.add(Labeling::from_pairs(bs.ground, bs.modulus, {{site, residue}}));
                }
            }
            for (auto& [site, residue] : fu.pairs())
                if (b.contains(site) && fv.at(site) != residue) return false;
            if (!(f.restrict_to(a) == fu) || !(f.restrict_to(b) == fv)) return false;
        }
    }
    return true;
}

bool verify_nice_lifting(const GeneratorSystem& gs, uint32_t ell) {
    const Block& b = gs.system->block(ell);
    std::set<Labeling> projected;
    for (const Labeling& s : gs.steps) projected.insert(s.restrict_to(b));
    std::set<Labeling> expected(gs.block_sets[ell - 1].begin(), gs.block_sets[ell - 1].end());
    expected.insert(Labeling(gs.system->ground, gs.system->modulus));
    return projected == expected;
}

NiceImageResult verify_nice_image(const GeneratorSystem& gs, uint32_t ell, uint32_t ell_prime) {
    if (ell == ell_prime) throw structure_error("nice image needs two distinct blocks");
    const Block& a = gs.system->block(ell);
    const Block& b = gs.system->block(ell_prime);
    Labeling identity(gs.system->ground, gs.system->modulus);

    NiceImageResult res;
    res.witness_x0 = identity;
    res.witness_y0 = identity;
    if (!(identity.add(identity) == identity)) {
        res.failure = "witness is not an involution";
        return res;
    }

    std::set<std::pair<std::string, std::string>> image;
    for (const Labeling& s : gs.steps)
        image.insert({s.restrict_to(a).serialize(), s.restrict_to(b).serialize()});

    const std::string id_text = identity.serialize();
    for (const Labeling& s : gs.steps) {
        std::string pa = s.restrict_to(a).serialize();
        std::string pb = s.restrict_to(b).serialize();
        if (!image.count({pa, id_text})) {
            res.failure = "missing cross element (" + pa + ", identity)";
            return res;
        }
        if (!image.count({id_text, pb})) {
            res.failure = "missing cross element (identity, " + pb + ")";
            return res;
        }
    }
    res.ok = true;
    return res;
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace {

nlohmann::json site_to_json(const Site& s) {
    return nlohmann::json::array(
        {static_cast<int>(s.kind), s.v[0], s.v[1], s.v[2], s.v[3]});
}

Site site_from_json(const nlohmann::json& j) {
    Site s;
    s.kind = static_cast<Site::Kind>(j.at(0).get<int>());
    for (int i = 0; i < 4; ++i) s.v[i] = j.at(i + 1).get<int32_t>();
    return s;
}

nlohmann::json labeling_to_json(const Labeling& f) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto& [site, residue] : f.pairs()) arr.push_back({site, residue});
    return arr;
}

Labeling labeling_from_json(const GroundPtr& ground, uint32_t c, const nlohmann::json& j) {
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    for (auto& item : j) pairs.push_back({item.at(0).get<uint32_t>(), item.at(1).get<uint32_t>()});
    return Labeling::from_pairs(ground, c, std::move(pairs));
}

} // namespace

nlohmann::json block_system_to_json(const BlockSystem& bs) {
    nlohmann::json doc;
    doc["format"] = "sieve.block_system";
    doc["version"] = 1;
    doc["kind"] = bs.kind;
    doc["params"] = bs.params;
    doc["modulus"] = bs.modulus;
    nlohmann::json ground = nlohmann::json::array();
    for (uint32_t i = 0; i < bs.ground->size(); ++i) ground.push_back(site_to_json(bs.ground->site(i)));
    doc["ground"] = std::move(ground);
    nlohmann::json blocks = nlohmann::json::array();
    for (const Block& b : bs.blocks) blocks.push_back({{"label", b.label}, {"sites", b.sites}});
    doc["blocks"] = std::move(blocks);
    return doc;
}

BlockSystemPtr block_system_from_json(const nlohmann::json& doc) {
    if (doc.at("format") != "sieve.block_system" || doc.at("version") != 1)
        throw structure_error("unrecognized block system document");
    std::vector<Site> sites;
    for (auto& j : doc.at("ground")) sites.push_back(site_from_json(j));
    GroundPtr ground = GroundSet::from_sites(std::move(sites));
    std::vector<std::vector<uint32_t>> block_sites;
    for (auto& j : doc.at("blocks")) block_sites.push_back(j.at("sites").get<std::vector<uint32_t>>());
    return make_block_system(std::move(ground), doc.at("modulus").get<uint32_t>(),
                             std::move(block_sites), doc.at("kind").get<std::string>(),
                             doc.at("params").get<std::map<std::string, int64_t>>());
}

nlohmann::json generator_system_to_json(const GeneratorSystem& gs) {
    nlohmann::json doc;
    doc["format"] = "sieve.generator_system";
    doc["version"] = 1;
    doc["system"] = block_system_to_json(*gs.system);
    doc["delta"] = gs.delta;
    doc["delta_supported"] = gs.delta_supported;
    doc["b_seq"] = gs.b_seq;
    doc["kappa"] = gs.kappa_seq;
    doc["seed"] = gs.seed;
    doc["weighting"] = gs.weighting == StepWeighting::uniform_distinct ? "uniform" : "multiset";
    doc["c0"] = gs.c0;
    nlohmann::json samples = nlohmann::json::array();
    for (auto& draws : gs.samples) {
        nlohmann::json block = nlohmann::json::array();
        for (const Labeling& s : draws) block.push_back(labeling_to_json(s));
        samples.push_back(std::move(block));
    }
    doc["samples"] = std::move(samples);
    nlohmann::json steps = nlohmann::json::array();
    for (const Labeling& s : gs.steps) steps.push_back(labeling_to_json(s));
    doc["steps"] = std::move(steps);
    doc["step_prob"] = gs.step_prob;
    return doc;
}

GeneratorSystem generator_system_from_json(const nlohmann::json& doc) {
    if (doc.at("format") != "sieve.generator_system" || doc.at("version") != 1)
        throw structure_error("unrecognized generator system document");
    BlockSystemPtr bs = block_system_from_json(doc.at("system"));

    GeneratorSystem gs;
    gs.system = bs;
    gs.delta = doc.at("delta").get<double>();
    gs.delta_supported = doc.at("delta_supported").get<bool>();
    gs.b_seq = doc.at("b_seq").get<std::vector<double>>();
    gs.kappa_seq = doc.at("kappa").get<std::vector<int64_t>>();
    gs.seed = doc.at("seed").get<uint64_t>();
    gs.weighting = doc.at("weighting") == "uniform" ? StepWeighting::uniform_distinct
                                                    : StepWeighting::multiset;
    gs.c0 = doc.at("c0").get<double>();
    for (auto& block : doc.at("samples")) {
        std::vector<Labeling> draws;
        for (auto& j : block) draws.push_back(labeling_from_json(bs->ground, bs->modulus, j));
        gs.samples.push_back(std::move(draws));
    }
    for (auto& draws : gs.samples) {
        std::set<Labeling> sset;
        for (const Labeling& s : draws) {
            sset.insert(s);
            sset.insert(s.negate());
        }
        gs.block_sets.emplace_back(sset.begin(), sset.end());
    }
    for (auto& j : doc.at("steps")) gs.steps.push_back(labeling_from_json(bs->ground, bs->modulus, j));
    gs.step_prob = doc.at("step_prob").get<std::vector<double>>();
    if (gs.steps.size() != gs.step_prob.size())
        throw structure_error("step set and distribution sizes disagree");
    double total = 0.0;
    for (double p : gs.step_prob) total += p;
    if (std::abs(total - 1.0) > 1e-9) throw structure_error("step distribution must sum to 1");
    return gs;
}

} // namespace sieve
