#include "sieve/walk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <omp.h>

#include "sieve/errors.hpp"
#include "sieve/rng.hpp"

namespace sieve {

namespace {

constexpr uint64_t kWalkTag = 0x57414c4b; // stream domain separator
constexpr double kProbTol = 1e-12;

// M^k for an eigenvalue that is real up to rounding.
std::complex<double> real_pow(std::complex<double> m, uint64_t k) {
    if (k == 0) return {1.0, 0.0};
    double r = m.real();
    double mag = std::pow(std::abs(r), static_cast<double>(k));
    return {(r < 0.0 && (k & 1)) ? -mag : mag, 0.0};
}

struct StepSampler {
    const GeneratorSystem* gs;
    bool uniform;
    std::vector<double> cumulative;

    explicit StepSampler(const GeneratorSystem& g) : gs(&g) {
        uniform = g.weighting == StepWeighting::uniform_distinct;
        if (!uniform) {
            cumulative.resize(g.step_prob.size());
            std::partial_sum(g.step_prob.begin(), g.step_prob.end(), cumulative.begin());
        }
    }

    size_t sample(RngStream& rng) const {
        if (uniform) return static_cast<size_t>(rng.next_below(gs->steps.size()));
        double u = rng.next_double();
        auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        return std::min<size_t>(it - cumulative.begin(), gs->steps.size() - 1);
    }
};

} // namespace

WalkConfig::WalkConfig(std::shared_ptr<const GeneratorSystem> gs, Labeling g0, uint64_t seed_)
    : steps(std::move(gs)), start(std::move(g0)), seed(seed_) {
    if (!steps || steps->steps.empty()) throw structure_error("walk needs a step set");
    if (!steps->steps[0].is_zero())
        throw structure_error("step set must contain the identity (kept first)");
    double total = 0.0;
    std::map<std::string, double> probs;
    for (size_t i = 0; i < steps->steps.size(); ++i) {
        total += steps->step_prob[i];
        probs[steps->steps[i].serialize()] = steps->step_prob[i];
    }
    if (std::abs(total - 1.0) > kProbTol)
        throw structure_error("step distribution must sum to 1");
    for (size_t i = 0; i < steps->steps.size(); ++i) {
        auto it = probs.find(steps->steps[i].negate().serialize());
        if (it == probs.end() || std::abs(it->second - steps->step_prob[i]) > kProbTol)
            throw structure_error("step distribution must be symmetric");
    }
    if (!same_ground(start.ground(), steps->system->ground) ||
        start.modulus() != steps->system->modulus)
        throw structure_error("start labeling does not live in the walk group");
}

const Labeling& sample_step(const GeneratorSystem& gs, RngStream& rng) {
    StepSampler sampler(gs);
    return gs.steps[sampler.sample(rng)];
}

Labeling walk(const WalkConfig& cfg, uint64_t k, uint64_t trial) {
    StepSampler sampler(*cfg.steps);
    RngStream rng = RngStream::derive(cfg.seed, {kWalkTag, trial});
    Labeling x = cfg.start;
    for (uint64_t step = 0; step < k; ++step) x.add_in_place(cfg.steps->steps[sampler.sample(rng)]);
    return x;
}

uint64_t QuotientSpace::project(const Labeling& f) const {
    uint64_t index = 0;
    uint64_t stride = 1;
    const uint32_t c = system->modulus;
    for (uint32_t site : sites) {
        index += stride * f.at(site);
        stride *= c;
    }
    return index;
}

Labeling QuotientSpace::lift(uint64_t state) const {
    const uint32_t c = system->modulus;
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    for (uint32_t site : sites) {
        uint32_t digit = static_cast<uint32_t>(state % c);
        state /= c;
        if (digit != 0) pairs.push_back({site, digit});
    }
    return Labeling::from_pairs(system->ground, c, std::move(pairs));
}

QuotientSpace make_quotient(BlockSystemPtr system, std::span<const uint32_t> labels,
                            uint64_t cap) {
    if (!system) throw structure_error("quotient needs a block system");
    if (labels.empty()) throw structure_error("quotient needs at least one block");
    QuotientSpace q;
    q.system = system;
    double ln_order = 0.0;
    for (uint32_t ell : labels) {
        const Block& b = system->block(ell);
        q.labels.push_back(ell);
        q.offsets.push_back(q.sites.size());
        q.sites.insert(q.sites.end(), b.sites.begin(), b.sites.end());
        ln_order += static_cast<double>(b.sites.size()) *
                    std::log(static_cast<double>(system->modulus));
    }
    q.offsets.push_back(q.sites.size());
    if (ln_order > std::log(static_cast<double>(cap)) + 1e-9)
        throw capacity_error("pair quotient exceeds the distribution cap");
    q.group = AbelianGroup::power(system->modulus, q.sites.size());
    return q;
}

uint32_t Character::frequency(uint32_t global_site) const {
    uint64_t idx = index;
    const uint32_t c = space->system->modulus;
    for (uint32_t site : space->sites) {
        uint32_t digit = static_cast<uint32_t>(idx % c);
        idx /= c;
        if (site == global_site) return digit;
    }
    return 0;
}

std::complex<double> Character::eval(const Labeling& f) const {
    return space->group.character_value(index, space->project(f));
}

std::complex<double> character_transform(const GeneratorSystem& gs, const QuotientSpace& q,
                                         uint64_t chi) {
    std::complex<double> acc{0.0, 0.0};
    for (size_t i = 0; i < gs.steps.size(); ++i)
        acc += gs.step_prob[i] * q.group.character_value(chi, q.project(gs.steps[i]));
    return acc;
}

std::vector<std::complex<double>> character_transforms(const GeneratorSystem& gs,
                                                       const QuotientSpace& q, Exec exec) {
    std::vector<std::complex<double>> data(q.group.order(), {0.0, 0.0});
    for (size_t i = 0; i < gs.steps.size(); ++i)
        data[q.project(gs.steps[i])] += gs.step_prob[i];
    abelian_dft(q.group, data, false, exec);
    return data;
}

std::complex<double> exact_moment(const WalkConfig& cfg, const QuotientSpace& q, uint64_t chi,
                                  uint64_t k) {
    std::complex<double> m = character_transform(*cfg.steps, q, chi);
    return q.group.character_value(chi, q.project(cfg.start)) * real_pow(m, k);
}

std::vector<double> exact_block_distribution(const WalkConfig& cfg, const QuotientSpace& q,
                                             uint64_t k, Exec exec) {
    std::vector<std::complex<double>> data = character_transforms(*cfg.steps, q, exec);
    const uint64_t g0 = q.project(cfg.start);
    for (uint64_t chi = 0; chi < q.group.order(); ++chi)
        data[chi] = q.group.character_value(chi, g0) * real_pow(data[chi], k);
    abelian_dft(q.group, data, true, exec);

    std::vector<double> dist(data.size());
    double sum = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
        double p = data[i].real();
        if (p < -1e-10 || std::abs(data[i].imag()) > 1e-10)
            throw invariant_error("distribution inversion produced an invalid mass");
        dist[i] = std::max(p, 0.0);
        sum += dist[i];
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw invariant_error("distribution inversion does not sum to 1");
    return dist;
}

std::vector<std::vector<char>> theta_tables(const QuotientSpace& q,
                                            std::span<const BlockDetector> detectors) {
    if (detectors.size() != q.labels.size())
        throw structure_error("one detector per quotient block required");
    const uint32_t c = q.system->modulus;
    std::vector<std::vector<char>> tables;
    for (size_t i = 0; i < q.labels.size(); ++i) {
        const Block& b = q.system->block(q.labels[i]);
        uint64_t n = 1;
        for (size_t j = 0; j < b.sites.size(); ++j) n *= c;
        std::vector<char> table(n, 0);
        for (uint64_t v = 0; v < n; ++v) {
            uint64_t rest = v;
            std::vector<std::pair<uint32_t, uint32_t>> pairs;
            for (uint32_t site : b.sites) {
                uint32_t digit = static_cast<uint32_t>(rest % c);
                rest /= c;
                if (digit != 0) pairs.push_back({site, digit});
            }
            Labeling f = Labeling::from_pairs(q.system->ground, c, std::move(pairs));
            table[v] = detectors[i](f, b) ? 1 : 0;
        }
        tables.push_back(std::move(table));
    }
    return tables;
}

double exact_survival_probability(const WalkConfig& cfg, const QuotientSpace& q,
                                  std::span<const BlockDetector> detectors, uint64_t k,
                                  Exec exec) {
    std::vector<double> dist = exact_block_distribution(cfg, q, k, exec);
    std::vector<std::vector<char>> theta = theta_tables(q, detectors);

    const uint32_t c = q.system->modulus;
    std::vector<uint64_t> block_stride(q.labels.size()), block_order(q.labels.size());
    for (size_t i = 0; i < q.labels.size(); ++i) {
        uint64_t stride = 1;
        for (size_t j = 0; j < q.offsets[i]; ++j) stride *= c;
        block_stride[i] = stride;
        uint64_t n = 1;
        for (size_t j = q.offsets[i]; j < q.offsets[i + 1]; ++j) n *= c;
        block_order[i] = n;
    }

    double survival = 0.0;
    for (uint64_t x = 0; x < dist.size(); ++x) {
        bool safe = true;
        for (size_t i = 0; i < q.labels.size() && safe; ++i)
            safe = !theta[i][x / block_stride[i] % block_order[i]];
        if (safe) survival += dist[x];
    }
    return survival;
}

SurvivalCounts mc_survival(const WalkConfig& cfg, const QuotientSpace& q,
                           std::span<const BlockDetector> detectors,
                           std::span<const uint64_t> ks, uint64_t trials,
                           const std::function<bool(const Labeling&)>& instance_event,
                           Exec exec) {
    if (detectors.size() != q.labels.size())
        throw structure_error("one detector per quotient block required");
    std::vector<uint64_t> sorted(ks.begin(), ks.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    SurvivalCounts out;
    out.ks = sorted;
    out.surviving.assign(sorted.size(), 0);
    out.instance_free.assign(sorted.size(), 0);
    out.trials = trials;

    StepSampler sampler(*cfg.steps);
    std::vector<const Block*> blocks;
    for (uint32_t ell : q.labels) blocks.push_back(&q.system->block(ell));

    const int64_t n_trials = static_cast<int64_t>(trials);
#pragma omp parallel if (exec == Exec::parallel)
    {
        std::vector<uint64_t> local_surv(sorted.size(), 0), local_free(sorted.size(), 0);
#pragma omp for schedule(static)
        for (int64_t trial = 0; trial < n_trials; ++trial) {
            RngStream rng = RngStream::derive(cfg.seed, {kWalkTag, static_cast<uint64_t>(trial)});
            Labeling x = cfg.start;
            size_t next = 0;
            for (uint64_t step = 0; next < sorted.size(); ++step) {
                while (next < sorted.size() && sorted[next] == step) {
                    bool safe = true;
                    for (size_t i = 0; i < detectors.size() && safe; ++i)
                        safe = !detectors[i](x, *blocks[i]);
                    if (safe) ++local_surv[next];
                    if (instance_event && instance_event(x)) ++local_free[next];
                    ++next;
                }
                if (next == sorted.size()) break;
                x.add_in_place(cfg.steps->steps[sampler.sample(rng)]);
            }
        }
#pragma omp critical
        for (size_t i = 0; i < sorted.size(); ++i) {
            out.surviving[i] += local_surv[i];
            out.instance_free[i] += local_free[i];
        }
    }
    return out;
}

} // namespace sieve
