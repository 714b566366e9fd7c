#include "sieve/instances.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <omp.h>

#include "sieve/errors.hpp"

namespace sieve {

namespace {

bool tuple_is_hit(const Labeling& f, std::span<const uint32_t> sites, PatternKind kind,
                  bool zero_is_color) {
    if (kind == PatternKind::four_cycle) {
        for (uint32_t s : sites)
            if (f.at(s) == 0) return false;
        return true;
    }
    uint32_t r0 = f.at(sites[0]);
    if (!zero_is_color && r0 == 0) return false;
    for (size_t i = 1; i < sites.size(); ++i)
        if (f.at(sites[i]) != r0) return false;
    return true;
}

bool tuple_is_hit_digits(std::span<const uint32_t> digits, std::span<const uint32_t> map,
                         std::span<const uint32_t> sites, PatternKind kind, bool zero_is_color) {
    if (kind == PatternKind::four_cycle) {
        for (uint32_t s : sites)
            if (digits[map[s]] == 0) return false;
        return true;
    }
    uint32_t r0 = digits[map[sites[0]]];
    if (!zero_is_color && r0 == 0) return false;
    for (size_t i = 1; i < sites.size(); ++i)
        if (digits[map[sites[i]]] != r0) return false;
    return true;
}

uint32_t edge_index(const GroundSet& ground, int32_t a, int32_t b) {
    auto idx = ground.index_of(Site::complete_edge(a, b));
    if (!idx) throw invariant_error("complete-graph edge missing from ground set");
    return *idx;
}

bool grid_edge_in_disc(const Site& e, int64_t m) {
    for (int32_t coord : e.v)
        if (coord < -m || coord > m) return false;
    return true;
}

} // namespace

bool PatternDetector::matches(const Labeling& f) const {
    if (!enabled) return false;
    for (const auto& tuple : patterns)
        if (tuple_is_hit(f, tuple, kind, zero_is_color)) return true;
    return false;
}

std::optional<std::span<const uint32_t>> PatternDetector::find(const Labeling& f) const {
    if (!enabled) return std::nullopt;
    for (const auto& tuple : patterns)
        if (tuple_is_hit(f, tuple, kind, zero_is_color)) return std::span<const uint32_t>(tuple);
    return std::nullopt;
}

bool PatternDetector::matches_digits(std::span<const uint32_t> digits,
                                     std::span<const uint32_t> site_to_digit) const {
    if (!enabled) return false;
    for (const auto& tuple : patterns)
        if (tuple_is_hit_digits(digits, site_to_digit, tuple, kind, zero_is_color)) return true;
    return false;
}

const PatternDetector& Instance::detector(uint32_t label) const {
    return detectors.at(label - 1);
}

BlockDetector Instance::block_detector(uint32_t label) const {
    const PatternDetector det = detector(label);
    return [det](const Labeling& f, const Block&) { return det.matches(f); };
}

bool Instance::instance_pattern_free(const Labeling& f) const {
    for (const auto& tuple : instance_patterns)
        if (tuple_is_hit(f, tuple, kind, detectors.empty() ? true : detectors[0].zero_is_color))
            return false;
    return true;
}

Labeling Instance::theta_free_start() const {
    Labeling f(system->ground, system->modulus);
    const uint32_t c = system->modulus;
    for (size_t round = 0; round < 64 * system->ground->size() + 64; ++round) {
        bool hit = false;
        for (const PatternDetector& det : detectors) {
            if (auto tuple = det.find(f)) {
                uint32_t site = (*tuple)[round % tuple->size()];
                f = f.add(Labeling::from_pairs(system->ground, c, {{site, 1}}));
                hit = true;
                break;
            }
        }
        if (!hit) return f;
    }
    throw structure_error("no pattern-free start found; the instance may have full density");
}

Instance make_coloring_instance(uint32_t R, uint32_t c, ColoringPartition partition,
                                InstanceMode mode, std::span<const std::vector<int32_t>> custom) {
    if (R < 1) throw structure_error("coloring instance needs R >= 1");
    if (c < 2) throw structure_error("coloring instance needs c >= 2");

    std::vector<std::vector<int32_t>> groups;
    switch (partition) {
        case ColoringPartition::triples:
            for (uint32_t l = 1; l <= R; ++l)
                groups.push_back({static_cast<int32_t>(3 * l - 2), static_cast<int32_t>(3 * l - 1),
                                  static_cast<int32_t>(3 * l)});
            break;
        case ColoringPartition::triangular:
            for (uint32_t l = 1; l <= R; ++l) {
                std::vector<int32_t> g;
                int32_t start = static_cast<int32_t>(l * (l + 1) / 2);
                for (int32_t v = start; v <= start + static_cast<int32_t>(l); ++v) g.push_back(v);
                groups.push_back(std::move(g));
            }
            break;
        case ColoringPartition::custom:
            groups.assign(custom.begin(), custom.end());
            if (groups.size() != R) throw structure_error("custom partition must have R groups");
            break;
    }

    std::set<int32_t> used;
    int32_t max_index = 0;
    for (auto& g : groups) {
        for (int32_t v : g) {
            if (v < 1) throw structure_error("partition indices must be positive");
            if (!used.insert(v).second)
                throw structure_error("partition groups must be pairwise disjoint");
            max_index = std::max(max_index, v);
        }
    }
    std::vector<bool> small_group(groups.size(), false);
    for (size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].size() < 3) {
            if (mode == InstanceMode::strict)
                throw structure_error("partition group " + std::to_string(i + 1) +
                                      " has fewer than 3 vertices");
            small_group[i] = true;
        }
    }

    int32_t t = std::max<int32_t>(max_index, static_cast<int32_t>(3 * R + 1));
    GroundPtr ground = GroundSet::complete_graph_edges(t);

    std::vector<std::vector<uint32_t>> block_sites;
    for (auto& g : groups) {
        std::vector<uint32_t> sites;
        for (size_t i = 0; i < g.size(); ++i)
            for (size_t j = i + 1; j < g.size(); ++j)
                sites.push_back(edge_index(*ground, g[i], g[j]));
        block_sites.push_back(std::move(sites));
    }

    Instance inst;
    inst.kind = PatternKind::monochromatic_triangle;
    inst.paper_parameters = (c >= 3 && R >= 3);
    inst.system = make_block_system(ground, c, std::move(block_sites), "coloring",
                                    {{"R", R},
                                     {"c", c},
                                     {"t", t},
                                     {"partition", static_cast<int64_t>(partition)},
                                     {"mode", mode == InstanceMode::strict ? 0 : 1}});

    for (size_t i = 0; i < groups.size(); ++i) {
        PatternDetector det;
        det.kind = PatternKind::monochromatic_triangle;
        det.block_label = static_cast<uint32_t>(i + 1);
        det.enabled = !small_group[i];
        auto& g = groups[i];
        for (size_t a = 0; a < g.size(); ++a)
            for (size_t b = a + 1; b < g.size(); ++b)
                for (size_t d = b + 1; d < g.size(); ++d)
                    det.patterns.push_back({edge_index(*ground, g[a], g[b]),
                                            edge_index(*ground, g[a], g[d]),
                                            edge_index(*ground, g[b], g[d])});
        inst.detectors.push_back(std::move(det));
    }

    // Theorem-level event: a monochromatic triangle anywhere in the complete graph.
    if (static_cast<int64_t>(t) * (t - 1) * (t - 2) / 6 <= 2'000'000) {
        for (int32_t a = 1; a <= t; ++a)
            for (int32_t b = a + 1; b <= t; ++b)
                for (int32_t d = b + 1; d <= t; ++d)
                    inst.instance_patterns.push_back({edge_index(*ground, a, b),
                                                      edge_index(*ground, a, d),
                                                      edge_index(*ground, b, d)});
    }
    return inst;
}

bool detect_mono_triangle(const Labeling& f, const PatternDetector& d) {
    if (d.kind != PatternKind::monochromatic_triangle)
        throw structure_error("detector is not a triangle detector");
    return d.matches(f);
}

int64_t grid_disc_edge_count(int64_t radius) { return 4 * radius * (2 * radius + 1); }
int64_t grid_annulus_edge_count(int64_t ell) { return 64 * ell + 40; }

Instance make_grid_instance(uint32_t R, GridScale scale) {
    if (R < 1) throw structure_error("grid instance needs R >= 1");
    std::vector<int32_t> radii = scale.radii;
    if (radii.empty()) {
        radii.push_back(2); // D(0,2) is uncovered, matching the annulus family
        for (uint32_t l = 1; l <= R; ++l) radii.push_back(static_cast<int32_t>(2 * l + 2));
    }
    if (radii.size() != R + 1) throw structure_error("grid scale needs R+1 radii");
    for (size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 0 || (i > 0 && radii[i] <= radii[i - 1]))
            throw structure_error("grid radii must be nonnegative and strictly increasing");
    }

    const int32_t box = radii.back();
    GroundPtr ground = GroundSet::grid_box_edges(box);

    std::vector<std::vector<uint32_t>> block_sites(R);
    for (uint32_t i = 0; i < ground->size(); ++i) {
        const Site& e = ground->site(i);
        for (uint32_t l = 1; l <= R; ++l) {
            if (grid_edge_in_disc(e, radii[l]) && !grid_edge_in_disc(e, radii[l - 1])) {
                block_sites[l - 1].push_back(i);
                break;
            }
        }
    }

    Instance inst;
    inst.kind = PatternKind::four_cycle;
    inst.paper_parameters = scale.radii.empty();
    std::map<std::string, int64_t> params{{"R", R}, {"box", box},
                                          {"paper_scale", scale.radii.empty() ? 1 : 0}};
    // Radii are needed to rebuild reduced instances from JSON.
    for (size_t i = 0; i < radii.size(); ++i) params["r" + std::to_string(i)] = radii[i];
    inst.system = make_block_system(ground, 2, std::move(block_sites), "grid", std::move(params));

    auto square_edges = [&](int32_t x, int32_t y) {
        std::array<uint32_t, 4> e{};
        auto at = [&](const Site& s) {
            auto idx = ground->index_of(s);
            return idx ? *idx : UINT32_MAX;
        };
        e[0] = at(Site::grid_edge(x, y, x + 1, y));
        e[1] = at(Site::grid_edge(x, y + 1, x + 1, y + 1));
        e[2] = at(Site::grid_edge(x, y, x, y + 1));
        e[3] = at(Site::grid_edge(x + 1, y, x + 1, y + 1));
        return e;
    };

    for (uint32_t l = 1; l <= R; ++l) {
        PatternDetector det;
        det.kind = PatternKind::four_cycle;
        det.block_label = l;
        const Block& b = inst.system->block(l);
        for (int32_t x = -box; x < box; ++x) {
            for (int32_t y = -box; y < box; ++y) {
                auto e = square_edges(x, y);
                bool inside = true;
                for (uint32_t idx : e)
                    inside = inside && idx != UINT32_MAX && b.contains(idx);
                if (inside) det.patterns.push_back({e[0], e[1], e[2], e[3]});
            }
        }
        if (det.patterns.empty())
            throw structure_error("grid block " + std::to_string(l) + " contains no unit square");
        inst.detectors.push_back(std::move(det));
    }

    for (int32_t x = -box; x < box; ++x) {
        for (int32_t y = -box; y < box; ++y) {
            auto e = square_edges(x, y);
            bool ok = true;
            for (uint32_t idx : e) ok = ok && idx != UINT32_MAX;
            if (ok) inst.instance_patterns.push_back({e[0], e[1], e[2], e[3]});
        }
    }
    return inst;
}

bool detect_four_cycle(const Labeling& f, const PatternDetector& d) {
    if (d.kind != PatternKind::four_cycle)
        throw structure_error("detector is not a 4-cycle detector");
    return d.matches(f);
}

Instance make_ap_instance(uint32_t s, uint32_t q, uint32_t c, uint32_t R, InstanceMode mode) {
    if (s < 1) throw structure_error("ap instance needs s >= 1");
    if (c < 2) throw structure_error("ap instance needs c >= 2");
    if (R < 1) throw structure_error("ap instance needs R >= 1");
    if (mode == InstanceMode::strict && R <= s)
        throw structure_error("ap instance needs R > s");
    if (q < R)
        throw structure_error("ap instance needs q >= R: with common difference q < R the index "
                              "sets I_l and I_{l+q} overlap");

    const int64_t t = static_cast<int64_t>(R) + static_cast<int64_t>(q) * (2 * s - 1);
    GroundPtr ground = GroundSet::integer_cells(static_cast<int32_t>(t));

    std::vector<std::vector<uint32_t>> block_sites;
    for (uint32_t l = 1; l <= R; ++l) {
        std::vector<uint32_t> sites;
        for (uint32_t j = 0; j < 2 * s; ++j) sites.push_back(l + q * j - 1);
        block_sites.push_back(std::move(sites));
    }

    Instance inst;
    inst.kind = PatternKind::monochromatic_ap;
    inst.paper_parameters = (c >= 3 && R > s);
    inst.system = make_block_system(ground, c, std::move(block_sites), "ap",
                                    {{"s", s}, {"q", q}, {"c", c}, {"R", R}});

    for (uint32_t l = 1; l <= R; ++l) {
        PatternDetector det;
        det.kind = PatternKind::monochromatic_ap;
        det.block_label = l;
        if (s == 1) {
            for (uint32_t j = 0; j < 2; ++j) det.patterns.push_back({l + q * j - 1});
        } else {
            for (uint32_t d = 1; d <= 2 * s - 1; ++d) {
                for (uint32_t j0 = 0; j0 + (s - 1) * d <= 2 * s - 1; ++j0) {
                    std::vector<uint32_t> tuple;
                    for (uint32_t i = 0; i < s; ++i) tuple.push_back(l + q * (j0 + i * d) - 1);
                    det.patterns.push_back(std::move(tuple));
                }
            }
        }
        inst.detectors.push_back(std::move(det));
    }

    for (const PatternDetector& det : inst.detectors)
        for (const auto& tuple : det.patterns) inst.instance_patterns.push_back(tuple);
    return inst;
}

bool detect_mono_ap(const Labeling& f, const PatternDetector& d) {
    if (d.kind != PatternKind::monochromatic_ap)
        throw structure_error("detector is not an AP detector");
    return d.matches(f);
}

Instance instance_from_system(BlockSystemPtr bs) {
    if (!bs) throw structure_error("instance reconstruction needs a block system");
    Instance inst;
    if (bs->kind == "coloring") {
        auto mode = bs->params.at("mode") == 0 ? InstanceMode::strict : InstanceMode::permissive;
        auto partition = static_cast<ColoringPartition>(bs->params.at("partition"));
        if (partition == ColoringPartition::custom) {
            // Recover the vertex groups from the stored edge blocks.
            std::vector<std::vector<int32_t>> groups;
            for (const Block& b : bs->blocks) {
                std::set<int32_t> verts;
                for (uint32_t s : b.sites) {
                    const Site& e = bs->ground->site(s);
                    verts.insert(e.v[0]);
                    verts.insert(e.v[1]);
                }
                groups.emplace_back(verts.begin(), verts.end());
            }
            inst = make_coloring_instance(static_cast<uint32_t>(bs->params.at("R")),
                                          static_cast<uint32_t>(bs->params.at("c")), partition,
                                          mode, groups);
        } else {
            inst = make_coloring_instance(static_cast<uint32_t>(bs->params.at("R")),
                                          static_cast<uint32_t>(bs->params.at("c")), partition,
                                          mode);
        }
    } else if (bs->kind == "grid") {
        uint32_t R = static_cast<uint32_t>(bs->params.at("R"));
        GridScale scale;
        if (bs->params.at("paper_scale") == 0) {
            for (uint32_t i = 0; i <= R; ++i)
                scale.radii.push_back(
                    static_cast<int32_t>(bs->params.at("r" + std::to_string(i))));
        }
        inst = make_grid_instance(R, scale);
    } else if (bs->kind == "ap") {
        inst = make_ap_instance(static_cast<uint32_t>(bs->params.at("s")),
                                static_cast<uint32_t>(bs->params.at("q")),
                                static_cast<uint32_t>(bs->params.at("c")),
                                static_cast<uint32_t>(bs->params.at("R")),
                                InstanceMode::permissive);
    } else {
        throw structure_error("cannot rebuild detectors for instance kind '" + bs->kind + "'");
    }

    if (!same_ground(inst.system->ground, bs->ground))
        throw structure_error("restored block system does not match its descriptor");
    for (size_t i = 0; i < bs->blocks.size(); ++i)
        if (inst.system->blocks[i].sites != bs->blocks[i].sites)
            throw structure_error("restored block sites do not match their descriptor");
    inst.system = std::move(bs);
    return inst;
}

double theta_density(const BlockSystem& bs, const PatternDetector& d, DensityMode mode, Exec exec,
                     uint64_t cap) {
    if (mode == DensityMode::lower_bound) {
        const double c = static_cast<double>(bs.modulus);
        switch (d.kind) {
            case PatternKind::monochromatic_triangle:
                return 1.0 / (c * c);
            case PatternKind::four_cycle:
                return 1.0 / 16.0;
            case PatternKind::monochromatic_ap:
                return std::pow(c, -static_cast<double>(d.patterns.at(0).size()));
        }
    }

    const Block& b = bs.block(d.block_label);
    const uint32_t c = bs.modulus;
    double ln_n = static_cast<double>(b.sites.size()) * std::log(static_cast<double>(c));
    if (ln_n > std::log(static_cast<double>(cap)) + 1e-9)
        throw capacity_error("exact density enumeration exceeds its cap");
    uint64_t n = 1;
    for (size_t i = 0; i < b.sites.size(); ++i) n *= c;

    std::vector<uint32_t> site_to_digit(bs.ground->size(), UINT32_MAX);
    for (size_t i = 0; i < b.sites.size(); ++i) site_to_digit[b.sites[i]] = static_cast<uint32_t>(i);

    uint64_t hits = 0;
    const int64_t total = static_cast<int64_t>(n);
#pragma omp parallel if (exec == Exec::parallel)
    {
        uint64_t local = 0;
        std::vector<uint32_t> digits(b.sites.size(), 0);
#pragma omp for schedule(static)
        for (int64_t v = 0; v < total; ++v) {
            uint64_t rest = static_cast<uint64_t>(v);
            for (size_t i = 0; i < digits.size(); ++i) {
                digits[i] = static_cast<uint32_t>(rest % c);
                rest /= c;
            }
            if (d.matches_digits(digits, site_to_digit)) ++local;
        }
#pragma omp atomic
        hits += local;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

} // namespace sieve
