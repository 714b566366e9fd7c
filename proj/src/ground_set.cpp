#include "sieve/ground_set.hpp"

#include <algorithm>
#include <stdexcept>

#include "sieve/errors.hpp"
#include "sieve/rng.hpp"

namespace sieve {

std::string Site::text() const {
    switch (kind) {
        case Kind::cell:
            return std::to_string(v[0]);
        case Kind::complete_edge:
            return "(" + std::to_string(v[0]) + "," + std::to_string(v[1]) + ")";
        case Kind::grid_edge:
            return "((" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "),(" +
                   std::to_string(v[2]) + "," + std::to_string(v[3]) + "))";
    }
    return {};
}

size_t SiteHash::operator()(const Site& s) const {
    uint64_t h = static_cast<uint64_t>(s.kind);
    for (int32_t x : s.v) h = mix64(h ^ static_cast<uint32_t>(x));
    return static_cast<size_t>(h);
}

GroundSet::GroundSet(std::vector<Site> sites) : sites_(std::move(sites)) {
    index_.reserve(sites_.size());
    uint64_t fp = 0x243f6a8885a308d3ULL;
    for (uint32_t i = 0; i < sites_.size(); ++i) {
        auto [it, fresh] = index_.emplace(sites_[i], i);
        if (!fresh) throw structure_error("ground set sites must be pairwise distinct");
        fp = mix64(fp ^ SiteHash{}(sites_[i]));
    }
    fingerprint_ = mix64(fp ^ sites_.size());
}

std::shared_ptr<const GroundSet> GroundSet::from_sites(std::vector<Site> sites) {
    return std::shared_ptr<const GroundSet>(new GroundSet(std::move(sites)));
}

std::shared_ptr<const GroundSet> GroundSet::complete_graph_edges(int32_t t) {
    if (t < 2) throw structure_error("complete graph ground set needs t >= 2");
    std::vector<Site> sites;
    sites.reserve(static_cast<size_t>(t) * (t - 1) / 2);
    for (int32_t a = 1; a <= t; ++a)
        for (int32_t b = a + 1; b <= t; ++b) sites.push_back(Site::complete_edge(a, b));
    return from_sites(std::move(sites));
}

std::shared_ptr<const GroundSet> GroundSet::grid_box_edges(int32_t m) {
    if (m < 1) throw structure_error("grid box ground set needs radius >= 1");
    std::vector<Site> sites;
    for (int32_t y = -m; y <= m; ++y) {
        for (int32_t x = -m; x <= m; ++x) {
            if (x + 1 <= m) sites.push_back(Site::grid_edge(x, y, x + 1, y));
            if (y + 1 <= m) sites.push_back(Site::grid_edge(x, y, x, y + 1));
        }
    }
    return from_sites(std::move(sites));
}

std::shared_ptr<const GroundSet> GroundSet::integer_cells(int32_t t) {
    if (t < 1) throw structure_error("cell ground set needs t >= 1");
    std::vector<Site> sites;
    sites.reserve(t);
    for (int32_t n = 1; n <= t; ++n) sites.push_back(Site::cell(n));
    return from_sites(std::move(sites));
}

std::optional<uint32_t> GroundSet::index_of(const Site& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool same_ground(const GroundPtr& a, const GroundPtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    return a->fingerprint() == b->fingerprint() && a->size() == b->size();
}

} // namespace sieve
