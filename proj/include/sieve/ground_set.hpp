#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sieve {

// One coordinate of a labeling group: an edge of a complete graph on [t],
// a unit edge of the integer grid, or an integer cell.
struct Site {
    enum class Kind : uint8_t { cell, complete_edge, grid_edge };

    Kind kind = Kind::cell;
    std::array<int32_t, 4> v{0, 0, 0, 0};

    static Site cell(int32_t n) { return Site{Kind::cell, {n, 0, 0, 0}}; }
    static Site complete_edge(int32_t a, int32_t b) {
        if (a > b) std::swap(a, b);
        return Site{Kind::complete_edge, {a, b, 0, 0}};
    }
    // Unit grid edge; endpoints are stored in lexicographic order.
    static Site grid_edge(int32_t x1, int32_t y1, int32_t x2, int32_t y2) {
        if (std::pair{x1, y1} > std::pair{x2, y2}) {
            std::swap(x1, x2);
            std::swap(y1, y2);
        }
        return Site{Kind::grid_edge, {x1, y1, x2, y2}};
    }

    bool operator==(const Site&) const = default;
    auto operator<=>(const Site&) const = default;

    std::string text() const;
};

struct SiteHash {
    size_t operator()(const Site& s) const;
};

// Ordered finite list of distinct sites with a stable site <-> index bijection.
// Instances share ground sets by shared_ptr; compatibility between labelings is
// decided by pointer identity or, failing that, by the content fingerprint.
class GroundSet {
public:
    static std::shared_ptr<const GroundSet> complete_graph_edges(int32_t t);
    // All unit edges with every endpoint coordinate in [-m, m].
    static std::shared_ptr<const GroundSet> grid_box_edges(int32_t m);
    static std::shared_ptr<const GroundSet> integer_cells(int32_t t);
    static std::shared_ptr<const GroundSet> from_sites(std::vector<Site> sites);

    size_t size() const { return sites_.size(); }
    const Site& site(uint32_t index) const { return sites_[index]; }
    std::optional<uint32_t> index_of(const Site& s) const;
    uint64_t fingerprint() const { return fingerprint_; }

private:
    explicit GroundSet(std::vector<Site> sites);

    std::vector<Site> sites_;
    std::unordered_map<Site, uint32_t, SiteHash> index_;
    uint64_t fingerprint_ = 0;
};

using GroundPtr = std::shared_ptr<const GroundSet>;

bool same_ground(const GroundPtr& a, const GroundPtr& b);

} // namespace sieve
