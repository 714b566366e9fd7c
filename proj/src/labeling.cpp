#include "sieve/labeling.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>

#include "sieve/errors.hpp"

namespace sieve {

namespace {
std::atomic<uint32_t> g_dense_threshold{1u << 16};

size_t word_count(size_t sites) { return (sites + 63) / 64; }
} // namespace

uint32_t dense_threshold() { return g_dense_threshold.load(); }
void set_dense_threshold(uint32_t sites) { g_dense_threshold.store(sites); }

bool Block::contains(uint32_t site) const {
    return std::binary_search(sites.begin(), sites.end(), site);
}

std::optional<uint32_t> Block::local_index(uint32_t site) const {
    auto it = std::lower_bound(sites.begin(), sites.end(), site);
    if (it == sites.end() || *it != site) return std::nullopt;
    return static_cast<uint32_t>(it - sites.begin());
}

Labeling::Labeling(GroundPtr ground, uint32_t modulus)
    : ground_(std::move(ground)), c_(modulus) {
    if (!ground_) throw structure_error("labeling needs a ground set");
    if (c_ < 2) throw structure_error("labeling modulus must be >= 2");
    dense_ = (c_ == 2 && ground_->size() <= dense_threshold());
    if (dense_) bits_.assign(word_count(ground_->size()), 0);
}

Labeling Labeling::from_pairs(GroundPtr ground, uint32_t modulus,
                              std::vector<std::pair<uint32_t, uint32_t>> site_residues) {
    Labeling f(std::move(ground), modulus);
    for (auto& [site, residue] : site_residues) f.set(site, residue % modulus);
    return f;
}

void Labeling::set(uint32_t site, uint32_t residue) {
    if (site >= ground_->size()) throw structure_error("site index outside ground set");
    if (dense_) {
        uint64_t bit = uint64_t{1} << (site % 64);
        if (residue & 1)
            bits_[site / 64] |= bit;
        else
            bits_[site / 64] &= ~bit;
        return;
    }
    auto it = std::lower_bound(vals_.begin(), vals_.end(), site,
                               [](const auto& p, uint32_t s) { return p.first < s; });
    bool present = it != vals_.end() && it->first == site;
    if (residue == 0) {
        if (present) vals_.erase(it);
    } else if (present) {
        it->second = residue;
    } else {
        vals_.insert(it, {site, residue});
    }
}

uint32_t Labeling::at(uint32_t site) const {
    if (dense_) return (bits_[site / 64] >> (site % 64)) & 1;
    auto it = std::lower_bound(vals_.begin(), vals_.end(), site,
                               [](const auto& p, uint32_t s) { return p.first < s; });
    if (it == vals_.end() || it->first != site) return 0;
    return it->second;
}

bool Labeling::is_zero() const {
    if (dense_) return std::all_of(bits_.begin(), bits_.end(), [](uint64_t w) { return w == 0; });
    return vals_.empty();
}

size_t Labeling::support_size() const {
    if (!dense_) return vals_.size();
    size_t n = 0;
    for (uint64_t w : bits_) n += std::popcount(w);
    return n;
}

std::vector<uint32_t> Labeling::support() const {
    std::vector<uint32_t> out;
    if (dense_) {
        for (size_t w = 0; w < bits_.size(); ++w) {
            uint64_t word = bits_[w];
            while (word) {
                out.push_back(static_cast<uint32_t>(w * 64 + std::countr_zero(word)));
                word &= word - 1;
            }
        }
    } else {
        out.reserve(vals_.size());
        for (auto& [site, _] : vals_) out.push_back(site);
    }
    return out;
}

void Labeling::check_compatible(const Labeling& o) const {
    if (c_ != o.c_) throw structure_error("labeling modulus mismatch");
    if (!same_ground(ground_, o.ground_)) throw structure_error("labeling ground set mismatch");
}

Labeling Labeling::add(const Labeling& g) const {
    Labeling out = *this;
    out.add_in_place(g);
    return out;
}

void Labeling::add_in_place(const Labeling& g) {
    check_compatible(g);
    if (dense_ && g.dense_) {
        for (size_t w = 0; w < bits_.size(); ++w) bits_[w] ^= g.bits_[w];
        return;
    }
    if (dense_ != g.dense_) {
        // Mixed storage only appears if the dense threshold moved between
        // constructions; fall through via the sparse pairs of g.
        for (auto& [site, residue] : g.pairs()) set(site, (at(site) + residue) % c_);
        return;
    }
    std::vector<std::pair<uint32_t, uint32_t>> merged;
    merged.reserve(vals_.size() + g.vals_.size());
    size_t i = 0, j = 0;
    while (i < vals_.size() || j < g.vals_.size()) {
        if (j == g.vals_.size() || (i < vals_.size() && vals_[i].first < g.vals_[j].first)) {
            merged.push_back(vals_[i++]);
        } else if (i == vals_.size() || g.vals_[j].first < vals_[i].first) {
            merged.push_back(g.vals_[j++]);
        } else {
            uint32_t r = (vals_[i].second + g.vals_[j].second) % c_;
            if (r != 0) merged.push_back({vals_[i].first, r});
            ++i;
            ++j;
        }
    }
    vals_ = std::move(merged);
}

Labeling Labeling::negate() const {
    if (dense_) return *this; // every element has order 2
    Labeling out = *this;
    for (auto& [site, residue] : out.vals_) residue = c_ - residue;
    return out;
}

Labeling Labeling::restrict_to(const Block& b) const {
    Labeling out(ground_, c_);
    if (dense_) {
        for (uint32_t site : b.sites) {
            if ((bits_[site / 64] >> (site % 64)) & 1) out.bits_[site / 64] |= uint64_t{1} << (site % 64);
        }
        return out;
    }
    size_t i = 0, j = 0;
    while (i < vals_.size() && j < b.sites.size()) {
        if (vals_[i].first < b.sites[j]) {
            ++i;
        } else if (b.sites[j] < vals_[i].first) {
            ++j;
        } else {
            out.vals_.push_back(vals_[i]);
            ++i;
            ++j;
        }
    }
    return out;
}

std::vector<std::pair<uint32_t, uint32_t>> Labeling::pairs() const {
    if (!dense_) return vals_;
    std::vector<std::pair<uint32_t, uint32_t>> out;
    for (uint32_t site : support()) out.push_back({site, 1});
    return out;
}

bool Labeling::operator==(const Labeling& o) const {
    if (c_ != o.c_ || !same_ground(ground_, o.ground_)) return false;
    if (dense_ && o.dense_) return bits_ == o.bits_;
    return pairs() == o.pairs();
}

bool Labeling::operator<(const Labeling& o) const {
    if (dense_ && o.dense_) {
        return std::lexicographical_compare(bits_.rbegin(), bits_.rend(), o.bits_.rbegin(),
                                            o.bits_.rend());
    }
    return pairs() < o.pairs();
}

std::string Labeling::serialize() const {
    std::string out = "c=" + std::to_string(c_) + ";";
    bool first = true;
    for (auto& [site, residue] : pairs()) {
        out += first ? " " : ",";
        out += std::to_string(site) + ":" + std::to_string(residue);
        first = false;
    }
    return out;
}

Labeling Labeling::deserialize(GroundPtr ground, std::string_view text) {
    auto fail = [&] { throw structure_error("malformed labeling text: " + std::string(text)); };
    if (!text.starts_with("c=")) fail();
    size_t semi = text.find(';');
    if (semi == std::string_view::npos) fail();
    uint32_t c = 0;
    auto cpart = text.substr(2, semi - 2);
    if (std::from_chars(cpart.data(), cpart.data() + cpart.size(), c).ec != std::errc{}) fail();
    Labeling f(std::move(ground), c);
    std::string_view rest = text.substr(semi + 1);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    while (!rest.empty()) {
        size_t comma = rest.find(',');
        std::string_view item = rest.substr(0, comma);
        size_t colon = item.find(':');
        if (colon == std::string_view::npos) fail();
        uint32_t site = 0, residue = 0;
        if (std::from_chars(item.data(), item.data() + colon, site).ec != std::errc{}) fail();
        if (std::from_chars(item.data() + colon + 1, item.data() + item.size(), residue).ec !=
            std::errc{})
            fail();
        f.set(site, residue % c);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return f;
}

} // namespace sieve
