#include "sieve/abelian.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <omp.h>

#include "sieve/errors.hpp"

namespace sieve {

AbelianGroup::AbelianGroup(std::vector<uint32_t> orders) : orders_(std::move(orders)) {
    strides_.reserve(orders_.size());
    for (uint32_t m : orders_) {
        if (m == 0) throw structure_error("cyclic factor order must be >= 1");
        strides_.push_back(order_);
        if (m != 0 && order_ > UINT64_MAX / m) throw capacity_error("group order exceeds 64 bits");
        order_ *= m;
        lcm_ = static_cast<uint32_t>(std::lcm<uint64_t>(lcm_, m));
    }
    lcm_factor_.reserve(orders_.size());
    for (uint32_t m : orders_) lcm_factor_.push_back(lcm_ / m);

    unit_.resize(lcm_);
    for (uint32_t t = 0; t < lcm_; ++t) {
        // Exact values on the quarter circle keep +-1 eigenvalue detection exact.
        if (4ull * t % lcm_ == 0) {
            switch (4ull * t / lcm_) {
                case 0: unit_[t] = {1.0, 0.0}; continue;
                case 1: unit_[t] = {0.0, 1.0}; continue;
                case 2: unit_[t] = {-1.0, 0.0}; continue;
                case 3: unit_[t] = {0.0, -1.0}; continue;
            }
        }
        double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(lcm_);
        unit_[t] = {std::cos(angle), std::sin(angle)};
    }
}

AbelianGroup AbelianGroup::power(uint32_t c, size_t m) {
    return AbelianGroup(std::vector<uint32_t>(m, c));
}

std::vector<uint32_t> AbelianGroup::decode(uint64_t index) const {
    std::vector<uint32_t> digits(orders_.size());
    for (size_t j = 0; j < orders_.size(); ++j) {
        digits[j] = static_cast<uint32_t>(index % orders_[j]);
        index /= orders_[j];
    }
    return digits;
}

uint64_t AbelianGroup::encode(std::span<const uint32_t> digits) const {
    uint64_t index = 0;
    for (size_t j = 0; j < orders_.size(); ++j)
        index += strides_[j] * (digits[j] % orders_[j]);
    return index;
}

uint64_t AbelianGroup::add(uint64_t a, uint64_t b) const {
    uint64_t out = 0;
    for (size_t j = 0; j < orders_.size(); ++j) {
        uint32_t da = static_cast<uint32_t>(a / strides_[j] % orders_[j]);
        uint32_t db = static_cast<uint32_t>(b / strides_[j] % orders_[j]);
        out += strides_[j] * ((da + db) % orders_[j]);
    }
    return out;
}

uint64_t AbelianGroup::negate(uint64_t a) const {
    uint64_t out = 0;
    for (size_t j = 0; j < orders_.size(); ++j) {
        uint32_t da = static_cast<uint32_t>(a / strides_[j] % orders_[j]);
        out += strides_[j] * ((orders_[j] - da) % orders_[j]);
    }
    return out;
}

uint32_t AbelianGroup::phase(uint64_t chi, uint64_t x) const {
    uint64_t t = 0;
    for (size_t j = 0; j < orders_.size(); ++j) {
        uint64_t aj = chi / strides_[j] % orders_[j];
        uint64_t xj = x / strides_[j] % orders_[j];
        t += aj * xj % orders_[j] * lcm_factor_[j];
    }
    return static_cast<uint32_t>(t % lcm_);
}

std::complex<double> AbelianGroup::character_value(uint64_t chi, uint64_t x) const {
    return unit_[phase(chi, x)];
}

namespace {

// One cyclic DFT pass along factor j; each line is independent.
void dft_pass(const AbelianGroup& g, std::vector<std::complex<double>>& data, size_t j,
              bool inverse, Exec exec) {
    const uint32_t m = g.orders()[j];
    if (m == 1) return;
    const uint64_t inner = [&] {
        uint64_t s = 1;
        for (size_t i = 0; i < j; ++i) s *= g.orders()[i];
        return s;
    }();
    const uint64_t lines = data.size() / m;
    const uint32_t L = g.phase_modulus();
    const uint32_t w = L / m; // root exponent step

    const int64_t line_count = static_cast<int64_t>(lines);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (int64_t line = 0; line < line_count; ++line) {
        // Line -> base offset: digits below j advance by 1, digits above by inner*m.
        uint64_t low = static_cast<uint64_t>(line) % inner;
        uint64_t high = static_cast<uint64_t>(line) / inner;
        uint64_t base = low + high * inner * m;
        std::vector<std::complex<double>> tmp(m);
        for (uint32_t a = 0; a < m; ++a) {
            std::complex<double> acc{0.0, 0.0};
            for (uint32_t x = 0; x < m; ++x) {
                uint32_t t = static_cast<uint32_t>(static_cast<uint64_t>(a) * x % m * w);
                std::complex<double> root = g.unit_root(t);
                if (inverse) root = std::conj(root);
                acc += data[base + inner * x] * root;
            }
            tmp[a] = acc;
        }
        for (uint32_t a = 0; a < m; ++a) data[base + inner * a] = tmp[a];
    }
}

} // namespace

void abelian_dft(const AbelianGroup& g, std::vector<std::complex<double>>& data, bool inverse,
                 Exec exec) {
    if (data.size() != g.order()) throw structure_error("dft data size must equal group order");
    for (size_t j = 0; j < g.rank(); ++j) dft_pass(g, data, j, inverse, exec);
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(g.order());
        for (auto& z : data) z *= scale;
    }
}

std::vector<std::complex<double>> abelian_dft_direct(const AbelianGroup& g,
                                                     std::span<const std::complex<double>> data,
                                                     bool inverse) {
    if (data.size() != g.order()) throw structure_error("dft data size must equal group order");
    std::vector<std::complex<double>> out(data.size());
    for (uint64_t a = 0; a < g.order(); ++a) {
        std::complex<double> acc{0.0, 0.0};
        for (uint64_t x = 0; x < g.order(); ++x) {
            std::complex<double> root = g.character_value(a, x);
            if (inverse) root = std::conj(root);
            acc += data[x] * root;
        }
        out[a] = inverse ? acc / static_cast<double>(g.order()) : acc;
    }
    return out;
}

} // namespace sieve
