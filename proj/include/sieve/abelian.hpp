#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace sieve {

enum class Exec { serial, parallel };

// Finite abelian group presented as a product of cyclic factors. Elements and
// characters are both addressed by mixed-radix indices over the factor orders.
// chi_a(x) = exp(2*pi*i * sum_j a_j x_j / m_j).
class AbelianGroup {
public:
    AbelianGroup() = default;
    explicit AbelianGroup(std::vector<uint32_t> orders);
    // (Z/c)^m
    static AbelianGroup power(uint32_t c, size_t m);

    const std::vector<uint32_t>& orders() const { return orders_; }
    uint64_t order() const { return order_; }
    size_t rank() const { return orders_.size(); }
    uint32_t phase_modulus() const { return lcm_; }

    std::vector<uint32_t> decode(uint64_t index) const;
    uint64_t encode(std::span<const uint32_t> digits) const;
    uint64_t add(uint64_t a, uint64_t b) const;
    uint64_t negate(uint64_t a) const;

    // Phase numerator of chi_a(x) as a residue mod phase_modulus().
    uint32_t phase(uint64_t chi, uint64_t x) const;
    std::complex<double> character_value(uint64_t chi, uint64_t x) const;

    // exp(2*pi*i*t/L) with the four quarter-circle values exact.
    std::complex<double> unit_root(uint32_t t) const { return unit_[t]; }

    bool operator==(const AbelianGroup& o) const { return orders_ == o.orders_; }

private:
    std::vector<uint32_t> orders_;
    std::vector<uint64_t> strides_;
    std::vector<uint32_t> lcm_factor_; // L / m_j
    uint64_t order_ = 1;
    uint32_t lcm_ = 1;
    std::vector<std::complex<double>> unit_;
};

// Multidimensional DFT over the group, one cyclic pass per factor:
//   forward:  F(a) = sum_x f(x) chi_a(x)
//   inverse:  f(x) = |G|^{-1} sum_a F(a) conj(chi_a(x))
// Cost O(|G| * sum_j m_j); lines within a pass are independent and run in
// parallel under Exec::parallel with bit-identical results.
void abelian_dft(const AbelianGroup& g, std::vector<std::complex<double>>& data,
                 bool inverse, Exec exec = Exec::parallel);

// Quadratic-time reference transform used as an independent oracle in tests.
std::vector<std::complex<double>> abelian_dft_direct(const AbelianGroup& g,
                                                     std::span<const std::complex<double>> data,
                                                     bool inverse);

} // namespace sieve
