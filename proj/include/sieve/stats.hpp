#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sieve {

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

// Wilson score interval for a binomial proportion.
WilsonInterval wilson_ci(uint64_t successes, uint64_t trials, double confidence = 0.99);

// p-value of the chi-square goodness-of-fit test against the uniform
// distribution over the observed categories.
double chi_square_uniform_pvalue(std::span<const uint64_t> counts);

// p-value of the chi-square independence test on a contingency table.
double chi_square_independence_pvalue(const std::vector<std::vector<uint64_t>>& table);

// Exact binomial upper tail P(X >= k) for X ~ Bin(n, p).
double binomial_upper_tail(uint64_t k, uint64_t n, double p);

} // namespace sieve
