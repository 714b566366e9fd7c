#include "sieve/stats.hpp"

#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "sieve/errors.hpp"

namespace sieve {

WilsonInterval wilson_ci(uint64_t successes, uint64_t trials, double confidence) {
    if (trials == 0) throw structure_error("confidence interval needs trials > 0");
    if (successes > trials) throw structure_error("successes cannot exceed trials");
    boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 0.5 + confidence / 2.0);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double chi_square_uniform_pvalue(std::span<const uint64_t> counts) {
    if (counts.size() < 2) throw structure_error("chi-square needs at least two categories");
    uint64_t total = 0;
    for (uint64_t c : counts) total += c;
    if (total == 0) throw structure_error("chi-square needs observations");
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (uint64_t c : counts) {
        double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    boost::math::chi_squared_distribution<double> chi(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(chi, stat));
}

double chi_square_independence_pvalue(const std::vector<std::vector<uint64_t>>& table) {
    const size_t rows = table.size();
    if (rows < 2 || table[0].size() < 2)
        throw structure_error("independence test needs a 2x2 table at least");
    const size_t cols = table[0].size();
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < cols; ++c) {
            row_sum[r] += static_cast<double>(table[r][c]);
            col_sum[c] += static_cast<double>(table[r][c]);
            total += static_cast<double>(table[r][c]);
        }
    }
    double stat = 0.0;
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < cols; ++c) {
            double expected = row_sum[r] * col_sum[c] / total;
            double d = static_cast<double>(table[r][c]) - expected;
            stat += d * d / expected;
        }
    }
    boost::math::chi_squared_distribution<double> chi(
        static_cast<double>((rows - 1) * (cols - 1)));
    return boost::math::cdf(boost::math::complement(chi, stat));
}

double binomial_upper_tail(uint64_t k, uint64_t n, double p) {
    if (k == 0) return 1.0;
    boost::math::binomial_distribution<double> bin(static_cast<double>(n), p);
    // P(X >= k) = 1 - P(X <= k-1)
    return boost::math::cdf(boost::math::complement(bin, static_cast<double>(k - 1)));
}

} // namespace sieve
