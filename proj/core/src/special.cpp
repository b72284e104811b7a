#include "spacs/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace spacs {

double laguerre(int m, double x) {
    return assoc_laguerre(m, 0, x);
}

double assoc_laguerre(int m, int k, double x) {
    if (m <= 0) return 1.0;
    double prev = 1.0;
    double cur = 1.0 + k - x;
    for (int n = 1; n < m; ++n) {
        double next = ((2.0 * n + 1.0 + k - x) * cur - (n + k) * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

constexpr int kFactTable = 64;

const std::array<double, kFactTable>& log_fact_table() {
    static const std::array<double, kFactTable> table = [] {
        std::array<double, kFactTable> t{};
        t[0] = 0.0;
        for (int n = 1; n < kFactTable; ++n) t[n] = t[n - 1] + std::log(static_cast<double>(n));
        return t;
    }();
    return table;
}

}  // namespace

double log_factorial(int n) {
    if (n < kFactTable) return log_fact_table()[static_cast<std::size_t>(n)];
    return std::lgamma(n + 1.0);
}

double log_binomial(int n, int k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

void oscillator_wavefunctions(double x, std::span<double> out) {
    if (out.empty()) return;
    const double q = std::numbers::sqrt2 * x;
    out[0] = std::pow(2.0 / std::numbers::pi, 0.25) * std::exp(-x * x);
    if (out.size() == 1) return;
    out[1] = std::numbers::sqrt2 * q * out[0];
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        const double dn = static_cast<double>(n);
        out[n + 1] = (std::numbers::sqrt2 * q * out[n] - std::sqrt(dn) * out[n - 1]) / std::sqrt(dn + 1.0);
    }
}

std::vector<double> oscillator_wavefunctions(double x, std::size_t count) {
    std::vector<double> out(count);
    oscillator_wavefunctions(x, out);
    return out;
}

}  // namespace spacs
