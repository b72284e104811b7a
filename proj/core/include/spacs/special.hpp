#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spacs {

// Laguerre polynomial L_m(x), three-term recurrence.
double laguerre(int m, double x);

// Associated Laguerre polynomial L_m^{(k)}(x).
double assoc_laguerre(int m, int k, double x);

// log(n!) via lgamma; exact table for small n.
double log_factorial(int n);

// log C(n, k).
double log_binomial(int n, int k);

// Number-state wavefunctions psi_0..psi_{count-1} at x in the quadrature
// convention x = (a + a^dag)/2, i.e. vacuum variance 1/4:
//
//   psi_n(x) = (2/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2) x) exp(-x^2)
//
// Computed with the normalized upward recurrence, which is stable for the
// regular solution.
void oscillator_wavefunctions(double x, std::span<double> out);
std::vector<double> oscillator_wavefunctions(double x, std::size_t count);

}  // namespace spacs
