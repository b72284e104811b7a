#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace spacs {

using Complex = std::complex<double>;

// Basis truncation for state constructors. Every constructor computes the
// probability mass that would fall at or above `dim` and throws
// TruncationTooSmall if it exceeds `tail_tolerance`.
struct TruncationPolicy {
    std::size_t dim = 30;
    double tail_tolerance = 1e-10;
};

// Pure state over the truncated number basis |0>..|dim-1>.
class FockVector {
public:
    explicit FockVector(Eigen::VectorXcd amps, double tail_mass = 0.0);

    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    Complex operator[](std::size_t n) const { return amps_(static_cast<Eigen::Index>(n)); }

    // Probability mass above dim-1 that the constructor knows it dropped.
    double tail_mass() const { return tail_mass_; }
    double norm_squared() const { return amps_.squaredNorm(); }
    double mean_photon_number() const;

private:
    Eigen::VectorXcd amps_;
    double tail_mass_;
};

// Hermitian matrix in the number basis. Construction checks Hermiticity to
// 1e-12 (absolute, scaled by the largest element when that exceeds one).
// Positivity is not enforced: reconstructed matrices may violate it.
class DensityMatrix {
public:
    explicit DensityMatrix(Eigen::MatrixXcd elems);

    static DensityMatrix from_pure(const FockVector& psi);

    std::size_t dim() const { return static_cast<std::size_t>(elems_.rows()); }
    const Eigen::MatrixXcd& elements() const { return elems_; }
    Complex operator()(std::size_t i, std::size_t j) const {
        return elems_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    double trace() const { return elems_.trace().real(); }

    // Upper-left `dim` block. No renormalization.
    DensityMatrix truncated(std::size_t dim) const;

    // Zero-padded to a larger basis.
    DensityMatrix padded(std::size_t dim) const;

    Eigen::VectorXd photon_distribution() const { return elems_.diagonal().real(); }

private:
    Eigen::MatrixXcd elems_;
};

// Matrix of a in the truncated basis (a|n> = sqrt(n)|n-1>).
Eigen::MatrixXcd annihilation_matrix(std::size_t dim);
Eigen::MatrixXcd creation_matrix(std::size_t dim);
Eigen::MatrixXcd number_matrix(std::size_t dim);

// x_theta = (a e^{-i theta} + a^dag e^{i theta}) / 2. Vacuum variance 1/4,
// [x, y] = i/2. Every module shares this quadrature convention.
Eigen::MatrixXcd quadrature_matrix(double theta, std::size_t dim);

// <psi|op|psi> and Tr(rho op).
Complex expectation(const FockVector& psi, const Eigen::MatrixXcd& op);
Complex expectation(const DensityMatrix& rho, const Eigen::MatrixXcd& op);

FockVector make_coherent(Complex alpha, const TruncationPolicy& policy);
FockVector make_fock(std::size_t n, const TruncationPolicy& policy);

// Photon-added coherent state |alpha, m> = k (a^dag)^m |alpha> with
// k = [m! L_m(-|alpha|^2)]^{-1/2}.
FockVector make_pacs(Complex alpha, int m, const TruncationPolicy& policy);

// Single-photon-added coherent state, from its closed-form number expansion.
FockVector make_spacs(Complex alpha, const TruncationPolicy& policy);

// rho_ij = i j / sqrt(i! j!) * e^{-|alpha|^2} / (1+|alpha|^2) * alpha^{i-1} conj(alpha)^{j-1}
DensityMatrix spacs_density(Complex alpha, const TruncationPolicy& policy);

// Mean photon number of the SPACS, 1 + |alpha|^2 (2+|alpha|^2)/(1+|alpha|^2).
double spacs_mean_photon_number(double abs_alpha);

}  // namespace spacs
