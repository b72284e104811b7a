#include "spacs/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spacs/errors.hpp"
#include "spacs/special.hpp"

namespace spacs {

namespace {

// Sum of |c_n|^2 for n >= start given log|c_n|^2 as a function of n. The
// terms are eventually monotone decreasing, so we stop when they are both
// decreasing and negligible.
template <typename LogProb>
double tail_mass(std::size_t start, LogProb log_prob) {
    double total = 0.0;
    double prev = INFINITY;
    for (std::size_t n = start; n < start + 100000; ++n) {
        double p = std::exp(log_prob(n));
        total += p;
        if (p < prev && (p <= 1e-18 * total || p < 1e-300)) break;
        prev = p;
    }
    return total;
}

void check_tail(const char* what, double tail, const TruncationPolicy& policy) {
    if (tail > policy.tail_tolerance) {
        std::ostringstream os;
        os << what << ": probability mass " << tail << " above n=" << (policy.dim == 0 ? 0 : policy.dim - 1)
           << " exceeds tolerance " << policy.tail_tolerance;
        throw TruncationTooSmall(os.str(), tail);
    }
}

void check_dim(std::size_t dim) {
    if (dim == 0) throw InvalidArgument("basis dimension must be at least 1");
}

// Amplitude with log-magnitude `log_mag` and phase n*arg(alpha).
Complex polar_amp(double log_mag, double phase) {
    return std::polar(std::exp(log_mag), phase);
}

}  // namespace

FockVector::FockVector(Eigen::VectorXcd amps, double tail_mass)
    : amps_(std::move(amps)), tail_mass_(tail_mass) {
    check_dim(dim());
}

double FockVector::mean_photon_number() const {
    double n = 0.0;
    for (Eigen::Index k = 0; k < amps_.size(); ++k) n += static_cast<double>(k) * std::norm(amps_(k));
    return n;
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd elems) : elems_(std::move(elems)) {
    if (elems_.rows() != elems_.cols()) throw InvalidArgument("density matrix must be square");
    check_dim(dim());
    const double scale = std::max(1.0, elems_.cwiseAbs().maxCoeff());
    const double defect = (elems_ - elems_.adjoint()).cwiseAbs().maxCoeff();
    if (!(defect <= 1e-12 * scale)) {
        std::ostringstream os;
        os << "density matrix is not Hermitian (max |rho - rho^dag| = " << defect << ")";
        throw InvalidArgument(os.str());
    }
}

DensityMatrix DensityMatrix::from_pure(const FockVector& psi) {
    Eigen::MatrixXcd m = psi.amplitudes() * psi.amplitudes().adjoint();
    // Outer products are Hermitian up to rounding in the diagonal imaginary parts.
    m = 0.5 * (m + m.adjoint()).eval();
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::truncated(std::size_t d) const {
    if (d == 0 || d > dim()) throw IndexOutOfRange("truncation dimension out of range");
    const auto n = static_cast<Eigen::Index>(d);
    return DensityMatrix(elems_.topLeftCorner(n, n));
}

DensityMatrix DensityMatrix::padded(std::size_t d) const {
    if (d < dim()) throw IndexOutOfRange("padding dimension smaller than current dimension");
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    m.topLeftCorner(elems_.rows(), elems_.cols()) = elems_;
    return DensityMatrix(std::move(m));
}

Eigen::MatrixXcd annihilation_matrix(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

Eigen::MatrixXcd creation_matrix(std::size_t dim) {
    return annihilation_matrix(dim).adjoint();
}

Eigen::MatrixXcd number_matrix(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
    return m;
}

Eigen::MatrixXcd quadrature_matrix(double theta, std::size_t dim) {
    if (dim < 2) throw InvalidArgument("quadrature_matrix needs dim >= 2");
    const Eigen::MatrixXcd a = annihilation_matrix(dim);
    const Complex ph = std::polar(1.0, theta);
    return 0.5 * (a * std::conj(ph) + a.adjoint() * ph);
}

Complex expectation(const FockVector& psi, const Eigen::MatrixXcd& op) {
    return psi.amplitudes().dot(op * psi.amplitudes());
}

Complex expectation(const DensityMatrix& rho, const Eigen::MatrixXcd& op) {
    return (rho.elements() * op).trace();
}

FockVector make_coherent(Complex alpha, const TruncationPolicy& policy) {
    check_dim(policy.dim);
    const double r = std::abs(alpha);
    const double phase = std::arg(alpha);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(policy.dim));
    if (r == 0.0) {
        c(0) = 1.0;
        return FockVector(std::move(c), 0.0);
    }
    const double log_r = std::log(r);
    auto log_prob = [&](std::size_t n) -> double {
        const double k = static_cast<double>(n);
        return -r * r + 2.0 * k * log_r - log_factorial(static_cast<int>(n));
    };
    for (std::size_t n = 0; n < policy.dim; ++n)
        c(static_cast<Eigen::Index>(n)) = polar_amp(0.5 * log_prob(n), static_cast<double>(n) * phase);
    const double tail = tail_mass(policy.dim, log_prob);
    check_tail("make_coherent", tail, policy);
    return FockVector(std::move(c), tail);
}

FockVector make_fock(std::size_t n, const TruncationPolicy& policy) {
    check_dim(policy.dim);
    if (n >= policy.dim) {
        std::ostringstream os;
        os << "Fock index " << n << " does not fit in dimension " << policy.dim;
        throw IndexOutOfRange(os.str());
    }
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(policy.dim));
    c(static_cast<Eigen::Index>(n)) = 1.0;
    return FockVector(std::move(c), 0.0);
}

FockVector make_pacs(Complex alpha, int m, const TruncationPolicy& policy) {
    check_dim(policy.dim);
    if (m < 0) throw InvalidArgument("photon-addition order must be non-negative");
    const double r = std::abs(alpha);
    const double phase = std::arg(alpha);
    const auto mu = static_cast<std::size_t>(m);
    // log k^2 = -log(m! L_m(-|alpha|^2))
    const double log_norm = -(log_factorial(m) + std::log(laguerre(m, -r * r)));
    const double log_r = r > 0.0 ? std::log(r) : -INFINITY;

    // |c_{k+m}|^2 = k^2 e^{-r^2} r^{2k} (k+m)! / (k!)^2
    auto log_prob = [&](std::size_t n) -> double {
        if (n < mu) return -INFINITY;
        const auto k = static_cast<int>(n - mu);
        if (r == 0.0) return k == 0 ? 0.0 : -INFINITY;
        return log_norm - r * r + 2.0 * k * log_r + log_factorial(k + m) - 2.0 * log_factorial(k);
    };

    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(policy.dim));
    for (std::size_t n = mu; n < policy.dim; ++n) {
        const double lp = log_prob(n);
        if (std::isinf(lp)) continue;
        c(static_cast<Eigen::Index>(n)) = polar_amp(0.5 * lp, static_cast<double>(n - mu) * phase);
    }
    const double tail = policy.dim <= mu ? 1.0 : tail_mass(std::max(policy.dim, mu), log_prob);
    check_tail("make_pacs", tail, policy);
    return FockVector(std::move(c), tail);
}

FockVector make_spacs(Complex alpha, const TruncationPolicy& policy) {
    check_dim(policy.dim);
    const double r = std::abs(alpha);
    const double phase = std::arg(alpha);
    const double log_pref = -0.5 * r * r - 0.5 * std::log1p(r * r);
    const double log_r = r > 0.0 ? std::log(r) : -INFINITY;

    // c_{n+1} = e^{-r^2/2}/sqrt(1+r^2) * alpha^n sqrt(n+1)/sqrt(n!)
    auto log_amp = [&](std::size_t idx) -> double {
        if (idx == 0) return -INFINITY;
        const auto n = static_cast<int>(idx - 1);
        if (r == 0.0) return n == 0 ? log_pref : -INFINITY;
        return log_pref + n * log_r + 0.5 * std::log(n + 1.0) - 0.5 * log_factorial(n);
    };

    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(policy.dim));
    for (std::size_t idx = 1; idx < policy.dim; ++idx) {
        const double la = log_amp(idx);
        if (std::isinf(la)) continue;
        c(static_cast<Eigen::Index>(idx)) = polar_amp(la, static_cast<double>(idx - 1) * phase);
    }
    const double tail = policy.dim < 2 ? 1.0 : tail_mass(policy.dim, [&](std::size_t n) { return 2.0 * log_amp(n); });
    check_tail("make_spacs", tail, policy);
    return FockVector(std::move(c), tail);
}

DensityMatrix spacs_density(Complex alpha, const TruncationPolicy& policy) {
    check_dim(policy.dim);
    const double r = std::abs(alpha);
    const double phase = std::arg(alpha);
    const double log_pref = -r * r - std::log1p(r * r);
    const double log_r = r > 0.0 ? std::log(r) : -INFINITY;

    // log |rho_ii| for the tail estimate
    auto log_diag = [&](std::size_t i) -> double {
        if (i == 0) return -INFINITY;
        if (r == 0.0) return i == 1 ? 0.0 : -INFINITY;
        const auto ii = static_cast<int>(i);
        return log_pref + 2.0 * std::log(static_cast<double>(i)) - log_factorial(ii) + 2.0 * (ii - 1) * log_r;
    };
    const double tail = policy.dim < 2 ? 1.0 : tail_mass(policy.dim, log_diag);
    check_tail("spacs_density", tail, policy);

    const auto d = static_cast<Eigen::Index>(policy.dim);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 1; i < d; ++i) {
        for (Eigen::Index j = 1; j < d; ++j) {
            if (r == 0.0) {
                if (i == 1 && j == 1) rho(i, j) = 1.0;
                continue;
            }
            const double log_mag = log_pref + std::log(static_cast<double>(i * j))
                                   - 0.5 * (log_factorial(static_cast<int>(i)) + log_factorial(static_cast<int>(j)))
                                   + static_cast<double>(i + j - 2) * log_r;
            rho(i, j) = std::polar(std::exp(log_mag), static_cast<double>(i - j) * phase);
        }
    }
    return DensityMatrix(std::move(rho));
}

double spacs_mean_photon_number(double abs_alpha) {
    const double a2 = abs_alpha * abs_alpha;
    return 1.0 + a2 * (2.0 + a2) / (1.0 + a2);
}

}  // namespace spacs
