#include "spacs/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "spacs/errors.hpp"
#include "spacs/parallel.hpp"

namespace spacs {

namespace {

namespace mp = boost::multiprecision;
using Float100 = mp::number<mp::cpp_bin_float<100>, mp::et_off>;
using Float250 = mp::number<mp::cpp_bin_float<250>, mp::et_off>;

// All f_{nm}, n >= m, n < dim at x, in pair order. The whole ladder runs in
// precision T; only the final values are rounded to double.
template <typename T>
void pattern_row(double x, std::size_t dim, std::span<double> out) {
    using std::sqrt;
    using std::exp;
    const T pi = boost::math::constants::pi<T>();
    const T root2 = sqrt(T(2));
    const T q = root2 * T(x);
    const T q2 = q * q;

    // Dawson integral D(q) = e^{-q^2} sum_k q^{2k+1} / (k! (2k+1)); every
    // term is positive, so the sum carries full relative precision.
    T sum = 0;
    if (q != 0) {
        const T eps = std::numeric_limits<T>::epsilon();
        T power = q;  // q^{2k+1} / k!
        for (int k = 0;; ++k) {
            const T term = power / T(2 * k + 1);
            sum += term;
            if (k > q2 && term < eps * sum) break;
            power *= q2 / T(k + 1);
        }
    }
    const T dawson = exp(-q2) * sum;

    // Scaled solutions: psi~ = psi e^{q^2/2}, phi~ = phi e^{-q^2/2}; their
    // products are the products of the true functions.
    const std::size_t levels = dim + 1;
    std::vector<T> psi(levels + 1), phi(levels + 1);
    const T pi_q = sqrt(sqrt(pi));
    psi[0] = T(1) / pi_q;
    psi[1] = root2 * q * psi[0];
    phi[0] = T(2) * pi_q * dawson;
    phi[1] = root2 * pi_q * (T(2) * q * dawson - T(1));
    for (std::size_t n = 1; n < levels; ++n) {
        const T sn = sqrt(T(static_cast<unsigned>(n)));
        const T sn1 = sqrt(T(static_cast<unsigned>(n + 1)));
        psi[n + 1] = (root2 * q * psi[n] - sn * psi[n - 1]) / sn1;
        phi[n + 1] = (root2 * q * phi[n] - sn * phi[n - 1]) / sn1;
    }

    // d/dq (psi_m phi_n) with g' = q g - sqrt(2(k+1)) g_{k+1} for both
    // solutions. The scaled values are O(q^{+-n}), so the three-term
    // combination loses only ~log10(q^2) digits and is done in double.
    std::vector<double> ps(levels + 1), ph(levels + 1);
    for (std::size_t n = 0; n <= levels; ++n) {
        ps[n] = static_cast<double>(psi[n]);
        ph[n] = static_cast<double>(phi[n]);
    }
    const double qd = static_cast<double>(q);
    for (std::size_t n = 0; n < dim; ++n) {
        const double cn = std::sqrt(2.0 * static_cast<double>(n + 1));
        for (std::size_t m = 0; m <= n; ++m) {
            const double cm = std::sqrt(2.0 * static_cast<double>(m + 1));
            out[PatternFunctionTable::pair(n, m)] =
                2.0 * qd * ps[m] * ph[n] - cm * ps[m + 1] * ph[n] - cn * ps[m] * ph[n + 1];
        }
    }
}

// Decimal digits the upward recurrence for phi can lose at |x| <= x_abs.
double digits_lost(std::size_t dim, double x_abs) {
    const double q2 = 2.0 * x_abs * x_abs;
    return static_cast<double>(dim + 1) * std::log10(2.0 * q2 + 2.0) + 10.0;
}

void pattern_row_auto(double x, std::size_t dim, std::span<double> out) {
    const double lost = digits_lost(dim, std::abs(x));
    if (lost < 80.0) {
        pattern_row<Float100>(x, dim, out);
    } else if (lost < 230.0) {
        pattern_row<Float250>(x, dim, out);
    } else {
        std::ostringstream os;
        os << "pattern functions for dim " << dim << " at |x| = " << std::abs(x) << " exceed supported precision";
        throw InvalidArgument(os.str());
    }
}

// Four-point Lagrange weights on nodes -1, 0, 1, 2.
void cubic_weights(double t, double w[4]) {
    w[0] = -t * (t - 1) * (t - 2) / 6.0;
    w[1] = (t + 1) * (t - 1) * (t - 2) / 2.0;
    w[2] = -(t + 1) * t * (t - 2) / 2.0;
    w[3] = (t + 1) * t * (t - 1) / 6.0;
}

constexpr double kPhaseEps = 1e-12;

}  // namespace

PatternGridSpec PatternGridSpec::default_for(std::size_t dim) {
    return PatternGridSpec{6.0 + std::sqrt(static_cast<double>(dim) + 0.5), 1.0 / 512.0};
}

PatternFunctionTable::PatternFunctionTable(std::size_t dim, PatternGridSpec grid, std::vector<double> values)
    : dim_(dim), grid_(grid), values_(std::move(values)) {
    if (dim_ == 0) throw InvalidArgument("pattern table needs dim >= 1");
    if (!(grid_.spacing > 0.0) || !(grid_.x_max > 4.0 * grid_.spacing))
        throw InvalidArgument("pattern grid range too small for its spacing");
    const double half = std::round(grid_.x_max / grid_.spacing);
    grid_.x_max = half * grid_.spacing;
    n_nodes_ = 2 * static_cast<std::size_t>(half) + 1;
    if (values_.size() != n_pairs() * n_nodes_) throw InvalidArgument("pattern table size mismatch");
}

double PatternFunctionTable::operator()(std::size_t n, std::size_t m, double x) const {
    const double t = (x + grid_.x_max) / grid_.spacing;
    const auto i = static_cast<std::size_t>(std::floor(t));
    double w[4];
    cubic_weights(t - static_cast<double>(i), w);
    const double* row = &values_[pair(n, m) * n_nodes_ + i - 1];
    return w[0] * row[0] + w[1] * row[1] + w[2] * row[2] + w[3] * row[3];
}

void PatternFunctionTable::evaluate_all(double x, std::span<double> out) const {
    const double t = (x + grid_.x_max) / grid_.spacing;
    const auto i = static_cast<std::size_t>(std::floor(t));
    double w[4];
    cubic_weights(t - static_cast<double>(i), w);
    const std::size_t np = n_pairs();
    for (std::size_t p = 0; p < np; ++p) {
        const double* row = &values_[p * n_nodes_ + i - 1];
        out[p] = w[0] * row[0] + w[1] * row[1] + w[2] * row[2] + w[3] * row[3];
    }
}

double pattern_function(std::size_t n, std::size_t m, double x) {
    const std::size_t dim = std::max(n, m) + 1;
    std::vector<double> row(dim * (dim + 1) / 2);
    // The ladder assumes q >= 0; negative x follows from parity.
    pattern_row_auto(std::abs(x), dim, row);
    const double sign = (x < 0.0 && (n + m) % 2 == 1) ? -1.0 : 1.0;
    return sign * row[PatternFunctionTable::pair(n, m)];
}

PatternFunctionTable build_pattern_functions(std::size_t dim, PatternGridSpec grid, const PatternBuildOptions& options) {
    if (dim == 0) throw InvalidArgument("pattern table needs dim >= 1");
    if (grid.x_max <= 0.0) grid = PatternGridSpec::default_for(dim);
    const double half = std::round(grid.x_max / grid.spacing);
    grid.x_max = half * grid.spacing;
    const auto n_half = static_cast<std::size_t>(half);
    const std::size_t n_nodes = 2 * n_half + 1;
    const std::size_t n_pairs = dim * (dim + 1) / 2;
    std::vector<double> values(n_pairs * n_nodes);

    // Non-negative nodes are computed; negative ones follow from parity.
    parallel_for(n_half + 1, options.workers, [&](std::size_t k) {
        std::vector<double> row(n_pairs);
        const double x = static_cast<double>(k) * grid.spacing;
        pattern_row_auto(x, dim, row);
        for (std::size_t n = 0; n < dim; ++n) {
            for (std::size_t m = 0; m <= n; ++m) {
                const std::size_t p = PatternFunctionTable::pair(n, m);
                const double sign = ((n + m) % 2 == 0) ? 1.0 : -1.0;
                values[p * n_nodes + n_half + k] = row[p];
                values[p * n_nodes + n_half - k] = sign * row[p];
            }
        }
    });

    PatternFunctionTable table(dim, grid, std::move(values));
    if (options.validate) validate_pattern_functions(table);
    return table;
}

void validate_pattern_functions(const PatternFunctionTable& table, double tolerance) {
    const std::size_t dim = table.dim();
    const std::size_t k = std::max<std::size_t>(2 * dim + 2, 16);
    std::vector<double> phases(k);
    for (std::size_t j = 0; j < k; ++j) phases[j] = std::numbers::pi * static_cast<double>(j) / static_cast<double>(k);

    const TruncationPolicy wide{dim + 40, 1e-14};
    struct Case {
        const char* name;
        MarginalDistribution dist;
        DensityMatrix exact;
    };
    const std::vector<Case> cases = {
        {"vacuum", marginal_coherent(0.0), DensityMatrix::from_pure(make_fock(0, {std::max<std::size_t>(dim, 2)}))},
        {"single photon", marginal_spacs_lossy(0.0, EfficiencyModel(1.0)),
         DensityMatrix::from_pure(make_fock(1, {std::max<std::size_t>(dim, 2)}))},
        {"coherent 0.5", marginal_coherent(0.5), DensityMatrix::from_pure(make_coherent(0.5, wide))},
        {"coherent 0.7", marginal_coherent(0.7), DensityMatrix::from_pure(make_coherent(0.7, wide))},
    };
    for (const auto& c : cases) {
        const DensityMatrix rec = reconstruct_from_marginal(c.dist, phases, table);
        double worst = 0.0;
        for (std::size_t n = 0; n < dim; ++n)
            for (std::size_t m = 0; m < dim; ++m) worst = std::max(worst, std::abs(rec(n, m) - c.exact(n, m)));
        if (worst > tolerance) {
            std::ostringstream os;
            os << "pattern-function validation failed on " << c.name << ": max element error " << worst
               << " > " << tolerance;
            throw GridTooCoarse(os.str());
        }
    }
}

std::vector<double> phase_weights(std::span<const double> phases) {
    const std::size_t k = phases.size();
    if (k == 0) return {};
    if (k == 1) return {1.0};
    const double pi = std::numbers::pi;
    std::vector<double> w(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double prev = j == 0 ? phases[k - 1] - pi : phases[j - 1];
        const double next = j + 1 == k ? phases[0] + pi : phases[j + 1];
        w[j] = 0.5 * (next - prev) / pi;
    }
    return w;
}

namespace {

// Folds theta into [0, pi) using x_{theta+pi} = -x_theta.
std::pair<double, double> fold_phase(double theta, double x) {
    const double pi = std::numbers::pi;
    double t = std::fmod(theta, 2.0 * pi);
    if (t < 0.0) t += 2.0 * pi;
    if (t >= pi - kPhaseEps) {
        t -= pi;
        x = -x;
    }
    if (t < kPhaseEps) t = 0.0;
    return {t, x};
}

Eigen::MatrixXcd assemble(std::size_t dim, std::span<const double> phases, std::span<const double> weights,
                          const std::vector<std::vector<double>>& means) {
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t j = 0; j < phases.size(); ++j) {
        for (std::size_t n = 0; n < dim; ++n) {
            for (std::size_t m = 0; m <= n; ++m) {
                const double f = means[j][PatternFunctionTable::pair(n, m)];
                const Complex v = weights[j] * f * std::polar(1.0, static_cast<double>(n - m) * phases[j]);
                rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) += v;
                if (n != m) rho(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) += std::conj(v);
            }
        }
    }
    return rho;
}

}  // namespace

ReconstructionResult reconstruct(std::span<const QuadratureSample> samples, const PatternFunctionTable& table,
                                 const ReconstructOptions& options) {
    struct Group {
        double theta;
        std::vector<double> x;
    };
    std::vector<Group> groups;
    {
        std::vector<std::pair<double, double>> folded;
        folded.reserve(samples.size());
        for (const auto& s : samples)
            if (s.role == options.role) folded.push_back(fold_phase(s.theta, s.x));
        std::stable_sort(folded.begin(), folded.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [t, x] : folded) {
            if (groups.empty() || t - groups.back().theta > kPhaseEps) groups.push_back({t, {}});
            groups.back().x.push_back(x);
        }
    }

    if (groups.size() < 3) {
        std::ostringstream os;
        os << "reconstruction needs samples at >= 3 distinct phases, got " << groups.size();
        throw InsufficientPhaseCoverage(os.str());
    }
    std::vector<double> phases(groups.size());
    for (std::size_t j = 0; j < groups.size(); ++j) phases[j] = groups[j].theta;
    for (std::size_t j = 0; j < phases.size(); ++j) {
        const double next = j + 1 == phases.size() ? phases[0] + std::numbers::pi : phases[j + 1];
        if (next - phases[j] > options.max_phase_gap + kPhaseEps) {
            std::ostringstream os;
            os << "phase gap " << next - phases[j] << " rad after theta = " << phases[j] << " exceeds "
               << options.max_phase_gap;
            throw InsufficientPhaseCoverage(os.str());
        }
    }
    const auto weights = phase_weights(phases);

    const std::size_t np = table.n_pairs();
    std::vector<std::vector<double>> means(groups.size(), std::vector<double>(np, 0.0));
    std::vector<std::vector<double>> variances(groups.size(), std::vector<double>(np, 0.0));
    std::vector<std::size_t> used(groups.size(), 0);

    parallel_for(groups.size(), options.workers, [&](std::size_t j) {
        std::vector<double> f(np), sum(np, 0.0), sum2(np, 0.0);
        std::size_t n_used = 0;
        for (double x : groups[j].x) {
            if (!table.in_range(x)) continue;
            table.evaluate_all(x, f);
            for (std::size_t p = 0; p < np; ++p) {
                sum[p] += f[p];
                sum2[p] += f[p] * f[p];
            }
            ++n_used;
        }
        used[j] = n_used;
        if (n_used == 0) return;
        const double inv = 1.0 / static_cast<double>(n_used);
        for (std::size_t p = 0; p < np; ++p) {
            means[j][p] = sum[p] * inv;
            variances[j][p] = std::max(0.0, sum2[p] * inv - means[j][p] * means[j][p]);
        }
    });

    std::size_t total_used = 0, total = 0;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        total += groups[j].x.size();
        total_used += used[j];
        if (used[j] == 0) throw InsufficientPhaseCoverage("a phase has no samples inside the pattern-function range");
    }

    const std::size_t dim = table.dim();
    Eigen::MatrixXcd rho = assemble(dim, phases, weights, means);
    const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
    const double change = (herm - rho).cwiseAbs().maxCoeff();

    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t n = 0; n < dim; ++n) {
        for (std::size_t m = 0; m <= n; ++m) {
            const std::size_t p = PatternFunctionTable::pair(n, m);
            double var = 0.0;
            for (std::size_t j = 0; j < groups.size(); ++j)
                var += weights[j] * weights[j] * variances[j][p] / static_cast<double>(used[j]);
            sigma(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) = std::sqrt(var);
            sigma(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = std::sqrt(var);
        }
    }

    ReconstructionResult result{DensityMatrix(herm), std::move(sigma), 0, 0, 0, {}, 0.0};
    result.n_samples = total_used;
    result.n_rejected = total - total_used;
    result.n_phases = groups.size();
    result.phases = std::move(phases);
    result.hermitization_change = change;
    return result;
}

DensityMatrix reconstruct_from_marginal(const MarginalDistribution& dist, std::span<const double> phases,
                                        const PatternFunctionTable& table) {
    if (phases.empty()) throw InsufficientPhaseCoverage("no phases given");
    std::vector<double> sorted(phases.begin(), phases.end());
    for (double& t : sorted) t = fold_phase(t, 0.0).first;
    std::sort(sorted.begin(), sorted.end());
    const auto weights = phase_weights(sorted);

    const std::size_t np = table.n_pairs();
    const std::size_t nodes = table.n_nodes();
    const double h = table.grid().spacing;
    std::vector<std::vector<double>> means(sorted.size(), std::vector<double>(np, 0.0));
    parallel_for(sorted.size(), 0, [&](std::size_t j) {
        std::vector<double> p(nodes);
        for (std::size_t k = 0; k < nodes; ++k) p[k] = dist(table.node(k), sorted[j]);
        for (std::size_t pr = 0; pr < np; ++pr) {
            const auto f = table.row(pr);
            double acc = 0.5 * (p.front() * f.front() + p.back() * f.back());
            for (std::size_t k = 1; k + 1 < nodes; ++k) acc += p[k] * f[k];
            means[j][pr] = acc * h;
        }
    });
    Eigen::MatrixXcd rho = assemble(table.dim(), sorted, weights, means);
    return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

double purity(const DensityMatrix& rho) {
    const Complex tr = (rho.elements() * rho.elements()).trace();
    if (std::abs(tr.imag()) > 1e-10) {
        std::ostringstream os;
        os << "Tr(rho^2) has imaginary part " << tr.imag();
        throw InvalidArgument(os.str());
    }
    return tr.real();
}

FidelityResult fidelity(const DensityMatrix& rho_c, const DensityMatrix& rho_e) {
    if (rho_c.dim() != rho_e.dim()) throw InvalidArgument("fidelity needs matrices of equal dimension");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ec(rho_c.elements());
    const Eigen::VectorXd lc = ec.eigenvalues();
    if (lc.minCoeff() < -1e-10) {
        std::ostringstream os;
        os << "theory state has eigenvalue " << lc.minCoeff();
        throw TheoryNotPSD(os.str());
    }
    const Eigen::VectorXd sqrt_lc = lc.cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXcd root = ec.eigenvectors() * sqrt_lc.asDiagonal() * ec.eigenvectors().adjoint();
    Eigen::MatrixXcd inner = root * rho_e.elements() * root;
    inner = 0.5 * (inner + inner.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ei(inner, Eigen::EigenvaluesOnly);
    FidelityResult out;
    // Eigenvalues within rounding of zero are zero: sqrt would turn noise of
    // 1e-17 into a 3e-9 contribution per level.
    const double zero = 1e-12 * std::max(1.0, ei.eigenvalues().cwiseAbs().maxCoeff());
    double tr = 0.0;
    for (Eigen::Index k = 0; k < ei.eigenvalues().size(); ++k) {
        const double l = ei.eigenvalues()(k);
        if (l > zero)
            tr += std::sqrt(l);
        else if (l < -zero)
            out.dropped_negative_mass += -l;
    }
    out.value = tr * tr;
    out.exceeds_unity = out.value > 1.0;
    return out;
}

DensityMatrix clip_to_psd(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.elements());
    const Eigen::VectorXd l = es.eigenvalues().cwiseMax(0.0);
    if (!(l.sum() > 0.0)) throw InvalidArgument("matrix has no positive spectrum");
    Eigen::MatrixXcd m = es.eigenvectors() * (l * (rho.trace() / l.sum())).asDiagonal() * es.eigenvectors().adjoint();
    return DensityMatrix(0.5 * (m + m.adjoint()));
}

ElementAgreement agreement_within_sigma(const ReconstructionResult& result, const DensityMatrix& rho_c, double k) {
    const std::size_t dim = result.rho.dim();
    if (rho_c.dim() != dim) throw InvalidArgument("agreement check needs matrices of equal dimension");
    ElementAgreement out;
    for (std::size_t n = 0; n < dim; ++n) {
        for (std::size_t m = 0; m < dim; ++m) {
            const double diff = std::abs(result.rho(n, m) - rho_c(n, m));
            const double s = result.sigma(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
            ++out.total;
            if (diff <= k * s) ++out.within;
        }
    }
    return out;
}

namespace {

struct VarianceEstimate {
    double var;
    double se;
};

VarianceEstimate sample_variance(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    if (xs.size() < 4) throw InvalidArgument("variance estimate needs at least 4 samples");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    const double var = m2 / (n - 1.0);
    m4 /= n;
    const double pop = m2 / n;
    return {var, std::sqrt(std::max(0.0, m4 - pop * pop) / n)};
}

SqueezingReport make_report(double v0, double v90, double se0, double se90) {
    return {v0, v90, se0, se90, (0.25 - v0) / 0.25 * 100.0};
}

}  // namespace

SqueezingReport squeezing_report(std::span<const QuadratureSample> samples, FrameRole role) {
    std::vector<double> at0, at90;
    const double half_pi = 0.5 * std::numbers::pi;
    for (const auto& s : samples) {
        if (s.role != role) continue;
        const auto [t, x] = fold_phase(s.theta, s.x);
        if (std::abs(t) <= 1e-9)
            at0.push_back(x);
        else if (std::abs(t - half_pi) <= 1e-9)
            at90.push_back(x);
    }
    if (at0.empty() || at90.empty()) throw InvalidArgument("squeezing report needs samples at theta = 0 and pi/2");
    const auto a = sample_variance(at0);
    const auto b = sample_variance(at90);
    return make_report(a.var, b.var, a.se, b.se);
}

SqueezingReport squeezing_report(const DensityMatrix& rho) {
    const std::size_t dim = rho.dim() + 1;
    const DensityMatrix wide = rho.padded(dim);
    auto variance = [&](double theta) {
        const Eigen::MatrixXcd x = quadrature_matrix(theta, dim);
        const double tr = wide.trace();
        const double m1 = expectation(wide, x).real() / tr;
        const double m2 = expectation(wide, x * x).real() / tr;
        return m2 - m1 * m1;
    };
    return make_report(variance(0.0), variance(0.5 * std::numbers::pi), 0.0, 0.0);
}

SqueezingReport squeezing_report(double abs_alpha, const EfficiencyModel& eff) {
    return make_report(quad_var(abs_alpha, 0.0, eff), quad_var(abs_alpha, 0.5 * std::numbers::pi, eff), 0.0, 0.0);
}

}  // namespace spacs
