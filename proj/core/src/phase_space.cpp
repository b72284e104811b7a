#include "spacs/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spacs/errors.hpp"
#include "spacs/parallel.hpp"
#include "spacs/special.hpp"

namespace spacs {

namespace {

constexpr double kPi = std::numbers::pi;

// Trapezoid integral of f over [a, b] with step at most h.
template <typename F>
double trapezoid(F&& f, double a, double b, double h) {
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / h));
    const double step = (b - a) / static_cast<double>(n);
    double sum = 0.5 * (f(a) + f(b));
    for (std::size_t k = 1; k < n; ++k) sum += f(a + static_cast<double>(k) * step);
    return sum * step;
}

constexpr double kMomentStep = 2.5e-3;

}  // namespace

EfficiencyModel::EfficiencyModel(double eta) : eta_(eta) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        std::ostringstream os;
        os << "eta must lie in (0, 1], got " << eta;
        throw InvalidArgument(os.str());
    }
}

void GridSpec::validate() const {
    if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2 nodes per axis");
    if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
        !std::isfinite(y_min) || !std::isfinite(y_max))
        throw InvalidArgument("grid bounds must be finite and increasing");
}

GridSpec GridSpec::default_for(Complex alpha) {
    const double r = 4.0 + std::abs(alpha);
    return GridSpec{-r, r, -r, r, 301, 301};
}

WignerGrid::WignerGrid(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.nx * spec_.ny) throw InvalidArgument("grid value count does not match spec");
}

double WignerGrid::integral() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < spec_.nx; ++i) {
        const double wx = (i == 0 || i + 1 == spec_.nx) ? 0.5 : 1.0;
        for (std::size_t j = 0; j < spec_.ny; ++j) {
            const double wy = (j == 0 || j + 1 == spec_.ny) ? 0.5 : 1.0;
            sum += wx * wy * at(i, j);
        }
    }
    return sum * spec_.dx() * spec_.dy();
}

double WignerGrid::interpolate_bilinear(double x, double y) const {
    const double fx = (x - spec_.x_min) / spec_.dx();
    const double fy = (y - spec_.y_min) / spec_.dy();
    const double max_x = static_cast<double>(spec_.nx - 1);
    const double max_y = static_cast<double>(spec_.ny - 1);
    if (fx < 0.0 || fy < 0.0 || fx > max_x || fy > max_y) return 0.0;
    const auto i = std::min(static_cast<std::size_t>(fx), spec_.nx - 2);
    const auto j = std::min(static_cast<std::size_t>(fy), spec_.ny - 2);
    const double tx = fx - static_cast<double>(i);
    const double ty = fy - static_cast<double>(j);
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
           tx * ty * at(i + 1, j + 1);
}

double WignerGrid::interpolate_cubic(double x, double y) const {
    const double fx = (x - spec_.x_min) / spec_.dx();
    const double fy = (y - spec_.y_min) / spec_.dy();
    const double max_x = static_cast<double>(spec_.nx - 1);
    const double max_y = static_cast<double>(spec_.ny - 1);
    if (fx < 0.0 || fy < 0.0 || fx > max_x || fy > max_y) return 0.0;
    const auto i = static_cast<long>(std::min(std::floor(fx), max_x - 1));
    const auto j = static_cast<long>(std::min(std::floor(fy), max_y - 1));
    const double tx = fx - static_cast<double>(i);
    const double ty = fy - static_cast<double>(j);

    // Four-point Lagrange weights on nodes -1, 0, 1, 2.
    auto weights = [](double t, double w[4]) {
        w[0] = -t * (t - 1) * (t - 2) / 6.0;
        w[1] = (t + 1) * (t - 1) * (t - 2) / 2.0;
        w[2] = -(t + 1) * t * (t - 2) / 2.0;
        w[3] = (t + 1) * t * (t - 1) / 6.0;
    };
    double wx[4], wy[4];
    weights(tx, wx);
    weights(ty, wy);
    const auto nx = static_cast<long>(spec_.nx);
    const auto ny = static_cast<long>(spec_.ny);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) {
        const long ii = i - 1 + a;
        if (ii < 0 || ii >= nx) continue;
        double row = 0.0;
        for (int b = 0; b < 4; ++b) {
            const long jj = j - 1 + b;
            if (jj < 0 || jj >= ny) continue;
            row += wy[b] * at(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
        }
        sum += wx[a] * row;
    }
    return sum;
}

WignerGrid tabulate_wigner(const GridSpec& spec, const std::function<double(double, double)>& w) {
    spec.validate();
    std::vector<double> values(spec.nx * spec.ny);
    parallel_for(spec.nx, 0, [&](std::size_t i) {
        const double x = spec.x(i);
        for (std::size_t j = 0; j < spec.ny; ++j) values[i * spec.ny + j] = w(x, spec.y(j));
    });
    return WignerGrid(spec, std::move(values));
}

double wigner_spacs_at(Complex alpha, Complex z) {
    const double a2 = std::norm(alpha);
    return -2.0 * (1.0 - std::norm(2.0 * z - alpha)) / (kPi * (1.0 + a2)) * std::exp(-2.0 * std::norm(z - alpha));
}

double wigner_spacs_lossy_at(Complex alpha, const EfficiencyModel& eff, Complex z) {
    const double eta = eff.eta();
    const double se = std::sqrt(eta);
    const double a2 = std::norm(alpha);
    const double bracket = 2.0 * eta - 1.0 - std::norm(2.0 * se * z - alpha * (2.0 * eta - 1.0));
    return -2.0 * bracket / (kPi * (1.0 + a2)) * std::exp(-2.0 * std::norm(z - se * alpha));
}

WignerGrid wigner_spacs(Complex alpha, const GridSpec& spec) {
    return tabulate_wigner(spec, [alpha](double x, double y) { return wigner_spacs_at(alpha, {x, y}); });
}

WignerGrid wigner_spacs_lossy(Complex alpha, const EfficiencyModel& eff, const GridSpec& spec) {
    return tabulate_wigner(spec, [alpha, eff](double x, double y) { return wigner_spacs_lossy_at(alpha, eff, {x, y}); });
}

Complex basis_wigner(std::size_t n, std::size_t m, Complex z) {
    if (n < m) return std::conj(basis_wigner(m, n, z));
    const auto d = static_cast<int>(n - m);
    const double r = std::abs(z);
    const double u = 4.0 * r * r;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const double lag = assoc_laguerre(static_cast<int>(m), d, u);
    if (d == 0) return 2.0 / kPi * sign * std::exp(-2.0 * r * r) * lag;
    if (r == 0.0) return 0.0;
    const double log_mag = 0.5 * (log_factorial(static_cast<int>(m)) - log_factorial(static_cast<int>(n))) +
                           d * std::log(2.0 * r) - 2.0 * r * r;
    return 2.0 / kPi * sign * lag * std::polar(std::exp(log_mag), -d * std::arg(z));
}

double wigner_from_density_at(const DensityMatrix& rho, Complex z) {
    const auto dim = static_cast<int>(rho.dim());
    const double r = std::abs(z);
    const double u = 4.0 * r * r;
    const double gauss = std::exp(-2.0 * r * r);
    const double log2r = r > 0.0 ? std::log(2.0 * r) : 0.0;
    const Complex phase_unit = r > 0.0 ? std::conj(z) / r : Complex(1.0, 0.0);

    double total = 0.0;
    Complex phase = 1.0;
    for (int d = 0; d < dim; ++d) {
        if (d > 0) {
            if (r == 0.0) break;
            phase *= phase_unit;
        }
        // Laguerre L_m^{(d)}(u) by recurrence in m.
        double lag_prev = 0.0;
        double lag = 1.0;
        Complex acc = 0.0;
        for (int m = 0; m + d < dim; ++m) {
            if (m == 1) {
                lag_prev = 1.0;
                lag = 1.0 + d - u;
            } else if (m > 1) {
                const double next = ((2.0 * (m - 1) + 1.0 + d - u) * lag - ((m - 1) + d) * lag_prev) / m;
                lag_prev = lag;
                lag = next;
            }
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            const double mag = d == 0 ? 1.0
                                      : std::exp(0.5 * (log_factorial(m) - log_factorial(m + d)) + d * log2r);
            acc += rho(static_cast<std::size_t>(m + d), static_cast<std::size_t>(m)) * (sign * mag * lag);
        }
        const Complex term = acc * phase;
        total += d == 0 ? term.real() : 2.0 * term.real();
    }
    return 2.0 / kPi * gauss * total;
}

WignerGrid wigner_from_density(const DensityMatrix& rho, const GridSpec& spec) {
    return tabulate_wigner(spec, [&rho](double x, double y) { return wigner_from_density_at(rho, {x, y}); });
}

TabulatedMarginal marginal_radon(const WignerGrid& grid, double theta, std::span<const double> xs,
                                 const RadonOptions& options) {
    const GridSpec& g = grid.spec();

    double peak = 0.0;
    for (double v : grid.values()) peak = std::max(peak, std::abs(v));
    double edge = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i) edge = std::max({edge, std::abs(grid.at(i, 0)), std::abs(grid.at(i, g.ny - 1))});
    for (std::size_t j = 0; j < g.ny; ++j) edge = std::max({edge, std::abs(grid.at(0, j)), std::abs(grid.at(g.nx - 1, j))});
    if (edge > options.boundary_tolerance * peak) {
        std::ostringstream os;
        os << "Wigner grid boundary carries weight (max |W| on edge " << edge << " vs peak " << peak << ")";
        throw MassOutsideGrid(os.str());
    }

    const double half = std::hypot(std::max(std::abs(g.x_min), std::abs(g.x_max)),
                                   std::max(std::abs(g.y_min), std::abs(g.y_max)));
    const double h = 0.5 * std::min(g.dx(), g.dy());
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    TabulatedMarginal out;
    out.theta = theta;
    out.x.assign(xs.begin(), xs.end());
    out.p.resize(xs.size());
    parallel_for(xs.size(), 0, [&](std::size_t k) {
        const double x = xs[k];
        auto w = [&](double y) {
            const double px = x * c - y * s;
            const double py = x * s + y * c;
            return options.interpolation == Interpolation::Cubic ? grid.interpolate_cubic(px, py)
                                                                 : grid.interpolate_bilinear(px, py);
        };
        out.p[k] = trapezoid(w, -half, half, h);
    });
    double norm = 0.0;
    for (std::size_t k = 1; k < xs.size(); ++k) norm += 0.5 * (out.p[k] + out.p[k - 1]) * (xs[k] - xs[k - 1]);
    out.normalization = norm;
    return out;
}

TabulatedMarginal marginal_radon(const WignerGrid& grid, double theta, const RadonOptions& options) {
    const GridSpec& g = grid.spec();
    std::vector<double> xs(g.nx);
    for (std::size_t i = 0; i < g.nx; ++i) xs[i] = g.x(i);
    return marginal_radon(grid, theta, xs, options);
}

std::string to_string(MarginalProvenance p) {
    switch (p) {
        case MarginalProvenance::AnalyticIdeal: return "analytic-ideal";
        case MarginalProvenance::AnalyticLossy: return "analytic-lossy";
        case MarginalProvenance::MatrixDerived: return "matrix-derived";
    }
    return "unknown";
}

MarginalDistribution::MarginalDistribution(Evaluator eval, MarginalProvenance provenance, double extent)
    : eval_(std::move(eval)), provenance_(provenance), extent_(extent) {
    if (!eval_) throw InvalidArgument("marginal evaluator is empty");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw InvalidArgument("marginal extent must be positive");
}

double MarginalDistribution::normalization(double theta) const {
    return trapezoid([&](double x) { return eval_(x, theta); }, -extent_, extent_, kMomentStep);
}

MarginalDistribution::Moments MarginalDistribution::moments(double theta) const {
    const double z = normalization(theta);
    const double m1 = trapezoid([&](double x) { return x * eval_(x, theta); }, -extent_, extent_, kMomentStep) / z;
    const double c2 = trapezoid([&](double x) { return (x - m1) * (x - m1) * eval_(x, theta); }, -extent_, extent_,
                                kMomentStep) / z;
    return {m1, c2};
}

TabulatedMarginal MarginalDistribution::tabulate(double theta, std::size_t n, double x_min, double x_max) const {
    if (n < 2) throw InvalidArgument("tabulation needs at least 2 points");
    TabulatedMarginal out;
    out.theta = theta;
    out.x.resize(n);
    out.p.resize(n);
    const double step = (x_max - x_min) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        out.x[k] = x_min + static_cast<double>(k) * step;
        out.p[k] = eval_(out.x[k], theta);
    }
    double norm = 0.0;
    for (std::size_t k = 1; k < n; ++k) norm += 0.5 * (out.p[k] + out.p[k - 1]) * step;
    out.normalization = norm;
    return out;
}

double spacs_marginal_density(double abs_alpha, double eta, double x, double theta) {
    const double a = abs_alpha;
    const double a2 = a * a;
    const double se = std::sqrt(eta);
    const double bracket = 1.0 - eta + 4.0 * eta * x * x + a2 * (1.0 + 2.0 * eta * (eta - 1.0)) -
                           4.0 * a * x * se * (2.0 * eta - 1.0) * std::cos(theta) +
                           2.0 * a2 * eta * (eta - 1.0) * std::cos(2.0 * theta);
    const double shift = x - a * se * std::cos(theta);
    return std::sqrt(2.0 / kPi) / (1.0 + a2) * bracket * std::exp(-2.0 * shift * shift);
}

MarginalDistribution marginal_spacs_lossy(double abs_alpha, const EfficiencyModel& eff) {
    if (!(abs_alpha >= 0.0)) throw InvalidArgument("marginal_spacs_lossy takes |alpha| >= 0");
    const double eta = eff.eta();
    const auto prov = eta == 1.0 ? MarginalProvenance::AnalyticIdeal : MarginalProvenance::AnalyticLossy;
    return MarginalDistribution(
        [abs_alpha, eta](double x, double theta) { return spacs_marginal_density(abs_alpha, eta, x, theta); }, prov,
        abs_alpha * std::sqrt(eta) + 7.0);
}

MarginalDistribution marginal_coherent(Complex alpha) {
    return MarginalDistribution(
        [alpha](double x, double theta) {
            const double mean = (alpha * std::polar(1.0, -theta)).real();
            const double d = x - mean;
            return std::sqrt(2.0 / kPi) * std::exp(-2.0 * d * d);
        },
        MarginalProvenance::AnalyticIdeal, std::abs(alpha) + 7.0);
}

double density_marginal_at(const DensityMatrix& rho, double x, double theta) {
    const std::size_t dim = rho.dim();
    thread_local std::vector<double> psi;
    psi.resize(dim);
    oscillator_wavefunctions(x, psi);
    double p = 0.0;
    for (std::size_t n = 0; n < dim; ++n) {
        p += rho(n, n).real() * psi[n] * psi[n];
        for (std::size_t m = 0; m < n; ++m) {
            const Complex ph = std::polar(1.0, -static_cast<double>(n - m) * theta);
            p += 2.0 * (rho(n, m) * ph).real() * psi[n] * psi[m];
        }
    }
    return p;
}

MarginalDistribution marginal_from_density(const DensityMatrix& rho) {
    const double extent = std::sqrt(static_cast<double>(rho.dim()) + 0.5) + 6.0;
    return MarginalDistribution([rho](double x, double theta) { return density_marginal_at(rho, x, theta); },
                                MarginalProvenance::MatrixDerived, extent);
}

double quad_mean(double abs_alpha, double theta, const EfficiencyModel& eff) {
    const double a2 = abs_alpha * abs_alpha;
    return abs_alpha * (2.0 + a2) * std::sqrt(eff.eta()) * std::cos(theta) / (1.0 + a2);
}

double quad_var(double abs_alpha, double theta, const EfficiencyModel& eff) {
    const double a2 = abs_alpha * abs_alpha;
    return 0.25 + eff.eta() * (1.0 - a2 * std::cos(2.0 * theta)) / (2.0 * (1.0 + a2) * (1.0 + a2));
}

NegativityResult negativity(const WignerGrid& grid) {
    const auto& v = grid.values();
    if (v.empty()) throw InvalidArgument("empty grid");
    const auto it = std::min_element(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(it - v.begin());
    const std::size_t i = idx / grid.spec().ny;
    const std::size_t j = idx % grid.spec().ny;
    return {*it, grid.spec().x(i), grid.spec().y(j)};
}

}  // namespace spacs
