#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spacs/fock.hpp"

namespace spacs {

// Overall detection efficiency, 0 < eta <= 1.
class EfficiencyModel {
public:
    explicit EfficiencyModel(double eta = 1.0);
    double eta() const { return eta_; }

private:
    double eta_;
};

// Rectangular phase-space grid, z = x + i y. Node i of nx sits at
// x_min + i * dx with dx = (x_max - x_min) / (nx - 1); same for y.
struct GridSpec {
    double x_min = -4.0;
    double x_max = 4.0;
    double y_min = -4.0;
    double y_max = 4.0;
    std::size_t nx = 301;
    std::size_t ny = 301;

    double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
    double dy() const { return (y_max - y_min) / static_cast<double>(ny - 1); }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    double y(std::size_t j) const { return y_min + static_cast<double>(j) * dy(); }

    void validate() const;

    // [-4-|alpha|, 4+|alpha|]^2 with 301 x 301 nodes.
    static GridSpec default_for(Complex alpha);
};

class WignerGrid {
public:
    WignerGrid(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    // Row-major: index i * ny + j holds W(x_i, y_j).
    const std::vector<double>& values() const { return values_; }
    double at(std::size_t i, std::size_t j) const { return values_[i * spec_.ny + j]; }

    // Trapezoid-rule integral over the grid.
    double integral() const;

    // W at an arbitrary point, 0 outside the grid.
    double interpolate_bilinear(double x, double y) const;
    double interpolate_cubic(double x, double y) const;

private:
    GridSpec spec_;
    std::vector<double> values_;
};

// Evaluates W at every node of `spec`.
WignerGrid tabulate_wigner(const GridSpec& spec, const std::function<double(double, double)>& w);

// Closed forms. Complex alpha is supported throughout.
double wigner_spacs_at(Complex alpha, Complex z);
double wigner_spacs_lossy_at(Complex alpha, const EfficiencyModel& eff, Complex z);

WignerGrid wigner_spacs(Complex alpha, const GridSpec& spec);
WignerGrid wigner_spacs_lossy(Complex alpha, const EfficiencyModel& eff, const GridSpec& spec);

// Wigner function of the operator |n><m|. Normalized so that |0><0| gives
// (2/pi) exp(-2|z|^2). Satisfies W_{m,n} = conj(W_{n,m}).
Complex basis_wigner(std::size_t n, std::size_t m, Complex z);

// W(z) = sum_{n,m} rho_{n,m} W_{n,m}(z).
double wigner_from_density_at(const DensityMatrix& rho, Complex z);
WignerGrid wigner_from_density(const DensityMatrix& rho, const GridSpec& spec);

struct TabulatedMarginal {
    double theta = 0.0;
    std::vector<double> x;
    std::vector<double> p;
    // Trapezoid integral of p over x.
    double normalization = 0.0;
};

enum class Interpolation { Bilinear, Cubic };

struct RadonOptions {
    Interpolation interpolation = Interpolation::Cubic;
    // Relative threshold on max|W| along the grid boundary versus max|W|
    // overall; above it the grid is judged to be missing mass.
    double boundary_tolerance = 1e-6;
};

// p(x, theta) = \int W(x cos t - y sin t, x sin t + y cos t) dy, evaluated by
// the trapezoid rule along each rotated line with interpolation between
// grid nodes. Throws MassOutsideGrid if the grid boundary carries weight.
TabulatedMarginal marginal_radon(const WignerGrid& grid, double theta, std::span<const double> xs,
                                 const RadonOptions& options = {});
// Same, on nx evenly spaced x values spanning the grid's x range.
TabulatedMarginal marginal_radon(const WignerGrid& grid, double theta, const RadonOptions& options = {});

enum class MarginalProvenance { AnalyticIdeal, AnalyticLossy, MatrixDerived };

std::string to_string(MarginalProvenance p);

// Quadrature probability density p(x, theta).
class MarginalDistribution {
public:
    using Evaluator = std::function<double(double x, double theta)>;

    // `extent` bounds the region outside of which the density is negligible
    // (below ~1e-16) for every theta.
    MarginalDistribution(Evaluator eval, MarginalProvenance provenance, double extent);

    double operator()(double x, double theta) const { return eval_(x, theta); }
    MarginalProvenance provenance() const { return provenance_; }
    double extent() const { return extent_; }

    // Numerical normalization, mean and variance at theta.
    double normalization(double theta) const;
    struct Moments {
        double mean;
        double variance;
    };
    Moments moments(double theta) const;

    TabulatedMarginal tabulate(double theta, std::size_t n, double x_min, double x_max) const;
    TabulatedMarginal tabulate(double theta, std::size_t n) const { return tabulate(theta, n, -extent_, extent_); }

private:
    Evaluator eval_;
    MarginalProvenance provenance_;
    double extent_;
};

// Lossy SPACS marginal in terms of |alpha| with the seed phase carried by
// theta. Callers holding a complex alpha must pass theta - arg(alpha).
double spacs_marginal_density(double abs_alpha, double eta, double x, double theta);
MarginalDistribution marginal_spacs_lossy(double abs_alpha, const EfficiencyModel& eff);

// Gaussian marginal of the coherent state |alpha>: mean Re(alpha e^{-i theta}), variance 1/4.
MarginalDistribution marginal_coherent(Complex alpha);

// p(x, theta) = sum_{n,m} rho_{n,m} psi_n(x) psi_m(x) e^{-i(n-m) theta}.
double density_marginal_at(const DensityMatrix& rho, double x, double theta);
MarginalDistribution marginal_from_density(const DensityMatrix& rho);

// Quadrature mean and variance of the lossy SPACS (|alpha| with phase in theta).
double quad_mean(double abs_alpha, double theta, const EfficiencyModel& eff);
double quad_var(double abs_alpha, double theta, const EfficiencyModel& eff);

struct NegativityResult {
    double min_value;
    double x;
    double y;
};

// Global grid minimum and where it sits.
NegativityResult negativity(const WignerGrid& grid);

}  // namespace spacs
