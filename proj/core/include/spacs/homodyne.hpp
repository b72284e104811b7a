#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spacs/fock.hpp"
#include "spacs/phase_space.hpp"
#include "spacs/preparation.hpp"
#include "spacs/rng.hpp"

namespace spacs {

// Which pulse of an acquisition frame a sample came from: the first pulse is
// synchronized with the idler detection, the second probes the un-excited
// seed.
enum class FrameRole : std::uint8_t { Heralded = 0, Reference = 1 };

struct QuadratureSample {
    double x = 0.0;      // vacuum variance 1/4
    double theta = 0.0;  // LO phase, radians in [0, pi]
    FrameRole role = FrameRole::Heralded;

    friend bool operator==(const QuadratureSample&, const QuadratureSample&) = default;
};

class PhaseSchedule {
public:
    PhaseSchedule(std::vector<double> phases, std::size_t samples_per_phase);

    // n phases at j*pi/n, j = 0..n-1.
    static PhaseSchedule uniform(std::size_t n_phases = 12, std::size_t samples_per_phase = 5000);

    const std::vector<double>& phases() const { return phases_; }
    std::size_t samples_per_phase() const { return samples_per_phase_; }

private:
    std::vector<double> phases_;
    std::size_t samples_per_phase_;
};

// AC coupling of the detector: the marginal mean is multiplied by
// mean_scale while central moments are untouched.
struct AcCouplingModel {
    double mean_scale = 1.0;
    void validate() const;
};

// Inverse-CDF sampler over a dense tabulation of a 1-D density. The CDF is
// built with the trapezoid rule and inverted by linear interpolation, which
// keeps the map monotone. Negative density values down to
// -negative_tolerance are clipped to zero; below that the constructor throws
// DensityNegativeBeyondTolerance.
class InverseCdfSampler {
public:
    InverseCdfSampler(const std::function<double(double)>& pdf, double lo, double hi, std::size_t points = 4096,
                      double negative_tolerance = 1e-12);

    // Tabulates over mean +- 6 standard deviations of `dist` at theta.
    static InverseCdfSampler for_marginal(const MarginalDistribution& dist, double theta,
                                          double negative_tolerance = 1e-12);

    double draw(Rng& rng) const;
    double quantile(double u) const;
    double cdf(double x) const;

    double lo() const { return xs_.front(); }
    double hi() const { return xs_.back(); }

private:
    std::vector<double> xs_;
    std::vector<double> cdf_;
};

// i.i.d. draws from dist at theta, reproducible for a given seed.
std::vector<QuadratureSample> sample_marginal(const MarginalDistribution& dist, double theta, std::size_t n,
                                              std::uint64_t seed, FrameRole role = FrameRole::Heralded);

// Draws from the quadrature distribution of rho at theta.
std::vector<QuadratureSample> sample_state_marginal(const DensityMatrix& rho, double theta, std::size_t n,
                                                    std::uint64_t seed, FrameRole role = FrameRole::Heralded);

struct AcquisitionOptions {
    std::size_t workers = 0;
};

// Simulated acquisition frames. For each phase of the schedule (seeded with
// Rng(seed).split(phase index)) and each frame, emits one heralded sample from
// the lossy SPACS marginal (or, for a dark-count herald, the lossy seed) and
// one reference sample from the lossy seed, both with means scaled by
// ac.mean_scale. Output order: by phase, then frame, heralded before
// reference.
std::vector<QuadratureSample> acquire_frames(const AmplifierParams& prep, const PhaseSchedule& schedule,
                                             const AcCouplingModel& ac, const EfficiencyModel& eff,
                                             std::uint64_t seed, const AcquisitionOptions& options = {});

// Samples of one role grouped by distinct phase, phases ascending.
struct PhaseGroup {
    double theta;
    std::vector<double> x;
};
std::vector<PhaseGroup> group_by_phase(std::span<const QuadratureSample> samples, FrameRole role);

struct MeanScaleFit {
    double scale = 1.0;
    double std_error = 0.0;
    // RMS of measured minus fitted phase means.
    double residual = 0.0;
    std::size_t n_phases = 0;
};

// Least-squares fit of reference-frame means against sqrt(eta)|alpha| cos(theta).
MeanScaleFit calibrate_mean_scale(std::span<const QuadratureSample> samples, double abs_alpha,
                                  const EfficiencyModel& eff);

// Divides each phase's sample mean of the given role by `scale`, leaving the
// spread around the mean unchanged.
std::vector<QuadratureSample> rescale_means(std::span<const QuadratureSample> samples, double scale, FrameRole role);

struct EfficiencyFit {
    double eta = 0.0;
    double std_error = 0.0;
};

// Maximum-likelihood eta from phase-averaged quadrature values of a lossy
// single photon, p(x) = sqrt(2/pi) (1 - eta + 4 eta x^2) exp(-2 x^2).
EfficiencyFit fit_single_photon_efficiency(std::span<const double> xs);

}  // namespace spacs
