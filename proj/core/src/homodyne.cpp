#include "spacs/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "spacs/errors.hpp"
#include "spacs/parallel.hpp"

namespace spacs {

PhaseSchedule::PhaseSchedule(std::vector<double> phases, std::size_t samples_per_phase)
    : phases_(std::move(phases)), samples_per_phase_(samples_per_phase) {
    if (phases_.empty()) throw InvalidArgument("phase schedule is empty");
    if (samples_per_phase_ == 0) throw InvalidArgument("samples_per_phase must be positive");
    for (std::size_t j = 0; j < phases_.size(); ++j) {
        if (!(phases_[j] >= 0.0 && phases_[j] <= std::numbers::pi))
            throw InvalidArgument("phases must lie in [0, pi]");
        if (j > 0 && !(phases_[j] > phases_[j - 1])) throw InvalidArgument("phases must be strictly increasing");
    }
}

PhaseSchedule PhaseSchedule::uniform(std::size_t n_phases, std::size_t samples_per_phase) {
    if (n_phases == 0) throw InvalidArgument("phase schedule is empty");
    std::vector<double> phases(n_phases);
    for (std::size_t j = 0; j < n_phases; ++j)
        phases[j] = std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_phases);
    return PhaseSchedule(std::move(phases), samples_per_phase);
}

void AcCouplingModel::validate() const {
    if (!(mean_scale > 0.0 && mean_scale <= 1.0)) {
        std::ostringstream os;
        os << "mean_scale must lie in (0, 1], got " << mean_scale;
        throw InvalidArgument(os.str());
    }
}

InverseCdfSampler::InverseCdfSampler(const std::function<double(double)>& pdf, double lo, double hi,
                                     std::size_t points, double negative_tolerance) {
    if (points < 2 || !(hi > lo)) throw InvalidArgument("sampler needs a non-empty range and >= 2 points");
    xs_.resize(points);
    std::vector<double> p(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) {
        xs_[k] = lo + static_cast<double>(k) * step;
        double v = pdf(xs_[k]);
        if (v < -negative_tolerance) {
            std::ostringstream os;
            os << "density " << v << " at x = " << xs_[k] << " is below -" << negative_tolerance;
            throw DensityNegativeBeyondTolerance(os.str());
        }
        p[k] = std::max(v, 0.0);
    }
    cdf_.assign(points, 0.0);
    for (std::size_t k = 1; k < points; ++k) cdf_[k] = cdf_[k - 1] + 0.5 * (p[k] + p[k - 1]) * step;
    const double total = cdf_.back();
    if (!(total > 0.0)) throw InvalidArgument("density has no mass on the sampling range");
    for (double& c : cdf_) c /= total;
}

InverseCdfSampler InverseCdfSampler::for_marginal(const MarginalDistribution& dist, double theta,
                                                  double negative_tolerance) {
    const auto m = dist.moments(theta);
    auto pdf = [&](double x) { return dist(x, theta); };
    // A non-positive variance only comes from a non-physical density; scan
    // its whole support so the negativity is seen rather than skipped.
    if (!(m.variance > 0.0)) return InverseCdfSampler(pdf, -dist.extent(), dist.extent(), 4096, negative_tolerance);
    const double width = std::sqrt(m.variance);
    return InverseCdfSampler(pdf, m.mean - 6.0 * width, m.mean + 6.0 * width, 4096, negative_tolerance);
}

double InverseCdfSampler::quantile(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return xs_.front();
    if (it == cdf_.end()) return xs_.back();
    const auto k = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[k - 1];
    const double c1 = cdf_[k];
    const double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return xs_[k - 1] + t * (xs_[k] - xs_[k - 1]);
}

double InverseCdfSampler::cdf(double x) const {
    if (x <= xs_.front()) return 0.0;
    if (x >= xs_.back()) return 1.0;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const auto k = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[k - 1]) / (xs_[k] - xs_[k - 1]);
    return cdf_[k - 1] + t * (cdf_[k] - cdf_[k - 1]);
}

double InverseCdfSampler::draw(Rng& rng) const {
    return quantile(rng.uniform());
}

std::vector<QuadratureSample> sample_marginal(const MarginalDistribution& dist, double theta, std::size_t n,
                                              std::uint64_t seed, FrameRole role) {
    const auto sampler = InverseCdfSampler::for_marginal(dist, theta);
    Rng rng(seed);
    std::vector<QuadratureSample> out(n);
    for (auto& s : out) s = {sampler.draw(rng), theta, role};
    return out;
}

std::vector<QuadratureSample> sample_state_marginal(const DensityMatrix& rho, double theta, std::size_t n,
                                                    std::uint64_t seed, FrameRole role) {
    if (std::abs(rho.trace() - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "density matrix trace " << rho.trace() << " is not 1";
        throw InvalidArgument(os.str());
    }
    return sample_marginal(marginal_from_density(rho), theta, n, seed, role);
}

std::vector<QuadratureSample> acquire_frames(const AmplifierParams& prep, const PhaseSchedule& schedule,
                                             const AcCouplingModel& ac, const EfficiencyModel& eff,
                                             std::uint64_t seed, const AcquisitionOptions& options) {
    prep.validate();
    ac.validate();
    const Complex alpha = prep.alpha_seed;
    const double abs_alpha = std::abs(alpha);
    const double seed_phase = std::arg(alpha);
    const double se = std::sqrt(eff.eta());
    const Complex alpha_lossy = se * alpha;

    const double p_total = prep.herald_probability();
    const double dark_fraction = p_total > 0.0 ? prep.dark_herald_probability() / p_total : 0.0;

    const auto spacs = marginal_spacs_lossy(abs_alpha, eff);
    const auto reference = marginal_coherent(alpha_lossy);
    const auto& phases = schedule.phases();
    const std::size_t per_phase = schedule.samples_per_phase();
    const double s = ac.mean_scale;

    std::vector<QuadratureSample> out(phases.size() * per_phase * 2);
    const Rng root(seed);
    parallel_for(phases.size(), options.workers, [&](std::size_t j) {
        const double theta = phases[j];
        const double rel = theta - seed_phase;
        const auto spacs_sampler = InverseCdfSampler::for_marginal(spacs, rel);
        const auto ref_sampler = InverseCdfSampler::for_marginal(reference, theta);
        const double spacs_mean = quad_mean(abs_alpha, rel, eff);
        const double ref_mean = (alpha_lossy * std::polar(1.0, -theta)).real();
        const double spacs_shift = (1.0 - s) * spacs_mean;
        const double ref_shift = (1.0 - s) * ref_mean;

        Rng rng = root.split(j);
        auto* slot = &out[j * per_phase * 2];
        for (std::size_t k = 0; k < per_phase; ++k) {
            const bool dark = dark_fraction > 0.0 && rng.uniform() < dark_fraction;
            double xh;
            if (dark)
                xh = ref_sampler.draw(rng) - ref_shift;
            else
                xh = spacs_sampler.draw(rng) - spacs_shift;
            const double xr = ref_sampler.draw(rng) - ref_shift;
            slot[2 * k] = {xh, theta, FrameRole::Heralded};
            slot[2 * k + 1] = {xr, theta, FrameRole::Reference};
        }
    });
    return out;
}

std::vector<PhaseGroup> group_by_phase(std::span<const QuadratureSample> samples, FrameRole role) {
    std::map<double, std::vector<double>> groups;
    for (const auto& s : samples)
        if (s.role == role) groups[s.theta].push_back(s.x);
    std::vector<PhaseGroup> out;
    out.reserve(groups.size());
    for (auto& [theta, xs] : groups) out.push_back({theta, std::move(xs)});
    return out;
}

namespace {

struct SampleStats {
    double mean;
    double variance;
};

SampleStats stats(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= std::max<double>(1.0, static_cast<double>(xs.size()) - 1.0);
    return {mean, var};
}

}  // namespace

MeanScaleFit calibrate_mean_scale(std::span<const QuadratureSample> samples, double abs_alpha,
                                  const EfficiencyModel& eff) {
    const auto groups = group_by_phase(samples, FrameRole::Reference);
    if (groups.size() < 3) throw DegenerateFit("mean-scale calibration needs reference samples at >= 3 phases");
    if (!(abs_alpha > 0.0)) throw DegenerateFit("zero-amplitude reference carries no scale information");

    const double amp = std::sqrt(eff.eta()) * abs_alpha;
    double scc = 0.0, smc = 0.0, cos_sum = 0.0;
    std::vector<SampleStats> st;
    st.reserve(groups.size());
    for (const auto& g : groups) {
        st.push_back(stats(g.x));
        const double c = amp * std::cos(g.theta);
        scc += c * c;
        smc += st.back().mean * c;
        cos_sum += std::cos(g.theta) * std::cos(g.theta);
    }
    if (cos_sum < 1e-6 * static_cast<double>(groups.size()))
        throw DegenerateFit("all reference phases sit at theta = pi/2");

    MeanScaleFit fit;
    fit.n_phases = groups.size();
    fit.scale = smc / scc;
    double var_num = 0.0, res = 0.0;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const double c = amp * std::cos(groups[j].theta);
        var_num += c * c * st[j].variance / static_cast<double>(groups[j].x.size());
        const double r = st[j].mean - fit.scale * c;
        res += r * r;
    }
    fit.std_error = std::sqrt(var_num) / scc;
    fit.residual = std::sqrt(res / static_cast<double>(groups.size()));
    return fit;
}

std::vector<QuadratureSample> rescale_means(std::span<const QuadratureSample> samples, double scale, FrameRole role) {
    if (!(scale > 0.0)) throw InvalidArgument("mean scale must be positive");
    std::map<double, std::pair<double, std::size_t>> sums;
    for (const auto& s : samples) {
        if (s.role != role) continue;
        auto& acc = sums[s.theta];
        acc.first += s.x;
        acc.second += 1;
    }
    std::vector<QuadratureSample> out(samples.begin(), samples.end());
    for (auto& s : out) {
        if (s.role != role) continue;
        const auto& acc = sums[s.theta];
        const double mean = acc.first / static_cast<double>(acc.second);
        s.x += (1.0 / scale - 1.0) * mean;
    }
    return out;
}

EfficiencyFit fit_single_photon_efficiency(std::span<const double> xs) {
    if (xs.size() < 2) throw InvalidArgument("efficiency fit needs samples");
    // The log-likelihood sum log(1 - eta + 4 eta x^2) is concave in eta; find
    // the root of its derivative by bisection on (0, 1].
    auto score = [&](double eta) {
        double s = 0.0;
        for (double x : xs) {
            const double u = 4.0 * x * x - 1.0;
            s += u / (1.0 + eta * u);
        }
        return s;
    };
    double lo = 1e-9, hi = 1.0;
    double eta;
    if (score(hi) >= 0.0) {
        eta = hi;
    } else if (score(lo) <= 0.0) {
        eta = lo;
    } else {
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            (score(mid) > 0.0 ? lo : hi) = mid;
        }
        eta = 0.5 * (lo + hi);
    }
    double info = 0.0;
    for (double x : xs) {
        const double u = 4.0 * x * x - 1.0;
        const double t = u / (1.0 + eta * u);
        info += t * t;
    }
    return {eta, 1.0 / std::sqrt(info)};
}

}  // namespace spacs
