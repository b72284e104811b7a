#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "spacs/errors.hpp"
#include "spacs/homodyne.hpp"
#include "spacs/loss.hpp"

using namespace spacs;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> values(const std::vector<QuadratureSample>& s) {
    std::vector<double> x(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) x[k] = s[k].x;
    return x;
}

struct Stats {
    double mean, var, se_mean, se_var;
};

Stats stats(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    return {mean, m2, std::sqrt(m2 / n), std::sqrt((m4 - m2 * m2) / n)};
}

// CDF of a density by Simpson's rule on [lo, x], tabulated then linearly
// interpolated.
struct NumericCdf {
    double lo, step;
    std::vector<double> c;
    NumericCdf(const std::function<double(double)>& pdf, double lo_, double hi, int panels) : lo(lo_) {
        step = (hi - lo) / panels;
        c.assign(static_cast<std::size_t>(panels) + 1, 0.0);
        for (int k = 1; k <= panels; ++k) {
            const double a = lo + (k - 1) * step;
            c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] + oracle::simpson(pdf, a, a + step, 4);
        }
    }
    double operator()(double x) const {
        const double u = (x - lo) / step;
        if (u <= 0) return 0.0;
        if (u >= static_cast<double>(c.size() - 1)) return c.back();
        const auto k = static_cast<std::size_t>(u);
        return c[k] + (u - static_cast<double>(k)) * (c[k + 1] - c[k]);
    }
};
}  // namespace

TEST_CASE("PhaseSchedule") {
    const auto s = PhaseSchedule::uniform();
    CHECK(s.phases().size() == 12);
    CHECK(s.samples_per_phase() == 5000);
    CHECK(s.phases()[1] == Approx(kPi / 12));
    CHECK_THROWS_AS(PhaseSchedule({0.0, 0.0}, 10), InvalidArgument);
    CHECK_THROWS_AS(PhaseSchedule({0.0, 4.0}, 10), InvalidArgument);
    CHECK_THROWS_AS(PhaseSchedule({}, 10), InvalidArgument);
    CHECK_THROWS_AS((AcCouplingModel{1.2}.validate()), InvalidArgument);
    CHECK_THROWS_AS((AcCouplingModel{0.0}.validate()), InvalidArgument);
}

TEST_CASE("sample_marginal: vacuum variance") {
    const auto x = values(sample_marginal(marginal_coherent(0.0), 0.3, 100000, 5));
    CHECK(std::abs(stats(x).var - 0.25) <= 0.005);
}

TEST_CASE("sample_marginal: lossy SPACS histogram passes chi-square") {
    const double r = 0.387, eta = 0.602;
    const auto dist = marginal_spacs_lossy(r, EfficiencyModel(eta));
    const auto x = values(sample_marginal(dist, 0.0, 100000, 17));
    // 40 equal-width bins over [-2, 2.5], tails lumped into the edge bins.
    const int bins = 40;
    const double lo = -2.0, hi = 2.5, w = (hi - lo) / bins;
    std::vector<double> observed(bins, 0.0);
    for (double v : x) {
        int b = static_cast<int>(std::floor((v - lo) / w));
        observed[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1.0;
    }
    auto pdf = [&](double v) { return spacs_marginal_density(r, eta, v, 0.0); };
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double a = b == 0 ? -8.0 : lo + b * w;
        const double c = b == bins - 1 ? 8.0 : lo + (b + 1) * w;
        const double expected = 1e5 * oracle::simpson(pdf, a, c, 200);
        chi2 += (observed[static_cast<std::size_t>(b)] - expected) * (observed[static_cast<std::size_t>(b)] - expected) / expected;
    }
    const double pvalue = boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), chi2));
    CHECK(pvalue > 0.01);
}

TEST_CASE("sample_marginal: single photon has zero mean; moments track quad_mean/quad_var") {
    const auto one = values(sample_marginal(marginal_spacs_lossy(0.0, EfficiencyModel(1.0)), 1.1, 50000, 3));
    const auto s1 = stats(one);
    CHECK(std::abs(s1.mean) <= 4.0 * s1.se_mean);

    for (double th : {0.0, 0.9, kPi / 2}) {
        const EfficiencyModel eff(0.602);
        const auto x = values(sample_marginal(marginal_spacs_lossy(0.955, eff), th, 20000, 100 + static_cast<std::uint64_t>(th * 10)));
        const auto s = stats(x);
        CHECK(std::abs(s.mean - quad_mean(0.955, th, eff)) <= 4.0 * s.se_mean);
        CHECK(std::abs(s.var - quad_var(0.955, th, eff)) <= 4.0 * s.se_var);
    }
}

TEST_CASE("sample_marginal is deterministic under a seed") {
    const auto d = marginal_spacs_lossy(0.5, EfficiencyModel(0.7));
    CHECK(sample_marginal(d, 0.2, 1000, 9) == sample_marginal(d, 0.2, 1000, 9));
    CHECK(sample_marginal(d, 0.2, 1000, 9) != sample_marginal(d, 0.2, 1000, 10));
}

TEST_CASE("two routes to the lossy SPACS law agree (KS < 0.01)") {
    for (double r : {0.0, 0.387, 0.955}) {
        const EfficiencyModel eff(0.602);
        const auto rho = bernoulli_map(spacs_density(r, {30, 1e-14}), eff);
        for (double th : {0.0, 1.2}) {
            const auto x = values(sample_state_marginal(rho, th, 100000, 77));
            const NumericCdf cdf([&](double v) { return spacs_marginal_density(r, 0.602, v, th); }, -8.0, 8.0, 8000);
            CHECK(oracle::ks_distance(x, cdf) < 0.01);
        }
    }
}

TEST_CASE("sample_state_marginal: Fock and coherent states") {
    const auto one = DensityMatrix::from_pure(make_fock(1, {6}));
    const auto x = values(sample_state_marginal(one, 0.4, 100000, 21));
    const NumericCdf cdf(oracle::single_photon_marginal, -6.0, 6.0, 6000);
    CHECK(oracle::ks_distance(x, cdf) < 0.01);

    const auto coh = DensityMatrix::from_pure(make_coherent(1.0, {30, 1e-14}));
    const auto s = stats(values(sample_state_marginal(coh, 0.0, 20000, 22)));
    CHECK(std::abs(s.mean - 1.0) <= 4.0 * s.se_mean);
}

TEST_CASE("sample_state_marginal rejects badly non-physical states") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 0) = 1.6;
    m(1, 1) = -0.6;
    CHECK_THROWS_AS(sample_state_marginal(DensityMatrix(m), 0.0, 10, 1), DensityNegativeBeyondTolerance);
}

TEST_CASE("acquire_frames: default schedule sizes") {
    const AmplifierParams prep{0.03, 0.955};
    const auto s = acquire_frames(prep, PhaseSchedule::uniform(), {1.0}, EfficiencyModel(0.602), 4);
    std::size_t heralded = 0, reference = 0;
    for (const auto& q : s) (q.role == FrameRole::Heralded ? heralded : reference)++;
    CHECK(heralded == 60000);
    CHECK(reference == 60000);
    const auto groups = group_by_phase(s, FrameRole::Reference);
    CHECK(groups.size() == 12);
    for (const auto& g : groups) CHECK(g.x.size() == 5000);

    // reference mean at theta = 0 is sqrt(eta) |alpha|
    const auto r0 = stats(groups.front().x);
    CHECK(std::abs(r0.mean - std::sqrt(0.602) * 0.955) <= 4.0 * r0.se_mean);
}

TEST_CASE("acquire_frames: AC coupling scales the mean only") {
    const AmplifierParams prep{0.03, 1.0};
    const PhaseSchedule sched({0.0, kPi / 4, kPi / 2}, 20000);
    const auto s = acquire_frames(prep, sched, {0.8}, EfficiencyModel(1.0), 8);
    const auto ref = group_by_phase(s, FrameRole::Reference);
    const auto r0 = stats(ref.front().x);
    CHECK(std::abs(r0.mean - 0.8) <= 4.0 * r0.se_mean);
    CHECK(std::abs(r0.var - 0.25) <= 4.0 * r0.se_var);
    const auto her = group_by_phase(s, FrameRole::Heralded);
    const auto h0 = stats(her.front().x);
    CHECK(std::abs(h0.mean - 0.8 * quad_mean(1.0, 0.0, EfficiencyModel(1.0))) <= 4.0 * h0.se_mean);
    CHECK(std::abs(h0.var - quad_var(1.0, 0.0, EfficiencyModel(1.0))) <= 4.0 * h0.se_var);
}

TEST_CASE("acquire_frames honours the seed phase") {
    const Complex a = std::polar(0.9, 0.6);
    const PhaseSchedule sched({0.0, 0.6, 2.0}, 20000);
    const EfficiencyModel eff(0.7);
    const auto s = acquire_frames({0.03, a}, sched, {1.0}, eff, 12);
    const auto her = group_by_phase(s, FrameRole::Heralded);
    for (const auto& g : her) {
        const auto st = stats(g.x);
        CHECK(std::abs(st.mean - quad_mean(0.9, g.theta - 0.6, eff)) <= 4.0 * st.se_mean);
    }
}

TEST_CASE("acquire_frames is reproducible across worker counts") {
    const AmplifierParams prep{0.03, 0.7, 8.2e7, 1e5};
    const auto sched = PhaseSchedule::uniform(6, 500);
    const auto a = acquire_frames(prep, sched, {0.9}, EfficiencyModel(0.6), 31, {1});
    const auto b = acquire_frames(prep, sched, {0.9}, EfficiencyModel(0.6), 31, {3});
    CHECK(a == b);
}

TEST_CASE("calibrate_mean_scale") {
    const EfficiencyModel eff(0.602);
    for (double scale : {0.8, 1.0}) {
        const auto s = acquire_frames({0.03, 0.955}, PhaseSchedule::uniform(12, 5000), {scale}, eff, 40);
        const auto fit = calibrate_mean_scale(s, 0.955, eff);
        CHECK(std::abs(fit.scale - scale) <= 0.01);
        CHECK(fit.n_phases == 12);
        CHECK(fit.std_error > 0.0);

        // undoing the scale restores quad_mean within 3 sigma at every phase
        const auto fixed = rescale_means(s, fit.scale, FrameRole::Heralded);
        for (const auto& g : group_by_phase(fixed, FrameRole::Heralded)) {
            const auto st = stats(g.x);
            CHECK(std::abs(st.mean - quad_mean(0.955, g.theta, eff)) <= 3.0 * std::hypot(st.se_mean, fit.std_error * quad_mean(0.955, g.theta, eff)));
        }
    }
}

TEST_CASE("calibrate_mean_scale degenerate inputs") {
    const EfficiencyModel eff(0.6);
    const auto zero = acquire_frames({0.03, 0.0}, PhaseSchedule::uniform(12, 100), {1.0}, eff, 1);
    CHECK_THROWS_AS(calibrate_mean_scale(zero, 0.0, eff), DegenerateFit);
    const auto perp = acquire_frames({0.03, 1.0}, PhaseSchedule({kPi / 2}, 100), {1.0}, eff, 1);
    CHECK_THROWS_AS(calibrate_mean_scale(perp, 1.0, eff), DegenerateFit);
}

TEST_CASE("rescale_means keeps the spread") {
    const auto s = acquire_frames({0.03, 1.0}, PhaseSchedule({0.0, 1.0, 2.0}, 1000), {0.8}, EfficiencyModel(1.0), 2);
    const auto r = rescale_means(s, 0.8, FrameRole::Reference);
    const auto before = group_by_phase(s, FrameRole::Reference);
    const auto after = group_by_phase(r, FrameRole::Reference);
    for (std::size_t j = 0; j < before.size(); ++j) {
        const auto a = stats(before[j].x), b = stats(after[j].x);
        CHECK(b.mean == Approx(a.mean / 0.8).epsilon(1e-12));
        CHECK(b.var == Approx(a.var).epsilon(1e-10));
    }
    // heralded samples untouched
    for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k].role == FrameRole::Heralded) CHECK(r[k].x == s[k].x);
}

TEST_CASE("single-photon efficiency fit") {
    const auto x = values(sample_state_marginal(bernoulli_map(DensityMatrix::from_pure(make_fock(1, {6})), EfficiencyModel(0.602)), 0.0,
                                                100000, 55));
    const auto fit = fit_single_photon_efficiency(x);
    CHECK(std::abs(fit.eta - 0.602) <= 4.0 * fit.std_error);
    CHECK(fit.std_error < 0.01);
}
