#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "spacs/errors.hpp"
#include "spacs/loss.hpp"
#include "spacs/tomography.hpp"

using namespace spacs;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

const PatternFunctionTable& table8() {
    static const PatternFunctionTable t = build_pattern_functions(8);
    return t;
}

// n_phases uniform phases, samples drawn independently at each.
std::vector<QuadratureSample> sample_uniform(const MarginalDistribution& dist, std::size_t n_phases, std::size_t per_phase,
                                             std::uint64_t seed) {
    std::vector<QuadratureSample> out;
    for (std::size_t j = 0; j < n_phases; ++j) {
        const auto s = sample_marginal(dist, kPi * static_cast<double>(j) / static_cast<double>(n_phases), per_phase,
                                       seed * 1000 + j);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

DensityMatrix outer(const Eigen::VectorXcd& v) {
    return DensityMatrix(Eigen::MatrixXcd(v * v.adjoint()));
}

double max_sigma_ratio(const ReconstructionResult& r, const DensityMatrix& truth) {
    double worst = 0.0;
    for (std::size_t n = 0; n < r.rho.dim(); ++n)
        for (std::size_t m = 0; m < r.rho.dim(); ++m)
            worst = std::max(worst, std::abs(r.rho(n, m) - truth(n, m)) /
                                        r.sigma(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)));
    return worst;
}
}  // namespace

TEST_CASE("pattern functions against the Fourier-integral oracle") {
    // high-precision values of the same integral
    CHECK(pattern_function(0, 0, 0.3) == Approx(1.36048673727085).epsilon(1e-12));
    CHECK(pattern_function(1, 0, 0.3) == Approx(1.88214748024442).epsilon(1e-12));
    CHECK(pattern_function(3, 1, 1.2) == Approx(1.68624606583687).epsilon(1e-12));
    CHECK(pattern_function(7, 5, 5.0) == Approx(-0.00644228507495526).epsilon(1e-9));
    for (int n = 0; n < 8; ++n)
        for (int m = 0; m <= n; ++m)
            for (double x : {0.0, 0.45, 1.3, 2.7, 4.2}) {
                const double ref = oracle::pattern_function_integral(n, m, x);
                CHECK(std::abs(pattern_function(static_cast<std::size_t>(n), static_cast<std::size_t>(m), x) - ref) < 1e-8);
            }
}

TEST_CASE("pattern functions: symmetry and parity") {
    for (double x : {0.2, 1.1, 3.3}) {
        CHECK(pattern_function(4, 2, x) == pattern_function(2, 4, x));
        CHECK(pattern_function(5, 2, -x) == Approx(-pattern_function(5, 2, x)).epsilon(1e-12));
        CHECK(pattern_function(6, 2, -x) == Approx(pattern_function(6, 2, x)).epsilon(1e-12));
    }
}

TEST_CASE("pattern-function table") {
    const auto& t = table8();
    CHECK(t.dim() == 8);
    CHECK(t.n_pairs() == 36);
    CHECK(t.grid().spacing == 1.0 / 512.0);
    CHECK(t.grid().x_max == Approx(6.0 + std::sqrt(8.5)).epsilon(1e-3));
    // cubic interpolation at spacing 1/512 leaves errors of a few 1e-9 for M = 8
    for (double x : {-3.1, -0.77, 0.0, 0.5003, 2.25, 7.0})
        for (std::size_t n = 0; n < 8; ++n)
            for (std::size_t m = 0; m <= n; ++m) CHECK(std::abs(t(n, m, x) - pattern_function(n, m, x)) < 2e-8);
    std::vector<double> all(t.n_pairs());
    t.evaluate_all(1.234, all);
    CHECK(all[PatternFunctionTable::pair(5, 3)] == Approx(t(5, 3, 1.234)).epsilon(1e-14));
    CHECK(!t.in_range(t.grid().x_max));
}

TEST_CASE("table validation on exact marginals") {
    const auto& t = table8();
    const auto phases = [] {
        std::vector<double> p(18);
        for (std::size_t j = 0; j < p.size(); ++j) p[j] = kPi * static_cast<double>(j) / 18.0;
        return p;
    }();
    const auto vac = reconstruct_from_marginal(marginal_coherent(0.0), phases, t);
    CHECK(vac(0, 0).real() == Approx(1.0).epsilon(1e-3));
    const auto one = reconstruct_from_marginal(marginal_spacs_lossy(0.0, EfficiencyModel(1.0)), phases, t);
    CHECK(one(1, 1).real() == Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(one(0, 0)) < 1e-3);
    const auto coh = reconstruct_from_marginal(marginal_coherent(0.5), phases, t);
    const auto ref = oracle::coherent(0.5, 8);
    CHECK(std::abs(coh(0, 1) - ref(0) * std::conj(ref(1))) < 1e-3);
    CHECK_NOTHROW(validate_pattern_functions(t));
}

TEST_CASE("a table that misses the states' support fails validation") {
    CHECK_THROWS_AS(build_pattern_functions(6, PatternGridSpec{1.5, 1.0 / 512.0}), GridTooCoarse);
}

TEST_CASE("phase_weights") {
    const std::vector<double> uni{0.0, kPi / 4, kPi / 2, 3 * kPi / 4};
    for (double w : phase_weights(uni)) CHECK(w == Approx(0.25).epsilon(1e-14));
    const std::vector<double> irregular{0.0, 0.5, 1.0, 2.0};
    const auto w = phase_weights(irregular);
    const double tail = kPi - 2.0;
    CHECK(w[0] == Approx((tail + 0.5) / (2 * kPi)));
    CHECK(w[1] == Approx(1.0 / (2 * kPi)));
    CHECK(w[2] == Approx(1.5 / (2 * kPi)));
    CHECK(w[3] == Approx((1.0 + tail) / (2 * kPi)));
}

TEST_CASE("reconstruct: lossy single photon") {
    const auto dist = marginal_spacs_lossy(0.0, EfficiencyModel(0.602));
    const auto s = sample_uniform(dist, 12, 5000, 1);
    const auto r = reconstruct(s, table8());
    CHECK(r.n_samples == 60000);
    CHECK(r.n_phases == 12);
    CHECK(std::abs(r.rho(1, 1).real() - 0.602) <= 3.0 * r.sigma(1, 1));
    CHECK(std::abs(r.rho(0, 0).real() - 0.398) <= 3.0 * r.sigma(0, 0));
    CHECK(r.rho.trace() == Approx(1.0).epsilon(0.02));
    for (Eigen::Index i = 0; i < r.sigma.size(); ++i) CHECK(r.sigma.data()[i] >= 0.0);
}

TEST_CASE("reconstruct: lossy SPACS at |alpha| = 0.955, M = 8") {
    const EfficiencyModel eff(0.6);
    const auto s = acquire_frames({0.03, 0.955}, PhaseSchedule::uniform(), {1.0}, eff, 2);
    const auto r = reconstruct(s, table8());
    const auto theory = lossy_spacs_density(0.955, eff, 8);
    CHECK(agreement_within_sigma(r, theory).fraction() >= 0.95);
    CHECK(agreement_within_sigma(r, theory).total == 64);
}

TEST_CASE("oracle reproduction from 1e5 exact-model samples") {
    struct Case {
        const char* name;
        MarginalDistribution dist;
        DensityMatrix truth;
    };
    const EfficiencyModel eff(0.6);
    const Case cases[] = {
        {"vacuum", marginal_coherent(0.0), outer(oracle::coherent(0.0, 8))},
        {"fock1", marginal_spacs_lossy(0.0, EfficiencyModel(1.0)), DensityMatrix::from_pure(make_fock(1, {8}))},
        {"coherent0.7", marginal_coherent(0.7), outer(oracle::coherent(0.7, 8))},
        {"spacs0.955", marginal_spacs_lossy(0.955, eff), lossy_spacs_density(0.955, eff, 8)},
    };
    std::uint64_t seed = 10;
    for (const auto& c : cases) {
        CAPTURE(c.name);
        const auto r = reconstruct(sample_uniform(c.dist, 20, 5000, seed++), table8());
        CHECK(max_sigma_ratio(r, c.truth) <= 4.0);
        CHECK(fidelity(c.truth, r.rho).value >= 0.99);
        // Hermitization moves nothing by more than its own error bar
        CHECK(r.hermitization_change <= r.sigma.minCoeff());
    }
}

TEST_CASE("sigma shrinks as 1/sqrt(N)") {
    const auto dist = marginal_spacs_lossy(0.955, EfficiencyModel(0.6));
    std::vector<double> norms;
    for (std::size_t per_phase : {1000u, 4000u, 16000u})
        norms.push_back(reconstruct(sample_uniform(dist, 10, per_phase, 3), table8()).sigma.norm());
    CHECK(norms[0] / norms[1] == Approx(2.0).epsilon(0.1));
    CHECK(norms[1] / norms[2] == Approx(2.0).epsilon(0.1));
}

TEST_CASE("reconstruct: folding, rejection and worker independence") {
    const auto dist = marginal_coherent(0.4);
    std::vector<QuadratureSample> s;
    // 17 phases on [0, pi]; the one at pi folds onto theta = 0.
    for (std::size_t j = 0; j <= 16; ++j) {
        const auto part = sample_marginal(dist, kPi * static_cast<double>(j) / 16.0, 1000, j + 1);
        s.insert(s.end(), part.begin(), part.end());
    }
    s.push_back({100.0, 0.0, FrameRole::Heralded});
    s.push_back({0.0, 0.0, FrameRole::Reference});
    const auto r1 = reconstruct(s, table8(), {FrameRole::Heralded, 1});
    const auto r3 = reconstruct(s, table8(), {FrameRole::Heralded, 3});
    CHECK(r1.n_phases == 16);
    CHECK(r1.phases.back() < kPi);
    CHECK(r1.n_rejected == 1);
    CHECK(r1.n_samples == 17000);
    CHECK((r1.rho.elements() - r3.rho.elements()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_sigma_ratio(r1, outer(oracle::coherent(0.4, 8))) <= 4.0);
}

TEST_CASE("reconstruct: insufficient phase coverage") {
    CHECK_THROWS_AS(reconstruct({}, table8()), InsufficientPhaseCoverage);
    const auto dist = marginal_coherent(0.0);
    auto two = sample_uniform(dist, 2, 100, 1);
    CHECK_THROWS_AS(reconstruct(two, table8()), InsufficientPhaseCoverage);
    std::vector<QuadratureSample> narrow;
    for (double th : {0.0, 0.1, 0.2}) {
        const auto part = sample_marginal(dist, th, 100, 2);
        narrow.insert(narrow.end(), part.begin(), part.end());
    }
    CHECK_THROWS_AS(reconstruct(narrow, table8()), InsufficientPhaseCoverage);
}

TEST_CASE("purity") {
    CHECK(purity(spacs_density(0.8, {30, 1e-14})) == Approx(1.0).epsilon(1e-12));
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 0.4;
    m(1, 1) = 0.6;
    CHECK(purity(DensityMatrix(m)) == Approx(0.52).epsilon(1e-14));
    CHECK(std::abs(purity(lossy_spacs_density(2.61, EfficiencyModel(0.6), 14)) - 0.99) <= 0.01);
}

TEST_CASE("fidelity") {
    const auto pure = spacs_density(0.6, {20, 1e-14});
    CHECK(fidelity(pure, pure).value == Approx(1.0).epsilon(1e-10));
    const auto f0 = DensityMatrix::from_pure(make_fock(0, {4}));
    const auto f1 = DensityMatrix::from_pure(make_fock(1, {4}));
    CHECK(std::abs(fidelity(f0, f1).value) < 1e-14);

    // Mixed-state value against the two-qubit closed form
    // F = (sqrt(p q) + sqrt((1-p)(1-q)))^2 for commuting diagonal states.
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2), b = Eigen::MatrixXcd::Zero(2, 2);
    a(0, 0) = 0.3, a(1, 1) = 0.7, b(0, 0) = 0.6, b(1, 1) = 0.4;
    const double ref = std::pow(std::sqrt(0.18) + std::sqrt(0.28), 2);
    CHECK(fidelity(DensityMatrix(a), DensityMatrix(b)).value == Approx(ref).epsilon(1e-12));
}

TEST_CASE("fidelity above one is flagged, not clamped") {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(2, 2);
    e(0, 0) = 1.1;
    e(1, 1) = -0.1;
    const auto f = fidelity(DensityMatrix::from_pure(make_fock(0, {2})), DensityMatrix(e));
    CHECK(f.value == Approx(1.1).epsilon(1e-12));
    CHECK(f.exceeds_unity);

    Eigen::MatrixXcd c = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
    const auto g = fidelity(DensityMatrix(c), DensityMatrix(e));
    CHECK(g.dropped_negative_mass == Approx(0.05).epsilon(1e-12));
    CHECK(g.value == Approx(0.55).epsilon(1e-12));
    CHECK(!g.exceeds_unity);

    CHECK_THROWS_AS(fidelity(DensityMatrix(e), DensityMatrix(c)), TheoryNotPSD);
}

TEST_CASE("clip_to_psd") {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(2, 2);
    e(0, 0) = 1.1;
    e(1, 1) = -0.1;
    const auto c = clip_to_psd(DensityMatrix(e));
    CHECK(c(0, 0).real() == Approx(1.0));
    CHECK(std::abs(c(1, 1)) < 1e-15);
}

TEST_CASE("squeezing_report") {
    const EfficiencyModel eff(0.6);
    const auto none = squeezing_report(0.0, eff);
    CHECK(none.var_0 == Approx(0.25 + 0.3));
    CHECK(none.var_90 == Approx(0.25 + 0.3));
    CHECK(none.percent_below_vacuum < 0.0);

    const auto deep = squeezing_report(1.85, eff);
    CHECK(std::abs(deep.percent_below_vacuum - 15.0) <= 0.5);
    CHECK(squeezing_report(0.5, eff).var_0 > 0.25);

    // matrix route agrees with the closed form
    const auto m = squeezing_report(bernoulli_map(spacs_density(1.85, {40, 1e-14}), eff));
    CHECK(m.var_0 == Approx(deep.var_0).epsilon(1e-8));
    CHECK(m.var_90 == Approx(deep.var_90).epsilon(1e-8));

    // sample route within 4 standard errors
    const auto dist = marginal_spacs_lossy(1.85, eff);
    auto s = sample_marginal(dist, 0.0, 100000, 4);
    const auto s90 = sample_marginal(dist, kPi / 2, 100000, 5);
    s.insert(s.end(), s90.begin(), s90.end());
    const auto sr = squeezing_report(s);
    CHECK(std::abs(sr.var_0 - deep.var_0) <= 4.0 * sr.se_0);
    CHECK(std::abs(sr.var_90 - deep.var_90) <= 4.0 * sr.se_90);
}
