#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "spacs/errors.hpp"
#include "spacs/loss.hpp"
#include "spacs/tomography.hpp"

using namespace spacs;
using doctest::Approx;

namespace {
double max_abs(const Eigen::MatrixXcd& m) {
    return m.cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("bernoulli_map on a single photon") {
    const auto rho = DensityMatrix::from_pure(make_fock(1, {6}));
    const auto out = bernoulli_map(rho, EfficiencyModel(0.6));
    CHECK(out(1, 1).real() == Approx(0.6).epsilon(1e-15));
    CHECK(out(0, 0).real() == Approx(0.4).epsilon(1e-15));
    CHECK(purity(out) == Approx(0.52).epsilon(1e-14));
}

TEST_CASE("bernoulli_map is the identity at eta = 1") {
    const auto rho = spacs_density(Complex(0.4, 0.3), {20});
    CHECK(max_abs(bernoulli_map(rho, EfficiencyModel(1.0)).elements() - rho.elements()) == 0.0);
}

TEST_CASE("coherent state maps to the attenuated coherent state") {
    const Complex a(0.9, -0.5);
    const double eta = 0.6;
    const auto out = bernoulli_map(DensityMatrix::from_pure(make_coherent(a, {40, 1e-14})), EfficiencyModel(eta));
    const auto ref = DensityMatrix::from_pure(make_coherent(std::sqrt(eta) * a, {40, 1e-14}));
    CHECK(max_abs(out.elements() - ref.elements()) < 1e-10);
}

TEST_CASE("bernoulli_map agrees with the Kraus-operator form") {
    const auto rho = spacs_density(Complex(0.7, 0.6), {30, 1e-14});
    for (double eta : {0.3, 0.602, 0.95}) {
        const auto out = bernoulli_map(rho, EfficiencyModel(eta));
        CHECK(max_abs(out.elements() - oracle::kraus_loss(rho.elements(), eta)) < 1e-13);
    }
}

TEST_CASE("diagonal action is binomial thinning") {
    const auto rho = spacs_density(1.3, {40, 1e-14});
    std::vector<double> p(40);
    for (std::size_t n = 0; n < 40; ++n) p[n] = rho(n, n).real();
    const auto ref = oracle::thin(p, 0.45);
    const auto out = bernoulli_map(rho, EfficiencyModel(0.45));
    for (std::size_t n = 0; n < 40; ++n) CHECK(std::abs(out(n, n).real() - ref[n]) < 1e-14);
}

TEST_CASE("trace, Hermiticity and positivity preserved") {
    for (double r : {0.0, 0.5, 1.5}) {
        const auto rho = spacs_density(r, {40, 1e-14});
        const auto out = bernoulli_map(rho, EfficiencyModel(0.37));
        CHECK(std::abs(out.trace() - rho.trace()) <= 1e-12);
        CHECK(max_abs(out.elements() - out.elements().adjoint()) < 1e-15);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.elements());
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("insufficient headroom is an error") {
    // Coherent |2> truncated at 8 still has population in the top level.
    const auto rho = DensityMatrix::from_pure(make_coherent(2.0, {8, 1.0}));
    CHECK_THROWS_AS(bernoulli_map(rho, EfficiencyModel(0.5)), InsufficientHeadroom);
    CHECK_NOTHROW(bernoulli_map(rho, EfficiencyModel(0.5), {0, 1.0}));
}

TEST_CASE("compose_loss") {
    CHECK(compose_loss(EfficiencyModel(1.0), EfficiencyModel(0.7)).eta() == 0.7);
    CHECK(compose_loss(EfficiencyModel(0.8), EfficiencyModel(0.75)).eta() == Approx(0.6).epsilon(1e-15));
    const auto rho = spacs_density(1.0, {40, 1e-14});
    const auto twice = bernoulli_map(bernoulli_map(rho, EfficiencyModel(0.9)), EfficiencyModel(0.7));
    const auto once = bernoulli_map(rho, compose_loss(EfficiencyModel(0.9), EfficiencyModel(0.7)));
    CHECK(max_abs(twice.elements() - once.elements()) < 1e-10);
}

TEST_CASE("purity table: loss on an extended basis, then truncation") {
    const double alphas[] = {0.0, 0.387, 0.955, 2.61};
    const std::size_t dims[] = {6, 7, 8, 14};
    const double published[] = {0.52, 0.64, 0.87, 0.99};
    for (int k = 0; k < 4; ++k) {
        const auto rho = lossy_spacs_density(alphas[k], EfficiencyModel(0.6), dims[k]);
        CHECK(std::abs(purity(rho) - published[k]) <= 0.01);
    }
}

TEST_CASE("purity table: truncating before the loss misses the |alpha| = 2.61 row") {
    // Truncation first discards the population that loss would move into
    // the retained levels; only the first three rows survive that order.
    const double alphas[] = {0.0, 0.387, 0.955, 2.61};
    const std::size_t dims[] = {6, 7, 8, 14};
    const double published[] = {0.52, 0.64, 0.87, 0.99};
    for (int k = 0; k < 4; ++k) {
        const auto rho = spacs_density(alphas[k], {dims[k], 1.0});
        const double p = purity(bernoulli_map(rho, EfficiencyModel(0.6), {0, 1.0}));
        if (k < 3)
            CHECK(std::abs(p - published[k]) <= 0.01);
        else
            CHECK(std::abs(p - published[k]) > 0.1);
    }
}
