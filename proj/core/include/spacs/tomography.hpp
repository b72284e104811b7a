#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spacs/fock.hpp"
#include "spacs/homodyne.hpp"
#include "spacs/phase_space.hpp"

namespace spacs {

// Tabulation range for pattern functions: nodes at k * spacing for
// |x| <= x_max.
struct PatternGridSpec {
    double x_max = 0.0;
    double spacing = 1.0 / 512.0;

    // 6 + sqrt(dim + 1/2): six vacuum widths beyond the classical turning
    // point of the highest retained number state.
    static PatternGridSpec default_for(std::size_t dim);
};

// Unit-efficiency pattern functions f_{nm}(x), n, m < dim. Element rho_{nm}
// of a state is the phase average of f_{nm}(x) e^{i(n-m) theta} over its
// quadrature distribution. f_{nm} = f_{mn} is real and has parity (-1)^{n+m}.
class PatternFunctionTable {
public:
    PatternFunctionTable(std::size_t dim, PatternGridSpec grid, std::vector<double> values);

    std::size_t dim() const { return dim_; }
    const PatternGridSpec& grid() const { return grid_; }
    std::size_t n_nodes() const { return n_nodes_; }
    double node(std::size_t k) const { return -grid_.x_max + static_cast<double>(k) * grid_.spacing; }

    // Samples beyond this magnitude are rejected rather than extrapolated.
    double usable_range() const { return grid_.x_max - 2.0 * grid_.spacing; }
    bool in_range(double x) const { return std::abs(x) <= usable_range(); }

    // Tabulated value at node k.
    double at_node(std::size_t n, std::size_t m, std::size_t k) const { return values_[pair(n, m) * n_nodes_ + k]; }
    // All nodes of one pair, contiguous.
    std::span<const double> row(std::size_t pair_index) const {
        return {values_.data() + pair_index * n_nodes_, n_nodes_};
    }

    // Cubic interpolation between nodes. Requires in_range(x).
    double operator()(std::size_t n, std::size_t m, double x) const;

    // All pairs n >= m at x, in pair order n(n+1)/2 + m.
    void evaluate_all(double x, std::span<double> out) const;

    static std::size_t pair(std::size_t n, std::size_t m) {
        return n >= m ? n * (n + 1) / 2 + m : m * (m + 1) / 2 + n;
    }
    std::size_t n_pairs() const { return dim_ * (dim_ + 1) / 2; }

private:
    std::size_t dim_;
    PatternGridSpec grid_;
    std::size_t n_nodes_;
    std::vector<double> values_;
};

// f_{nm}(x) = d/dq [psi_m(q) phi_n(q)] for n >= m in oscillator units
// q = sqrt(2) x, with phi the non-normalizable solution generated by the
// same ladder recurrence from phi_0 = 2 pi^{1/4} e^{q^2/2} D(q) (D the
// Dawson integral). The upward recurrence for phi is unstable once
// q^2 > 2n+1, so values are computed in extended precision.
double pattern_function(std::size_t n, std::size_t m, double x);

struct PatternBuildOptions {
    bool validate = true;
    std::size_t workers = 0;
};

// Tabulates all f_{nm} with n, m < dim and, unless disabled, runs
// validate_pattern_functions.
PatternFunctionTable build_pattern_functions(std::size_t dim, PatternGridSpec grid = {},
                                             const PatternBuildOptions& options = {});

// Reconstructs vacuum, |1> and the coherent states 0.5 and 0.7 from their
// exact marginals and throws GridTooCoarse if any element is off by more
// than `tolerance`.
void validate_pattern_functions(const PatternFunctionTable& table, double tolerance = 1e-3);

// Weights for the discrete phase average: each phase gets half the cyclic
// (period pi) distance to its neighbours, divided by pi. Uniform schedules
// get 1/K each. Input must be sorted and within [0, pi).
std::vector<double> phase_weights(std::span<const double> phases);

struct ReconstructionResult {
    DensityMatrix rho;
    // Standard errors of the kernel averages.
    Eigen::MatrixXd sigma;
    std::size_t n_samples = 0;
    std::size_t n_rejected = 0;
    std::size_t n_phases = 0;
    std::vector<double> phases;
    // Largest change made by Hermitization; zero up to rounding because the
    // estimator is Hermitian by construction.
    double hermitization_change = 0.0;
};

struct ReconstructOptions {
    FrameRole role = FrameRole::Heralded;
    std::size_t workers = 0;
    // Largest allowed cyclic gap between consecutive phases.
    double max_phase_gap = 1.5707963267948966;
};

// Pattern-function estimate from phase-tagged samples of the given role.
// Samples at theta = pi are folded to theta = 0 with x -> -x.
ReconstructionResult reconstruct(std::span<const QuadratureSample> samples, const PatternFunctionTable& table,
                                 const ReconstructOptions& options = {});

// Same estimator with the x-average replaced by quadrature over an exact
// marginal, at the given phases.
DensityMatrix reconstruct_from_marginal(const MarginalDistribution& dist, std::span<const double> phases,
                                        const PatternFunctionTable& table);

// Tr(rho^2).
double purity(const DensityMatrix& rho);

struct FidelityResult {
    double value = 0.0;
    // Sum of the magnitudes of negative eigenvalues of sqrt(rc) re sqrt(rc)
    // that were dropped before taking the square root.
    double dropped_negative_mass = 0.0;
    // Set when value > 1, which can only happen for non-positive rho_e.
    bool exceeds_unity = false;
};

// |Tr sqrt(sqrt(rho_c) rho_e sqrt(rho_c))|^2. rho_c must be positive
// semidefinite; rho_e need only be Hermitian.
FidelityResult fidelity(const DensityMatrix& rho_c, const DensityMatrix& rho_e);

// Nearest-in-spectrum physical state: negative eigenvalues set to zero and
// the trace restored.
DensityMatrix clip_to_psd(const DensityMatrix& rho);

struct ElementAgreement {
    std::size_t within = 0;
    std::size_t total = 0;
    double fraction() const { return total == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(total); }
};

// Counts elements (real and imaginary parts treated together) with
// |rho_e - rho_c| <= k sigma.
ElementAgreement agreement_within_sigma(const ReconstructionResult& result, const DensityMatrix& rho_c, double k = 3.0);

struct SqueezingReport {
    double var_0 = 0.0;
    double var_90 = 0.0;
    double se_0 = 0.0;
    double se_90 = 0.0;
    // (1/4 - var_0) / (1/4) * 100; negative when there is no squeezing.
    double percent_below_vacuum = 0.0;
};

// From samples at theta = 0 and theta = pi/2 (matched to 1e-9).
SqueezingReport squeezing_report(std::span<const QuadratureSample> samples, FrameRole role = FrameRole::Heralded);
// From a density matrix via the quadrature operator.
SqueezingReport squeezing_report(const DensityMatrix& rho);
// Closed form for the lossy SPACS.
SqueezingReport squeezing_report(double abs_alpha, const EfficiencyModel& eff);

}  // namespace spacs
