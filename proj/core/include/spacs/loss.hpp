#pragma once

#include <cstddef>

#include "spacs/fock.hpp"
#include "spacs/phase_space.hpp"

namespace spacs {

struct LossOptions {
    // The top `headroom` number levels of the input must carry at most
    // `headroom_tolerance` population, otherwise the input is judged to be
    // a truncation of a state with support beyond the basis.
    std::size_t headroom = 1;
    double headroom_tolerance = 1e-12;
};

// Photon-loss (Bernoulli) channel in the number basis:
//
//   rho'_{ij} = eta^{(i+j)/2} sum_k [C(i+k,i) C(j+k,j)]^{1/2} (1-eta)^k rho_{i+k,j+k}
//
// Trace preserving; eta = 1 returns the input unchanged.
DensityMatrix bernoulli_map(const DensityMatrix& rho, const EfficiencyModel& eff, const LossOptions& options = {});

// Loss stages in series.
EfficiencyModel compose_loss(const EfficiencyModel& first, const EfficiencyModel& second);

// Smallest dimension >= min_dim at which the SPACS population above the
// basis is below `tail`.
std::size_t spacs_working_dim(Complex alpha, std::size_t min_dim, double tail = 1e-13);

// SPACS after loss, computed on an extended basis and then truncated (not
// renormalized) to `dim`.
DensityMatrix lossy_spacs_density(Complex alpha, const EfficiencyModel& eff, std::size_t dim);

}  // namespace spacs
