#include "spacs/loss.hpp"

#include <cmath>
#include <sstream>

#include "spacs/errors.hpp"
#include "spacs/special.hpp"

namespace spacs {

DensityMatrix bernoulli_map(const DensityMatrix& rho, const EfficiencyModel& eff, const LossOptions& options) {
    const std::size_t dim = rho.dim();
    if (options.headroom > 0) {
        if (options.headroom >= dim) throw InsufficientHeadroom("headroom exceeds basis dimension");
        double top = 0.0;
        for (std::size_t n = dim - options.headroom; n < dim; ++n) top += std::abs(rho(n, n).real());
        if (top > options.headroom_tolerance) {
            std::ostringstream os;
            os << "state has population " << top << " in the top " << options.headroom
               << " levels of a " << dim << "-dimensional basis";
            throw InsufficientHeadroom(os.str());
        }
    }

    const double eta = eff.eta();
    if (eta == 1.0) return rho;

    const double log_eta = std::log(eta);
    const double log_loss = std::log1p(-eta);
    const auto d = static_cast<Eigen::Index>(dim);
    const Eigen::MatrixXcd& in = rho.elements();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            Complex acc = 0.0;
            for (Eigen::Index k = 0; i + k < d; ++k) {
                const int ii = static_cast<int>(i), jj = static_cast<int>(j), kk = static_cast<int>(k);
                const double w = std::exp(0.5 * (log_binomial(ii + kk, ii) + log_binomial(jj + kk, jj)) +
                                          0.5 * static_cast<double>(i + j) * log_eta + k * log_loss);
                acc += w * in(i + k, j + k);
            }
            out(i, j) = acc;
            out(j, i) = std::conj(acc);
        }
        out(i, i) = out(i, i).real();
    }
    return DensityMatrix(std::move(out));
}

EfficiencyModel compose_loss(const EfficiencyModel& first, const EfficiencyModel& second) {
    return EfficiencyModel(first.eta() * second.eta());
}

std::size_t spacs_working_dim(Complex alpha, std::size_t min_dim, double tail) {
    std::size_t dim = std::max<std::size_t>(min_dim, 2);
    for (; dim < 4096; dim += 2) {
        try {
            make_spacs(alpha, TruncationPolicy{dim, tail});
            return dim + 2;
        } catch (const TruncationTooSmall&) {
        }
    }
    throw InvalidArgument("amplitude too large for a dense number-basis representation");
}

DensityMatrix lossy_spacs_density(Complex alpha, const EfficiencyModel& eff, std::size_t dim) {
    const std::size_t work = spacs_working_dim(alpha, dim + 1);
    const TruncationPolicy policy{work, 1e-12};
    return bernoulli_map(spacs_density(alpha, policy), eff).truncated(dim);
}

}  // namespace spacs
