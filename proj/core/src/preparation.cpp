#include "spacs/preparation.hpp"

#include <cmath>
#include <sstream>

#include "spacs/errors.hpp"
#include "spacs/parallel.hpp"
#include "spacs/rng.hpp"

namespace spacs {

void AmplifierParams::validate() const {
    if (!(gain >= 0.0) || !std::isfinite(gain)) throw InvalidArgument("gain must be finite and non-negative");
    if (!(rep_rate > 0.0) || !std::isfinite(rep_rate)) throw InvalidArgument("rep_rate must be positive");
    if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate)) throw InvalidArgument("dark_rate must be non-negative");
    if (!std::isfinite(alpha_seed.real()) || !std::isfinite(alpha_seed.imag()))
        throw InvalidArgument("alpha_seed must be finite");
}

std::vector<std::string> AmplifierParams::warnings() const {
    std::vector<std::string> out;
    if (gain > 0.1) {
        std::ostringstream os;
        os << "gain " << gain << " exceeds the low-gain bound 0.1";
        out.push_back(os.str());
    }
    if (signal_herald_probability() > 0.01) {
        std::ostringstream os;
        os << "g^2(1+|alpha|^2) = " << signal_herald_probability()
           << " > 0.01: first-order expansion is no longer accurate";
        out.push_back(os.str());
    }
    return out;
}

double AmplifierParams::signal_herald_probability() const {
    return gain * gain * (1.0 + std::norm(alpha_seed));
}

FockVector conditional_state(const AmplifierParams& params, const TruncationPolicy& policy) {
    params.validate();
    return make_spacs(params.alpha_seed, policy);
}

FockVector truncated_conditional_state(Complex alpha, std::size_t dim) {
    if (dim < 3) throw InvalidArgument("truncated conditional state needs dim >= 3");
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    c(1) = 1.0;
    c(2) = std::sqrt(2.0) * alpha;
    c.normalize();
    return FockVector(std::move(c), 0.0);
}

double idler_branch_probability(const AmplifierParams& params, const TruncationPolicy& policy) {
    params.validate();
    // The creation operator needs one spare level to act exactly on the
    // retained amplitudes.
    TruncationPolicy wide = policy;
    wide.dim = policy.dim + 1;
    const FockVector coh = make_coherent(params.alpha_seed, policy);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(wide.dim));
    v.head(coh.amplitudes().size()) = coh.amplitudes();
    const Eigen::VectorXcd branch = params.gain * (creation_matrix(wide.dim) * v);
    return branch.squaredNorm();
}

HeraldRecord simulate_heralds(const AmplifierParams& params, std::uint64_t n_frames, std::uint64_t seed,
                              const HeraldOptions& options) {
    params.validate();
    if (n_frames < 1) throw InvalidArgument("simulate_heralds needs at least one frame");
    const double p_signal = params.signal_herald_probability();
    const double p = params.herald_probability();
    if (!(p <= 1.0)) {
        std::ostringstream os;
        os << "herald probability " << p << " exceeds 1";
        throw ProbabilityOutOfRange(os.str());
    }

    const std::uint64_t n_blocks = (n_frames + kHeraldBlockFrames - 1) / kHeraldBlockFrames;
    struct Block {
        std::uint64_t heralds = 0;
        std::uint64_t dark = 0;
        std::vector<std::uint64_t> triggers;
    };
    std::vector<Block> blocks(n_blocks);
    const Rng root(seed);

    parallel_for(n_blocks, options.workers, [&](std::size_t b) {
        if (p <= 0.0) return;
        Rng rng = root.split(b);
        const std::uint64_t begin = b * kHeraldBlockFrames;
        const std::uint64_t end = std::min(n_frames, begin + kHeraldBlockFrames);
        Block& out = blocks[b];
        std::uint64_t pos = begin;
        for (;;) {
            const std::uint64_t gap = rng.geometric(p);
            if (gap >= end - pos) break;
            pos += gap;
            ++out.heralds;
            if (params.dark_rate > 0.0 && rng.uniform() * p >= p_signal) ++out.dark;
            if (options.keep_triggers) out.triggers.push_back(pos);
            ++pos;
            if (pos >= end) break;
        }
    });

    HeraldRecord rec;
    rec.n_frames = n_frames;
    rec.herald_probability_true = p;
    rec.seed = seed;
    for (auto& blk : blocks) {
        rec.n_heralds += blk.heralds;
        rec.n_dark_heralds += blk.dark;
        rec.trigger_frames.insert(rec.trigger_frames.end(), blk.triggers.begin(), blk.triggers.end());
    }
    return rec;
}

AlphaEstimate klyshko_alpha(double seeded_counts, double unseeded_counts) {
    if (!(unseeded_counts > 0.0)) throw InvalidArgument("unseeded rate must be positive");
    if (!(seeded_counts >= 0.0)) throw InvalidArgument("seeded rate must be non-negative");
    if (seeded_counts < unseeded_counts) {
        std::ostringstream os;
        os << "seeded/unseeded rate ratio " << seeded_counts / unseeded_counts << " is below 1";
        throw RatioBelowUnity(os.str());
    }
    AlphaEstimate est;
    est.ratio = seeded_counts / unseeded_counts;
    est.ratio_std_error = est.ratio * std::sqrt(1.0 / seeded_counts + 1.0 / unseeded_counts);
    est.abs_alpha = std::sqrt(est.ratio - 1.0);
    est.std_error = est.abs_alpha > 0.0 ? est.ratio_std_error / (2.0 * est.abs_alpha) : std::sqrt(est.ratio_std_error);
    return est;
}

AlphaEstimate klyshko_alpha(const HeraldRecord& seeded, const HeraldRecord& unseeded) {
    if (seeded.n_frames == 0 || unseeded.n_frames == 0) throw InvalidArgument("herald record has no frames");
    if (unseeded.n_heralds == 0) throw InvalidArgument("unseeded run has no heralds");
    const double scale = static_cast<double>(unseeded.n_frames) / static_cast<double>(seeded.n_frames);
    const double ns = static_cast<double>(seeded.n_heralds);
    const double nu = static_cast<double>(unseeded.n_heralds);
    if (ns * scale < nu) {
        std::ostringstream os;
        os << "seeded/unseeded rate ratio " << ns * scale / nu << " is below 1";
        throw RatioBelowUnity(os.str());
    }
    AlphaEstimate est;
    est.ratio = ns * scale / nu;
    est.ratio_std_error = est.ratio * std::sqrt(1.0 / ns + 1.0 / nu);
    est.abs_alpha = std::sqrt(est.ratio - 1.0);
    est.std_error = est.abs_alpha > 0.0 ? est.ratio_std_error / (2.0 * est.abs_alpha) : std::sqrt(est.ratio_std_error);
    return est;
}

}  // namespace spacs
