#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spacs/fock.hpp"

namespace spacs {

// Low-gain parametric amplifier seeded by a coherent state. Only the
// first-order expansion in the gain is modeled.
struct AmplifierParams {
    double gain = 0.0;          // g = chi t
    Complex alpha_seed = 0.0;
    double rep_rate = 8.2e7;    // pulses per second
    double dark_rate = 0.0;     // idler dark counts per second

    // Throws InvalidArgument for negative or non-finite fields.
    void validate() const;

    // Soft-bound violations: g > 0.1, or g^2 (1+|alpha|^2) > 0.01 where the
    // first-order expansion stops being trustworthy.
    std::vector<std::string> warnings() const;

    // g^2 (1 + |alpha|^2)
    double signal_herald_probability() const;
    double dark_herald_probability() const { return dark_rate / rep_rate; }
    double herald_probability() const { return signal_herald_probability() + dark_herald_probability(); }
};

struct HeraldRecord {
    std::uint64_t n_frames = 0;
    std::uint64_t n_heralds = 0;
    // Heralds caused by dark counts; their signal frame holds the un-excited |alpha>.
    std::uint64_t n_dark_heralds = 0;
    double herald_probability_true = 0.0;
    std::uint64_t seed = 0;
    // Indices of heralded frames, ascending. Empty when not requested.
    std::vector<std::uint64_t> trigger_frames;

    double rate(double rep_rate) const {
        return n_frames == 0 ? 0.0 : static_cast<double>(n_heralds) / static_cast<double>(n_frames) * rep_rate;
    }
};

// Signal state after an idler detection: the SPACS of the seed (|1> for an
// unseeded amplifier).
FockVector conditional_state(const AmplifierParams& params, const TruncationPolicy& policy);

// Low-amplitude approximation |1> + sqrt(2) alpha |2>, normalized.
FockVector truncated_conditional_state(Complex alpha, std::size_t dim);

// Squared norm of the idler-detection branch g a^dag|alpha>|1> of the
// first-order two-mode state, evaluated with number-basis operators.
double idler_branch_probability(const AmplifierParams& params, const TruncationPolicy& policy);

struct HeraldOptions {
    std::size_t workers = 0;       // 0 = hardware concurrency
    bool keep_triggers = true;
};

// Frames per independently seeded block. Block b draws from
// Rng(seed).split(b), so the output does not depend on the worker count.
inline constexpr std::uint64_t kHeraldBlockFrames = std::uint64_t{1} << 22;

// Bernoulli thinning of n_frames pulses at p = g^2(1+|alpha|^2) + dark_rate/rep_rate.
HeraldRecord simulate_heralds(const AmplifierParams& params, std::uint64_t n_frames, std::uint64_t seed,
                              const HeraldOptions& options = {});

struct AlphaEstimate {
    double abs_alpha = 0.0;
    double std_error = 0.0;
    double ratio = 1.0;
    double ratio_std_error = 0.0;
};

// |alpha| from the seeded/unseeded idler count ratio, which equals
// 1 + |alpha|^2. Counts are assumed to share one exposure; errors are
// Poisson. At |alpha| = 0 the reported error is sqrt(ratio error), the
// amplitude at which the ratio would move by one standard error.
AlphaEstimate klyshko_alpha(double seeded_counts, double unseeded_counts);

// Same, normalizing each record by its frame count.
AlphaEstimate klyshko_alpha(const HeraldRecord& seeded, const HeraldRecord& unseeded);

}  // namespace spacs
