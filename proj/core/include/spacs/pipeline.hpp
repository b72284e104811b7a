#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spacs/fock.hpp"
#include "spacs/homodyne.hpp"
#include "spacs/io.hpp"
#include "spacs/tomography.hpp"

namespace spacs {

// One experiment, read from a flat "key = value" file. '#' starts a comment.
// Unknown or repeated keys are errors. The only environment override is
// SPACS_OUTPUT_DIR for output_dir.
//
// Random streams: Rng(seed).split(0) seeded heralds, split(1) unseeded
// heralds, split(2) acquisition frames (which split again per phase).
struct ExperimentConfig {
    double alpha = 0.955;          // |alpha| of the seed
    double alpha_phase = 0.0;      // arg(alpha), radians
    double eta = 0.6;
    double gain = 0.03;
    double rep_rate = 8.2e7;
    double dark_rate = 0.0;
    std::uint64_t herald_frames = 10'000'000;
    std::size_t n_phases = 12;     // uniform schedule j*pi/n_phases ...
    std::vector<double> phases;    // ... unless phases are listed explicitly
    std::size_t samples_per_phase = 5000;
    double mean_scale = 1.0;
    bool calibrate_ac = true;      // fit and undo mean_scale from reference frames
    std::size_t M = 8;
    std::size_t grid_points = 121;
    double scan_alpha_max = 3.0;
    double scan_alpha_step = 0.01;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "spacs_out";

    static ExperimentConfig parse(std::string_view text);
    // MissingInput naming the path if absent.
    static ExperimentConfig load(const std::filesystem::path& path);

    // ConfigError naming the offending field.
    void validate() const;

    Complex complex_alpha() const { return std::polar(alpha, alpha_phase); }
    PhaseSchedule schedule() const;
    AmplifierParams amplifier() const;

    // Every key except output_dir, in fixed order; input to the config hash.
    std::string canonical() const;
    io::Provenance provenance() const;
};

// Applies SPACS_OUTPUT_DIR if set.
void apply_environment(ExperimentConfig& config);

struct StageOptions {
    std::size_t workers = 0;
};

// Artifact layout below output_dir.
namespace paths {
inline constexpr const char* kSource = "prepare/source.json";
inline constexpr const char* kHeraldsSeeded = "prepare/heralds_seeded.json";
inline constexpr const char* kHeraldsUnseeded = "prepare/heralds_unseeded.json";
inline constexpr const char* kTriggers = "prepare/triggers_seeded.bin";
inline constexpr const char* kKlyshko = "prepare/klyshko.json";
inline constexpr const char* kRhoIdeal = "prepare/rho_ideal.json";
inline constexpr const char* kSamplesCsv = "sample/samples.csv";
inline constexpr const char* kSamplesBin = "sample/samples.bin";
inline constexpr const char* kCalibration = "reconstruct/calibration.json";
inline constexpr const char* kReconstruction = "reconstruct/reconstruction.json";
inline constexpr const char* kPhotonNumbers = "reconstruct/photon_numbers.csv";
inline constexpr const char* kRhoTheory = "analyze/rho_theory_lossy.json";
inline constexpr const char* kMetrics = "analyze/metrics.json";
inline constexpr const char* kWignerRec = "analyze/wigner_reconstructed";
inline constexpr const char* kWignerTheory = "analyze/wigner_theory_lossy";
inline constexpr const char* kSummary = "analyze/summary.txt";
}  // namespace paths

struct PipelineMetrics {
    double purity_theory = 0.0;
    double purity_reconstructed = 0.0;
    FidelityResult fidelity;
    ElementAgreement agreement;
    double negativity_reconstructed = 0.0;
    double negativity_theory = 0.0;
    double squeezing_theory = 0.0;
    double squeezing_reconstructed = 0.0;
    AlphaEstimate klyshko;
    double mean_scale_estimate = 1.0;
};

// Each stage reads the previous stage's artifacts from output_dir and
// throws MissingInput naming the expected path if one is absent.
void stage_prepare(const ExperimentConfig& config, const StageOptions& options = {});
void stage_sample(const ExperimentConfig& config, const StageOptions& options = {});
void stage_reconstruct(const ExperimentConfig& config, const StageOptions& options = {});
PipelineMetrics stage_analyze(const ExperimentConfig& config, const StageOptions& options = {});

PipelineMetrics run_pipeline(const ExperimentConfig& config, const StageOptions& options = {});

// Theory column of the purity table: purity of the lossy SPACS truncated to
// M, for the four published (|alpha|, M) pairs.
struct Table1Row {
    double abs_alpha;
    std::size_t M;
    double purity;
};
std::vector<Table1Row> table1(double eta);
std::string table1_csv(const std::vector<Table1Row>& rows, double eta, const io::Provenance& prov);

// Closed-form quadrature variances on |alpha| = 0, step, ..., alpha_max.
struct SqueezeScanRow {
    double abs_alpha;
    double var_0;
    double var_90;
    double percent_below_vacuum;
};
std::vector<SqueezeScanRow> squeeze_scan(double eta, double alpha_max, double step);
std::string squeeze_scan_csv(const std::vector<SqueezeScanRow>& rows, double eta, const io::Provenance& prov);
// Row with the smallest var_0.
const SqueezeScanRow& deepest_squeezing(const std::vector<SqueezeScanRow>& rows);

}  // namespace spacs
