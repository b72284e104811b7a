// spacs: command-line front end for the SPACS pipeline.
//
//   spacs run --config exp.cfg
//   spacs prepare|sample|reconstruct|analyze [--config PATH] [--out DIR] ...
//   spacs table1 --eta 0.6
//   spacs squeeze-scan --eta 0.6 --alpha-max 3
//
// Without --config a stage reuses <out>/config.resolved when an earlier
// stage left one, otherwise built-in defaults. Errors go to stderr as one
// JSON line; exit codes: 2 configuration/usage, 3 missing input, 1 other.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "spacs/errors.hpp"
#include "spacs/io.hpp"
#include "spacs/pipeline.hpp"

namespace {

using spacs::ExperimentConfig;

constexpr const char* kResolvedConfig = "config.resolved";

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<double> alpha;
    std::optional<double> eta;
    std::optional<std::size_t> M;
};

void add_common(CLI::App* sub, Overrides& o, bool physics = true) {
    sub->add_option("--config", o.config, "Experiment config file (key = value)");
    sub->add_option("--seed", o.seed, "Root seed (u64)");
    sub->add_option("--out", o.out, "Output directory");
    if (physics) {
        sub->add_option("--alpha", o.alpha, "Seed amplitude |alpha|");
        sub->add_option("--eta", o.eta, "Detection efficiency");
        sub->add_option("--M", o.M, "Reconstruction dimension");
    }
}

ExperimentConfig resolve(const Overrides& o) {
    ExperimentConfig c;
    if (!o.config.empty()) {
        c = ExperimentConfig::load(o.config);
    } else {
        spacs::apply_environment(c);
        if (!o.out.empty()) c.output_dir = o.out;
        if (std::filesystem::exists(c.output_dir / kResolvedConfig)) c = ExperimentConfig::load(c.output_dir / kResolvedConfig);
    }
    spacs::apply_environment(c);
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.seed) c.seed = *o.seed;
    if (o.alpha) c.alpha = *o.alpha;
    if (o.eta) c.eta = *o.eta;
    if (o.M) c.M = *o.M;
    c.validate();
    return c;
}

void save_resolved(const ExperimentConfig& c) {
    spacs::io::write_text(c.output_dir / kResolvedConfig, c.canonical());
}

int fail(const std::string& kind, const std::string& message, int code) {
    nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << j.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPACS toolkit: heralded preparation, homodyne simulation and pattern-function tomography"};
    app.require_subcommand(1);
    std::size_t workers = 0;
    app.add_option("--workers", workers, "Worker threads (0 = all cores); results do not depend on it");

    Overrides o;
    auto* prepare = app.add_subcommand("prepare", "Simulate heralds and the Klyshko calibration");
    auto* sample = app.add_subcommand("sample", "Synthesize homodyne acquisition frames");
    auto* reconstruct = app.add_subcommand("reconstruct", "Calibrate AC scaling and reconstruct rho");
    auto* analyze = app.add_subcommand("analyze", "Purity, fidelity, Wigner grids, squeezing");
    auto* run = app.add_subcommand("run", "All four stages in order");
    for (auto* s : {prepare, sample, reconstruct, analyze, run}) add_common(s, o);

    auto* t1 = app.add_subcommand("table1", "Theory purities of the lossy SPACS for the published (|alpha|, M) rows");
    add_common(t1, o, false);
    std::optional<double> t1_eta;
    t1->add_option("--eta", t1_eta, "Detection efficiency");

    auto* scan = app.add_subcommand("squeeze-scan", "Quadrature variances of the lossy SPACS versus |alpha|");
    add_common(scan, o, false);
    std::optional<double> scan_eta, alpha_max, alpha_step;
    scan->add_option("--eta", scan_eta, "Detection efficiency");
    scan->add_option("--alpha-max", alpha_max, "Largest |alpha|");
    scan->add_option("--alpha-step", alpha_step, "Step in |alpha|");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail("UsageError", e.what(), 2);
    }

    try {
        if (t1->parsed()) o.eta = t1_eta;
        if (scan->parsed()) o.eta = scan_eta;
        ExperimentConfig c = resolve(o);
        if (scan->parsed()) {
            if (alpha_max) c.scan_alpha_max = *alpha_max;
            if (alpha_step) c.scan_alpha_step = *alpha_step;
            c.validate();
        }
        const spacs::StageOptions opts{workers};
        const auto prov = c.provenance();

        if (t1->parsed()) {
            const auto rows = spacs::table1(c.eta);
            const auto csv = spacs::table1_csv(rows, c.eta, prov);
            spacs::io::write_text(c.output_dir / "table1.csv", csv);
            std::cout << csv;
            return 0;
        }
        if (scan->parsed()) {
            const auto rows = spacs::squeeze_scan(c.eta, c.scan_alpha_max, c.scan_alpha_step);
            spacs::io::write_text(c.output_dir / "squeeze_scan.csv", spacs::squeeze_scan_csv(rows, c.eta, prov));
            const auto& best = spacs::deepest_squeezing(rows);
            std::printf("deepest squeezing at |alpha| = %.2f: var(0)/0.25 = %.4f (%.2f %% below vacuum)\n",
                        best.abs_alpha, best.var_0 / 0.25, best.percent_below_vacuum);
            std::printf("wrote %s\n", (c.output_dir / "squeeze_scan.csv").string().c_str());
            return 0;
        }

        save_resolved(c);
        if (prepare->parsed() || run->parsed()) spacs::stage_prepare(c, opts);
        if (sample->parsed() || run->parsed()) spacs::stage_sample(c, opts);
        if (reconstruct->parsed() || run->parsed()) spacs::stage_reconstruct(c, opts);
        if (analyze->parsed() || run->parsed()) {
            const auto m = spacs::stage_analyze(c, opts);
            std::printf("purity theory %.4f reconstructed %.4f | fidelity %.4f | 3-sigma %zu/%zu | W min %.4f\n",
                        m.purity_theory, m.purity_reconstructed, m.fidelity.value, m.agreement.within,
                        m.agreement.total, m.negativity_reconstructed);
        }
        std::printf("outputs in %s\n", c.output_dir.string().c_str());
        return 0;
    } catch (const spacs::ConfigError& e) {
        return fail(e.kind(), e.what(), 2);
    } catch (const spacs::MissingInput& e) {
        return fail(e.kind(), e.what(), 3);
    } catch (const spacs::Error& e) {
        return fail(e.kind(), e.what(), 1);
    } catch (const std::exception& e) {
        return fail("InternalError", e.what(), 1);
    }
}
