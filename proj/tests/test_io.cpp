#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "spacs/errors.hpp"
#include "spacs/io.hpp"
#include "spacs/loss.hpp"
#include "spacs/tomography.hpp"

using namespace spacs;

namespace {
const io::Provenance kProv{"0123456789abcdef", 7};

std::filesystem::path scratch(const char* name) {
    auto p = std::filesystem::temp_directory_path() / "spacs_io_test" / name;
    std::filesystem::remove_all(p.parent_path() / name);
    return p;
}
}  // namespace

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, -0.0, 1.0 / 3.0, 6.02e23, -1e-300, std::numeric_limits<double>::denorm_min()}) {
        const auto text = io::format_double(v);
        double back = 1.0;
        std::from_chars(text.data(), text.data() + text.size(), back);
        CHECK(back == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("fnv1a_hex") {
    CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(io::fnv1a_hex("a").size() == 16);
}

TEST_CASE("FockVector and DensityMatrix JSON round trip") {
    const auto psi = make_spacs(Complex(0.3, -0.9), {20});
    const auto back = io::fock_vector_from_json(io::to_json(psi));
    CHECK(back.dim() == 20);
    CHECK((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() <= 1e-15);

    const auto rho = lossy_spacs_density(Complex(0.5, 0.5), EfficiencyModel(0.6), 10);
    const auto r2 = io::density_matrix_from_json(io::to_json(rho));
    CHECK((r2.elements() - rho.elements()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THROWS_AS(io::density_matrix_from_json("{\"dim\": 2}"), FormatError);
    CHECK_THROWS_AS(io::density_matrix_from_json("not json"), FormatError);
}

TEST_CASE("Wigner CSV round trip") {
    const auto g = wigner_spacs(0.7, GridSpec{-3, 3, -2, 2, 31, 21});
    const auto csv = io::wigner_csv(g, kProv);
    CHECK(csv.find("# config_hash=0123456789abcdef") != std::string::npos);
    CHECK(csv.find("x,y,W\n") != std::string::npos);
    const auto back = io::wigner_from_csv(csv, io::wigner_header_json(g, kProv));
    CHECK(back.spec().nx == 31);
    CHECK(back.spec().ny == 21);
    for (std::size_t k = 0; k < g.values().size(); ++k) CHECK(std::abs(back.values()[k] - g.values()[k]) <= 1e-15);
}

TEST_CASE("samples CSV and binary round trip") {
    const auto s = acquire_frames({0.03, 0.955}, PhaseSchedule::uniform(4, 50), {0.9}, EfficiencyModel(0.6), 3);
    const auto csv = io::samples_csv(s, kProv);
    CHECK(csv.find("theta_rad,x,role\n") != std::string::npos);
    CHECK(io::samples_from_csv(csv) == s);
    const auto bytes = io::encode_samples(s);
    CHECK(bytes.size() == s.size() * io::kSampleRecordBytes);
    CHECK(io::decode_samples(bytes) == s);
    std::vector<std::uint8_t> torn(bytes.begin(), bytes.end() - 1);
    CHECK_THROWS_AS(io::decode_samples(torn), FormatError);
}

TEST_CASE("herald record and triggers") {
    const auto rec = simulate_heralds({0.05, 0.7}, 100000, 3);
    const auto back = io::herald_record_from_json(io::to_json(rec));
    CHECK(back.n_frames == rec.n_frames);
    CHECK(back.n_heralds == rec.n_heralds);
    CHECK(back.seed == rec.seed);
    CHECK(back.herald_probability_true == rec.herald_probability_true);
    CHECK(io::decode_triggers(io::encode_triggers(rec.trigger_frames)) == rec.trigger_frames);
}

TEST_CASE("reconstruction JSON round trip") {
    const auto table = build_pattern_functions(5);
    const auto s = acquire_frames({0.03, 0.4}, PhaseSchedule::uniform(12, 400), {1.0}, EfficiencyModel(0.6), 5);
    const auto r = reconstruct(s, table);
    const auto json = io::to_json(r, kProv);
    CHECK(json.find("\"error_model\"") != std::string::npos);
    const auto back = io::reconstruction_from_json(json);
    CHECK((back.rho.elements() - r.rho.elements()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((back.sigma - r.sigma).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(back.n_samples == r.n_samples);
    CHECK(back.phases == r.phases);

    const auto csv = io::photon_number_csv(r, nullptr, kProv);
    CHECK(csv.find("n,p,sigma\n") != std::string::npos);
    const auto theory = lossy_spacs_density(0.4, EfficiencyModel(0.6), 5);
    CHECK(io::photon_number_csv(r, &theory, kProv).find("n,p,sigma,p_theory\n") != std::string::npos);
}

TEST_CASE("file helpers") {
    const auto p = scratch("a") / "nested" / "file.txt";
    io::write_text(p, "hello");
    CHECK(io::read_text(p) == "hello");
    const std::vector<std::uint8_t> b{1, 2, 3};
    io::write_bytes(p, b);
    CHECK(io::read_bytes(p) == b);
    try {
        io::read_text(scratch("missing") / "nope.json");
        FAIL("expected MissingInput");
    } catch (const MissingInput& e) {
        CHECK(std::string(e.what()).find("nope.json") != std::string::npos);
    }
}
