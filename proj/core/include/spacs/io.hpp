#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spacs/fock.hpp"
#include "spacs/homodyne.hpp"
#include "spacs/phase_space.hpp"
#include "spacs/preparation.hpp"
#include "spacs/tomography.hpp"

// Serialization. Text formats are produced as strings so callers decide
// where they go; the file helpers add MissingInput diagnostics that name the
// expected path. Doubles are written in shortest round-trip form.
namespace spacs::io {

inline constexpr std::string_view kLibraryVersion = "spacs-core 0.1.0";

// Attached to every emitted table: JSON documents carry it as a
// "provenance" object, CSV files as leading "# key=value" comment lines.
struct Provenance {
    std::string config_hash;  // 16 hex digits
    std::uint64_t seed = 0;
    std::string version = std::string(kLibraryVersion);
};

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view content);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> content);

// {dim, re[], im[]}
std::string to_json(const FockVector& psi);
FockVector fock_vector_from_json(std::string_view text);

// {dim, re[][], im[][]}
std::string to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(std::string_view text);

// Columns x,y,W with x the slow index.
std::string wigner_csv(const WignerGrid& grid, const Provenance& prov);
// {x_min, x_max, y_min, y_max, nx, ny, dx, dy, provenance}
std::string wigner_header_json(const WignerGrid& grid, const Provenance& prov);
WignerGrid wigner_from_csv(std::string_view csv, std::string_view header_json);

// Columns x,p; theta and normalization in the comment block.
std::string marginal_csv(const TabulatedMarginal& m, const Provenance& prov);

std::string to_json(const HeraldRecord& rec);
HeraldRecord herald_record_from_json(std::string_view text);

// Trigger frame indices as consecutive little-endian uint64.
std::vector<std::uint8_t> encode_triggers(std::span<const std::uint64_t> frames);
std::vector<std::uint64_t> decode_triggers(std::span<const std::uint8_t> bytes);

// Header theta_rad,x,role with role "heralded" or "reference".
std::string samples_csv(std::span<const QuadratureSample> samples, const Provenance& prov);
std::vector<QuadratureSample> samples_from_csv(std::string_view csv);

// 17 bytes per sample: float64 theta, float64 x, uint8 role (0 heralded,
// 1 reference), little-endian, no header.
inline constexpr std::size_t kSampleRecordBytes = 17;
std::vector<std::uint8_t> encode_samples(std::span<const QuadratureSample> samples);
std::vector<QuadratureSample> decode_samples(std::span<const std::uint8_t> bytes);

// {M, N, n_rejected, n_phases, phases[], rho: {re, im}, sigma[][],
//  hermitization_change, error_model, provenance}
std::string to_json(const ReconstructionResult& result, const Provenance& prov);
ReconstructionResult reconstruction_from_json(std::string_view text);

// n,p,sigma per photon number, plus an optional theory column.
std::string photon_number_csv(const ReconstructionResult& result, const DensityMatrix* theory, const Provenance& prov);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace spacs::io
