#include "spacs/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spacs/errors.hpp"

namespace spacs::io {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

json parse(std::string_view text, const char* what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw FormatError(std::string(what) + ": " + e.what());
    }
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw FormatError(std::string(what) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string(what) + ": field '" + key + "': " + e.what());
    }
}

json provenance_json(const Provenance& p) {
    return {{"config_hash", p.config_hash}, {"seed", p.seed}, {"version", p.version}};
}

void provenance_comment(std::ostringstream& os, const Provenance& p) {
    os << "# config_hash=" << p.config_hash << "\n# seed=" << p.seed << "\n# version=" << p.version << "\n";
}

json matrix_json(const Eigen::MatrixXcd& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array(), ri = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(m(i, j).real());
            ri.push_back(m(i, j).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    return {{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

Eigen::MatrixXcd matrix_from(const json& j, const char* what) {
    const auto dim = field<std::size_t>(j, "dim", what);
    const auto re = field<std::vector<std::vector<double>>>(j, "re", what);
    const auto im = field<std::vector<std::vector<double>>>(j, "im", what);
    if (re.size() != dim || im.size() != dim) throw FormatError(std::string(what) + ": row count differs from dim");
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd m(d, d);
    for (std::size_t i = 0; i < dim; ++i) {
        if (re[i].size() != dim || im[i].size() != dim)
            throw FormatError(std::string(what) + ": row " + std::to_string(i) + " has the wrong length");
        for (std::size_t k = 0; k < dim; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = Complex(re[i][k], im[i][k]);
    }
    return m;
}

// Splits CSV text into non-comment, non-empty lines.
std::vector<std::string_view> data_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty() && line.front() != '#') out.push_back(line);
        pos = end + 1;
    }
    return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = line.find(sep, pos);
        out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::uint8_t* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("expected input file not found: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("expected input file not found: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> content) {
    write_text(path, std::string_view(reinterpret_cast<const char*>(content.data()), content.size()));
}

std::string to_json(const FockVector& psi) {
    json re = json::array(), im = json::array();
    for (std::size_t n = 0; n < psi.dim(); ++n) {
        re.push_back(psi[n].real());
        im.push_back(psi[n].imag());
    }
    return json{{"dim", psi.dim()}, {"re", re}, {"im", im}, {"tail_mass", psi.tail_mass()}}.dump();
}

FockVector fock_vector_from_json(std::string_view text) {
    const json j = parse(text, "FockVector");
    const auto dim = field<std::size_t>(j, "dim", "FockVector");
    const auto re = field<std::vector<double>>(j, "re", "FockVector");
    const auto im = field<std::vector<double>>(j, "im", "FockVector");
    if (re.size() != dim || im.size() != dim) throw FormatError("FockVector: array length differs from dim");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
    for (std::size_t n = 0; n < dim; ++n) v(static_cast<Eigen::Index>(n)) = Complex(re[n], im[n]);
    const double tail = j.contains("tail_mass") ? field<double>(j, "tail_mass", "FockVector") : 0.0;
    return FockVector(std::move(v), tail);
}

std::string to_json(const DensityMatrix& rho) {
    return matrix_json(rho.elements()).dump();
}

DensityMatrix density_matrix_from_json(std::string_view text) {
    return DensityMatrix(matrix_from(parse(text, "DensityMatrix"), "DensityMatrix"));
}

std::string wigner_csv(const WignerGrid& grid, const Provenance& prov) {
    std::ostringstream os;
    provenance_comment(os, prov);
    os << "x,y,W\n";
    const auto& s = grid.spec();
    for (std::size_t i = 0; i < s.nx; ++i)
        for (std::size_t j = 0; j < s.ny; ++j)
            os << format_double(s.x(i)) << ',' << format_double(s.y(j)) << ',' << format_double(grid.at(i, j)) << '\n';
    return os.str();
}

std::string wigner_header_json(const WignerGrid& grid, const Provenance& prov) {
    const auto& s = grid.spec();
    return json{{"x_min", s.x_min}, {"x_max", s.x_max}, {"y_min", s.y_min}, {"y_max", s.y_max},
                {"nx", s.nx},       {"ny", s.ny},       {"dx", s.dx()},     {"dy", s.dy()},
                {"provenance", provenance_json(prov)}}
        .dump(2);
}

WignerGrid wigner_from_csv(std::string_view csv, std::string_view header_json) {
    const json h = parse(header_json, "WignerGrid header");
    GridSpec spec;
    spec.x_min = field<double>(h, "x_min", "WignerGrid header");
    spec.x_max = field<double>(h, "x_max", "WignerGrid header");
    spec.y_min = field<double>(h, "y_min", "WignerGrid header");
    spec.y_max = field<double>(h, "y_max", "WignerGrid header");
    spec.nx = field<std::size_t>(h, "nx", "WignerGrid header");
    spec.ny = field<std::size_t>(h, "ny", "WignerGrid header");
    const auto lines = data_lines(csv);
    if (lines.empty() || lines[0] != "x,y,W") throw FormatError("WignerGrid CSV: expected header 'x,y,W'");
    if (lines.size() - 1 != spec.nx * spec.ny) throw FormatError("WignerGrid CSV: row count differs from nx*ny");
    std::vector<double> values(spec.nx * spec.ny);
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto cols = split(lines[k], ',');
        if (cols.size() != 3) throw FormatError("WignerGrid CSV line " + std::to_string(k + 1) + ": expected 3 columns");
        values[k - 1] = parse_double(cols[2], k + 1);
    }
    return WignerGrid(spec, std::move(values));
}

std::string marginal_csv(const TabulatedMarginal& m, const Provenance& prov) {
    std::ostringstream os;
    provenance_comment(os, prov);
    os << "# theta_rad=" << format_double(m.theta) << "\n# normalization=" << format_double(m.normalization) << "\n";
    os << "x,p\n";
    for (std::size_t k = 0; k < m.x.size(); ++k) os << format_double(m.x[k]) << ',' << format_double(m.p[k]) << '\n';
    return os.str();
}

std::string to_json(const HeraldRecord& rec) {
    return json{{"n_frames", rec.n_frames},
                {"n_heralds", rec.n_heralds},
                {"n_dark_heralds", rec.n_dark_heralds},
                {"herald_probability_true", rec.herald_probability_true},
                {"seed", rec.seed},
                {"n_triggers_stored", rec.trigger_frames.size()}}
        .dump(2);
}

HeraldRecord herald_record_from_json(std::string_view text) {
    const json j = parse(text, "HeraldRecord");
    HeraldRecord r;
    r.n_frames = field<std::uint64_t>(j, "n_frames", "HeraldRecord");
    r.n_heralds = field<std::uint64_t>(j, "n_heralds", "HeraldRecord");
    r.n_dark_heralds = field<std::uint64_t>(j, "n_dark_heralds", "HeraldRecord");
    r.herald_probability_true = field<double>(j, "herald_probability_true", "HeraldRecord");
    r.seed = field<std::uint64_t>(j, "seed", "HeraldRecord");
    return r;
}

std::vector<std::uint8_t> encode_triggers(std::span<const std::uint64_t> frames) {
    std::vector<std::uint8_t> out;
    out.reserve(frames.size() * 8);
    for (auto f : frames) put(out, f);
    return out;
}

std::vector<std::uint64_t> decode_triggers(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 8 != 0) throw FormatError("trigger stream length is not a multiple of 8 bytes");
    std::vector<std::uint64_t> out(bytes.size() / 8);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = get<std::uint64_t>(bytes.data() + 8 * k);
    return out;
}

std::string samples_csv(std::span<const QuadratureSample> samples, const Provenance& prov) {
    std::ostringstream os;
    provenance_comment(os, prov);
    os << "theta_rad,x,role\n";
    for (const auto& s : samples)
        os << format_double(s.theta) << ',' << format_double(s.x) << ','
           << (s.role == FrameRole::Heralded ? "heralded" : "reference") << '\n';
    return os.str();
}

std::vector<QuadratureSample> samples_from_csv(std::string_view csv) {
    const auto lines = data_lines(csv);
    if (lines.empty() || lines[0] != "theta_rad,x,role")
        throw FormatError("samples CSV: expected header 'theta_rad,x,role'");
    std::vector<QuadratureSample> out;
    out.reserve(lines.size() - 1);
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto cols = split(lines[k], ',');
        if (cols.size() != 3) throw FormatError("samples CSV line " + std::to_string(k + 1) + ": expected 3 columns");
        QuadratureSample s;
        s.theta = parse_double(cols[0], k + 1);
        s.x = parse_double(cols[1], k + 1);
        if (cols[2] == "heralded")
            s.role = FrameRole::Heralded;
        else if (cols[2] == "reference")
            s.role = FrameRole::Reference;
        else
            throw FormatError("samples CSV line " + std::to_string(k + 1) + ": unknown role '" + std::string(cols[2]) + "'");
        out.push_back(s);
    }
    return out;
}

std::vector<std::uint8_t> encode_samples(std::span<const QuadratureSample> samples) {
    std::vector<std::uint8_t> out;
    out.reserve(samples.size() * kSampleRecordBytes);
    for (const auto& s : samples) {
        put(out, s.theta);
        put(out, s.x);
        put(out, static_cast<std::uint8_t>(s.role));
    }
    return out;
}

std::vector<QuadratureSample> decode_samples(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % kSampleRecordBytes != 0)
        throw FormatError("sample stream length is not a multiple of 17 bytes");
    std::vector<QuadratureSample> out(bytes.size() / kSampleRecordBytes);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::uint8_t* p = bytes.data() + k * kSampleRecordBytes;
        const auto role = p[16];
        if (role > 1) throw FormatError("sample record " + std::to_string(k) + ": invalid role byte");
        out[k] = {get<double>(p + 8), get<double>(p), static_cast<FrameRole>(role)};
    }
    return out;
}

std::string to_json(const ReconstructionResult& r, const Provenance& prov) {
    json sigma = json::array();
    for (Eigen::Index i = 0; i < r.sigma.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < r.sigma.cols(); ++j) row.push_back(r.sigma(i, j));
        sigma.push_back(std::move(row));
    }
    json rho = matrix_json(r.rho.elements());
    return json{{"M", r.rho.dim()},
                {"N", r.n_samples},
                {"n_rejected", r.n_rejected},
                {"n_phases", r.n_phases},
                {"phases", r.phases},
                {"rho", {{"re", rho["re"]}, {"im", rho["im"]}}},
                {"sigma", sigma},
                {"hermitization_change", r.hermitization_change},
                {"error_model", "empirical standard error of the per-phase kernel averages"},
                {"provenance", provenance_json(prov)}}
        .dump(2);
}

ReconstructionResult reconstruction_from_json(std::string_view text) {
    const char* what = "ReconstructionResult";
    const json j = parse(text, what);
    const auto dim = field<std::size_t>(j, "M", what);
    json m = field<json>(j, "rho", what);
    m["dim"] = dim;
    ReconstructionResult r{DensityMatrix(matrix_from(m, what)), Eigen::MatrixXd::Zero(0, 0), 0, 0, 0, {}, 0.0};
    const auto sigma = field<std::vector<std::vector<double>>>(j, "sigma", what);
    if (sigma.size() != dim) throw FormatError("ReconstructionResult: sigma row count differs from M");
    r.sigma.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        if (sigma[i].size() != dim) throw FormatError("ReconstructionResult: sigma row has the wrong length");
        for (std::size_t k = 0; k < dim; ++k)
            r.sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = sigma[i][k];
    }
    r.n_samples = field<std::size_t>(j, "N", what);
    r.n_rejected = field<std::size_t>(j, "n_rejected", what);
    r.n_phases = field<std::size_t>(j, "n_phases", what);
    r.phases = field<std::vector<double>>(j, "phases", what);
    r.hermitization_change = field<double>(j, "hermitization_change", what);
    return r;
}

std::string photon_number_csv(const ReconstructionResult& result, const DensityMatrix* theory,
                              const Provenance& prov) {
    std::ostringstream os;
    provenance_comment(os, prov);
    os << "# sigma: empirical standard error of the kernel average\n";
    os << (theory ? "n,p,sigma,p_theory\n" : "n,p,sigma\n");
    for (std::size_t n = 0; n < result.rho.dim(); ++n) {
        os << n << ',' << format_double(result.rho(n, n).real()) << ','
           << format_double(result.sigma(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
        if (theory) os << ',' << format_double(n < theory->dim() ? (*theory)(n, n).real() : 0.0);
        os << '\n';
    }
    return os.str();
}

}  // namespace spacs::io
