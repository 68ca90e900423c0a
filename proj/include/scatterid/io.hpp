#pragma once

// Binary artifacts: 8-byte magic, uint64 little-endian header length, JSON
// header, then little-endian float64 payload.
//   .wmat   SCATWMAT  (2K+1)^2 complex pairs, row-major, W[n, m] at (n+K, m+K)
//   .sdesc  SCATSDSC  N_v^2 reals, row-major over (v1, v2)
//   .msr    SCATMSR\0 Nr x Ns complex pairs, row-major over (receiver, source)

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "scatterid/identify.hpp"

namespace scatterid::io {

static_assert(std::endian::native == std::endian::little, "artifact I/O assumes a little-endian host");

namespace fs = std::filesystem;

inline constexpr char kMagicWmat[8] = {'S', 'C', 'A', 'T', 'W', 'M', 'A', 'T'};
inline constexpr char kMagicSdesc[8] = {'S', 'C', 'A', 'T', 'S', 'D', 'S', 'C'};
inline constexpr char kMagicMsr[8] = {'S', 'C', 'A', 'T', 'M', 'S', 'R', '\0'};

inline void write_blob(const fs::path& path, const char (&magic)[8], const json& header,
                       const std::vector<double>& payload) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    const std::string h = header.dump();
    const std::uint64_t len = h.size();
    out.write(magic, 8);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!out) throw ConfigError("write failed: " + path.string());
}

inline std::pair<json, std::vector<double>> read_blob(const fs::path& path, const char (&magic)[8]) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    char m[8];
    std::uint64_t len = 0;
    in.read(m, 8);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || std::memcmp(m, magic, 8) != 0) throw ConfigError("bad magic in " + path.string());
    if (len > (1u << 26)) throw ConfigError("implausible header length in " + path.string());
    std::string h(len, '\0');
    in.read(h.data(), static_cast<std::streamsize>(len));
    if (!in) throw ConfigError("truncated header in " + path.string());
    json header;
    try {
        header = json::parse(h);
    } catch (const json::exception& e) {
        throw ConfigError("malformed header in " + path.string() + ": " + e.what());
    }
    std::vector<double> payload;
    double v;
    while (in.read(reinterpret_cast<char*>(&v), sizeof v)) payload.push_back(v);
    return {std::move(header), std::move(payload)};
}

namespace detail {

inline std::vector<double> flatten(const MatrixXc& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()) * 2);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out.push_back(m(r, c).real());
            out.push_back(m(r, c).imag());
        }
    return out;
}

inline MatrixXc unflatten(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols, const fs::path& path) {
    if (v.size() != static_cast<std::size_t>(rows * cols * 2)) throw ConfigError("payload size mismatch in " + path.string());
    MatrixXc m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c, k += 2) m(r, c) = {v[k], v[k + 1]};
    return m;
}

}  // namespace detail

inline void save_wmat(const fs::path& path, const ScatteringMatrix& w) {
    write_blob(path, kMagicWmat,
               json{{"K", w.K}, {"omega", w.omega}, {"provenance", w.provenance}, {"target_id", w.target_id},
                    {"layout", "row-major complex, W[n,m] at (n+K, m+K)"}},
               detail::flatten(w.w));
}

inline ScatteringMatrix load_wmat(const fs::path& path) {
    auto [h, p] = read_blob(path, kMagicWmat);
    ScatteringMatrix w;
    w.K = h.at("K").get<int>();
    w.omega = h.at("omega").get<double>();
    w.provenance = h.value("provenance", std::string("computed"));
    w.target_id = h.value("target_id", std::string());
    w.w = detail::unflatten(p, 2 * w.K + 1, 2 * w.K + 1, path);
    return w;
}

inline void save_sdesc(const fs::path& path, const DescriptorGrid& s) {
    write_blob(path, kMagicSdesc, json{{"target_id", s.target_id}, {"omega", s.omega}, {"N_v", s.n_v}}, s.values);
}

inline DescriptorGrid load_sdesc(const fs::path& path) {
    auto [h, p] = read_blob(path, kMagicSdesc);
    DescriptorGrid s;
    s.target_id = h.value("target_id", std::string());
    s.omega = h.at("omega").get<double>();
    s.n_v = h.at("N_v").get<int>();
    if (p.size() != static_cast<std::size_t>(s.n_v) * static_cast<std::size_t>(s.n_v))
        throw ConfigError("payload size mismatch in " + path.string());
    s.values = std::move(p);
    return s;
}

inline void to_json(json& j, const AcquisitionGeometry& g) {
    j = json{{"R", g.R}, {"Ns", g.Ns}, {"Nr", g.Nr}, {"z0", {g.z0.x(), g.z0.y()}}};
}

inline AcquisitionGeometry geometry_from_json(const json& j) {
    AcquisitionGeometry g;
    g.R = j.value("R", g.R);
    g.Ns = j.value("Ns", g.Ns);
    g.Nr = j.value("Nr", g.Nr);
    const auto z = j.value("z0", std::vector<double>{0.0, 0.0});
    if (z.size() != 2) throw ConfigError("z0 must have two components");
    g.z0 = Point(z[0], z[1]);
    return g;
}

inline void save_msr(const fs::path& path, const MSRMatrix& m, const std::string& target_id = {}) {
    json geom;
    to_json(geom, m.geom);
    write_blob(path, kMagicMsr,
               json{{"geometry", geom},
                    {"omega", m.omega},
                    {"noise_level", m.noise_level},
                    {"seed", m.seed},
                    {"target_id", target_id}},
               detail::flatten(m.entries));
}

inline MSRMatrix load_msr(const fs::path& path) {
    auto [h, p] = read_blob(path, kMagicMsr);
    MSRMatrix m;
    m.geom = geometry_from_json(h.at("geometry"));
    m.omega = h.at("omega").get<double>();
    m.noise_level = h.value("noise_level", 0.0);
    m.seed = h.value("seed", std::uint64_t{0});
    m.entries = detail::unflatten(p, m.geom.Nr, m.geom.Ns, path);
    return m;
}

inline std::string hex64(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline std::string sdesc_name(const std::string& id, int l) {
    std::ostringstream os;
    os << id << "_l" << std::setw(3) << std::setfill('0') << l << ".sdesc";
    return os.str();
}

inline json manifest_of(const Dictionary& d) {
    json files = json::object();
    for (std::size_t n = 0; n < d.size(); ++n) {
        json list = json::array();
        for (int l = 0; l < d.grid.size(); ++l) list.push_back(sdesc_name(d.ids[n], l));
        files[d.ids[n]] = list;
    }
    return json{{"format", "scatterid-dictionary-1"},
                {"ids", d.ids},
                {"grid", d.grid},
                {"omegas", d.grid.points()},
                {"N_v", d.n_v},
                {"K", d.K},
                {"n_nodes", d.n_nodes},
                {"masses", d.masses},
                {"files", files},
                {"hash", hex64(d.hash)}};
}

inline void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

inline json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

/// Builds the dictionary and streams every descriptor to `dir` as it is computed.
inline Dictionary build_dictionary_to(const fs::path& dir, const std::vector<TargetConfig>& cat,
                                      const UniformGrid& grid, int n_v, int K, int n_nodes) {
    fs::create_directories(dir);
    auto sink = [&](std::size_t t, int l, const DescriptorGrid& s) { save_sdesc(dir / sdesc_name(cat[t].id, l), s); };
    Dictionary d = build_dictionary(cat, grid, n_v, K, n_nodes, false, sink);
    write_json(dir / "manifest.json", manifest_of(d));
    return d;
}

/// Reads the manifest; with `load_grids` the descriptor files are read too and
/// their masses checked against the manifest.
inline Dictionary load_dictionary(const fs::path& dir, bool load_grids = false) {
    const fs::path mpath = dir / "manifest.json";
    if (!fs::exists(mpath)) throw ConfigError("dictionary manifest not found: " + mpath.string());
    const json m = read_json(mpath);
    Dictionary d;
    try {
        d.ids = m.at("ids").get<std::vector<std::string>>();
        d.grid = m.at("grid").get<UniformGrid>();
        d.n_v = m.at("N_v").get<int>();
        d.K = m.at("K").get<int>();
        d.n_nodes = m.at("n_nodes").get<int>();
        d.masses = m.at("masses").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw ConfigError("malformed dictionary manifest: " + std::string(e.what()));
    }
    if (d.masses.size() != d.ids.size()) throw ConfigError("manifest mass table does not match ids");
    for (const auto& row : d.masses)
        if (static_cast<int>(row.size()) != d.grid.size()) throw ConfigError("manifest mass table does not match grid");
    d.hash = dictionary_hash(d);
    if (m.contains("hash") && m.at("hash").get<std::string>() != hex64(d.hash))
        throw ConfigError("dictionary hash mismatch in " + mpath.string());
    if (load_grids) {
        d.descriptors.resize(d.size());
        for (std::size_t n = 0; n < d.size(); ++n)
            for (int l = 0; l < d.grid.size(); ++l) {
                auto s = load_sdesc(dir / sdesc_name(d.ids[n], l));
                if (std::abs(s.mass() - d.masses[n][static_cast<std::size_t>(l)]) >
                    1e-9 * std::max(1.0, std::abs(d.masses[n][static_cast<std::size_t>(l)])))
                    throw ConfigError("descriptor file disagrees with manifest: " + sdesc_name(d.ids[n], l));
                d.descriptors[n].push_back(std::move(s));
            }
    }
    return d;
}

}  // namespace scatterid::io
