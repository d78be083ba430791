#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gllab/blowup.hpp"
#include "gllab/gl.hpp"

namespace gllab {

inline constexpr const char* kToolName = "gllab";
inline constexpr const char* kToolVersion = "0.1.0";

class IoError : public Error {
public:
    using Error::Error;
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Shortest representation that round-trips; "nan", "inf", "-inf" otherwise.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Provenance {
    std::string config_text;  // canonical, hashed
    std::uint64_t seed = 0;

    std::string hash() const { return hex64(fnv1a64(config_text)); }

    std::string line(const std::string& prefix = "# ") const {
        return prefix + kToolName + " " + kToolVersion + " config=" + hash() + " seed=" + std::to_string(seed);
    }

    nlohmann::json json() const {
        return {{"tool", kToolName}, {"version", kToolVersion}, {"config_hash", hash()}, {"seed", seed}};
    }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << text;
    if (!os) throw IoError("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// CSV snapshots
// ---------------------------------------------------------------------------

inline std::string grid_line(const Grid& g, const char* layout) {
    return "# nx=" + std::to_string(g.nx()) + " ny=" + std::to_string(g.ny()) + " lx=" + fmt(g.lx()) +
           " ly=" + fmt(g.ly()) + " layout=" + layout + "\n";
}

inline std::string snapshot_csv(const Grid& g, const ComplexField& psi, const Provenance& p) {
    require_nodes(g, psi, "snapshot_csv");
    std::string s = p.line() + "\n" + grid_line(g, "node");
    s += "i,j,x,y,re,im,abs\n";
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            const Point q = g.node(i, j);
            const cplx v = psi(i, j);
            s += std::to_string(i) + "," + std::to_string(j) + "," + fmt(q.x) + "," + fmt(q.y) + "," + fmt(v.real()) +
                 "," + fmt(v.imag()) + "," + fmt(std::abs(v)) + "\n";
        }
    }
    return s;
}

inline std::string snapshot_csv(const Grid& g, const EdgeField& a, const Provenance& p) {
    require_edges(g, a, "snapshot_csv");
    std::string s = p.line() + "\n" + grid_line(g, "edge");
    s += "axis,i,j,x,y,value\n";
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const Point q = g.xedge_mid(i, j);
            s += "x," + std::to_string(i) + "," + std::to_string(j) + "," + fmt(q.x) + "," + fmt(q.y) + "," +
                 fmt(a.x(i, j)) + "\n";
        }
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const Point q = g.yedge_mid(i, j);
            s += "y," + std::to_string(i) + "," + std::to_string(j) + "," + fmt(q.x) + "," + fmt(q.y) + "," +
                 fmt(a.y(i, j)) + "\n";
        }
    return s;
}

// ---------------------------------------------------------------------------
// Binary checkpoints: magic, u64 header length, JSON header, raw doubles
// (psi as re/im pairs, then A_x, then A_y), native byte order recorded.
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[8] = {'G', 'L', 'L', 'A', 'B', 'C', 'K', '1'};

inline void write_checkpoint(const std::string& path, const GLState& s, const Provenance& p) {
    s.validate();
    nlohmann::json h = p.json();
    h["nx"] = s.grid.nx();
    h["ny"] = s.grid.ny();
    h["lx"] = s.grid.lx();
    h["ly"] = s.grid.ly();
    h["kappa"] = s.kappa;
    h["H"] = s.H;
    h["little_endian"] = std::endian::native == std::endian::little;
    const std::string head = h.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os.write(kCheckpointMagic, sizeof kCheckpointMagic);
    const std::uint64_t len = head.size();
    os.write(reinterpret_cast<const char*>(&len), sizeof len);
    os.write(head.data(), static_cast<std::streamsize>(head.size()));
    os.write(reinterpret_cast<const char*>(s.psi.values().data()),
             static_cast<std::streamsize>(s.psi.size() * sizeof(cplx)));
    os.write(reinterpret_cast<const char*>(s.a.x.values().data()),
             static_cast<std::streamsize>(s.a.x.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(s.a.y.values().data()),
             static_cast<std::streamsize>(s.a.y.size() * sizeof(double)));
    if (!os) throw IoError("write failed: " + path);
}

inline GLState read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw IoError(path + ": not a checkpoint");
    std::uint64_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!is || len > (1u << 20)) throw IoError(path + ": corrupt header");
    std::string head(len, '\0');
    is.read(head.data(), static_cast<std::streamsize>(len));
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(head);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    if (h.value("little_endian", true) != (std::endian::native == std::endian::little))
        throw IoError(path + ": byte order differs from this machine");
    const Grid g(h.at("nx").get<int>(), h.at("ny").get<int>(), h.at("lx").get<double>(), h.at("ly").get<double>());
    GLState s{g, g.complex_field(), g.edge_field(), h.at("kappa").get<double>(), h.at("H").get<double>()};
    is.read(reinterpret_cast<char*>(s.psi.values().data()), static_cast<std::streamsize>(s.psi.size() * sizeof(cplx)));
    is.read(reinterpret_cast<char*>(s.a.x.values().data()), static_cast<std::streamsize>(s.a.x.size() * sizeof(double)));
    is.read(reinterpret_cast<char*>(s.a.y.values().data()), static_cast<std::streamsize>(s.a.y.size() * sizeof(double)));
    if (!is) throw IoError(path + ": truncated");
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Frame dumps and spectral tables
// ---------------------------------------------------------------------------

inline std::string frame_csv(const BlowupFrame& f, const Provenance& p) {
    std::string s = p.line() + "\n";
    s += "# P=" + fmt(f.P.x) + "," + fmt(f.P.y) + " case=" + to_string(f.kind) + " S=" + fmt(f.S) +
         " Lambda=" + fmt(f.Lambda) + " R=" + fmt(f.R) + " B=" + fmt(f.B) + "\n";
    s += grid_line(f.grid, "node");
    s += "i,j,sigma,tau,re,im,abs\n";
    for (int j = 0; j <= f.grid.ny(); ++j)
        for (int i = 0; i <= f.grid.nx(); ++i) {
            const Point z = f.zeta(i, j);
            const cplx v = f.phi(i, j);
            s += std::to_string(i) + "," + std::to_string(j) + "," + fmt(z.x) + "," + fmt(z.y) + "," + fmt(v.real()) +
                 "," + fmt(v.imag()) + "," + fmt(std::abs(v)) + "\n";
        }
    return s;
}

inline std::string mu_table_csv(const std::vector<std::pair<double, double>>& rows, double T, int n,
                                const Provenance& p) {
    std::string s = p.line() + "\nxi,mu,n,T\n";
    for (const auto& [xi, mu] : rows) s += fmt(xi) + "," + fmt(mu) + "," + std::to_string(n) + "," + fmt(T) + "\n";
    return s;
}

}  // namespace gllab
