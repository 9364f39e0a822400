#include "nch/io.hpp"

#include <array>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nch {

namespace {

constexpr char kMagic[4] = {'N', 'C', 'H', 'F'};
constexpr std::uint32_t kFormatVersion = 1;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& path, int line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw IoError(path + ":" + std::to_string(line) +
                      ": malformed numeric field '" + s + "'");
    return v;
}

void put_u32_le(std::ostream& os, std::uint32_t v) {
    const std::array<char, 4> b = {static_cast<char>(v & 0xFF),
                                   static_cast<char>((v >> 8) & 0xFF),
                                   static_cast<char>((v >> 16) & 0xFF),
                                   static_cast<char>((v >> 24) & 0xFF)};
    os.write(b.data(), b.size());
}

void put_f64_le(std::ostream& os, double d) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b.data(), b.size());
}

std::uint32_t get_u32_le(std::istream& is, const std::string& path) {
    std::array<unsigned char, 4> b;
    if (!is.read(reinterpret_cast<char*>(b.data()), b.size()))
        throw IoError(path + ": truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64_le(std::istream& is, const std::string& path) {
    std::array<unsigned char, 8> b;
    if (!is.read(reinterpret_cast<char*>(b.data()), b.size()))
        throw IoError(path + ": truncated payload");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

} // namespace

void write_energy_csv(const std::vector<EnergyRecord>& records,
                      const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    os << "t,mass,E,E_mod,linf,min,max,dt\n";
    for (const EnergyRecord& r : records) {
        os << format_double(r.t) << ',' << format_double(r.mass) << ','
           << format_double(r.E) << ',' << (r.E_mod ? format_double(*r.E_mod) : "")
           << ',' << format_double(r.linf) << ',' << format_double(r.min) << ','
           << format_double(r.max) << ',' << format_double(r.dt) << '\n';
    }
    if (!os)
        throw IoError("write failure on '" + path + "'");
}

std::vector<EnergyRecord> read_energy_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open '" + path + "' for reading");

    std::string line;
    if (!std::getline(is, line))
        throw IoError(path + ":1: missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "t,mass,E,E_mod,linf,min,max,dt")
        throw IoError(path + ":1: unexpected header '" + line + "'");

    std::vector<EnergyRecord> records;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ','))
            fields.push_back(cell);
        if (!line.empty() && line.back() == ',')
            fields.push_back("");
        if (fields.size() != 8)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected 8 fields, got " +
                          std::to_string(fields.size()));
        EnergyRecord r;
        r.t = parse_double(fields[0], path, lineno);
        r.mass = parse_double(fields[1], path, lineno);
        r.E = parse_double(fields[2], path, lineno);
        if (!fields[3].empty())
            r.E_mod = parse_double(fields[3], path, lineno);
        r.linf = parse_double(fields[4], path, lineno);
        r.min = parse_double(fields[5], path, lineno);
        r.max = parse_double(fields[6], path, lineno);
        r.dt = parse_double(fields[7], path, lineno);
        records.push_back(r);
    }
    return records;
}

void write_snapshot(const RealField& field, double t, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    const Grid& g = field.grid();
    os.write(kMagic, 4);
    put_u32_le(os, kFormatVersion);
    put_u32_le(os, static_cast<std::uint32_t>(g.n1()));
    put_u32_le(os, static_cast<std::uint32_t>(g.n2()));
    put_f64_le(os, g.x1());
    put_f64_le(os, g.x2());
    put_f64_le(os, t);
    for (double v : field.values())
        put_f64_le(os, v);
    if (!os)
        throw IoError("write failure on '" + path + "'");
}

std::pair<RealField, double> read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open '" + path + "' for reading");

    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError(path + ": bad magic (not a snapshot file)");
    const std::uint32_t version = get_u32_le(is, path);
    if (version != kFormatVersion)
        throw IoError(path + ": unsupported format version " + std::to_string(version));
    const std::uint32_t n1 = get_u32_le(is, path);
    const std::uint32_t n2 = get_u32_le(is, path);
    const double x1 = get_f64_le(is, path);
    const double x2 = get_f64_le(is, path);
    const double t = get_f64_le(is, path);

    RealField field(make_grid(x1, x2, static_cast<int>(n1), static_cast<int>(n2)));
    for (double& v : field.values())
        v = get_f64_le(is, path);
    char extra;
    if (is.read(&extra, 1))
        throw IoError(path + ": trailing bytes after payload");
    return {std::move(field), t};
}

void write_pgm(const RealField& field, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    const Grid& g = field.grid();
    os << "P5\n" << g.n2() << ' ' << g.n1() << "\n255\n";
    for (double v : field.values()) {
        const double mapped = std::round(255.0 * (v + 1.1) / 2.2);
        const int level = static_cast<int>(std::min(255.0, std::max(0.0, mapped)));
        os.put(static_cast<char>(level));
    }
    if (!os)
        throw IoError("write failure on '" + path + "'");
}

} // namespace nch
