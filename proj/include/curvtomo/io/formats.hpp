#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"
#include "curvtomo/ray/sinogram.hpp"

namespace curvtomo {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

class LeWriter {
  public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double d) {
        std::uint64_t v;
        std::memcpy(&v, &d, 8);
        u64(v);
    }
    void bytes(const char* s, std::size_t n) { buf_.insert(buf_.end(), s, s + n); }
    std::size_t size() const { return buf_.size(); }
    const std::vector<unsigned char>& data() const { return buf_; }

  private:
    std::vector<unsigned char> buf_;
};

class LeReader {
  public:
    LeReader(const std::vector<unsigned char>& b, std::string path) : b_(b), path_(std::move(path)) {}
    void need(std::size_t n) const {
        if (pos_ + n > b_.size()) throw FormatError(path_ + ": truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() {
        const std::uint64_t v = u64();
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }
    std::string magic() {
        need(4);
        std::string m(reinterpret_cast<const char*>(&b_[pos_]), 4);
        pos_ += 4;
        return m;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return b_.size() - pos_; }
    const unsigned char* at(std::size_t p) const { return b_.data() + p; }

  private:
    const std::vector<unsigned char>& b_;
    std::string path_;
    std::size_t pos_ = 0;
};

inline std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open for reading");
    return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError(path + ": write failed");
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path + ": cannot open for writing");
    out << text;
    if (!out) throw FormatError(path + ": write failed");
}

}  // namespace detail

/// Shortest-round-trip is not required; 17 significant digits always round-trip.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- grid images: "CTG1", u32 nx, u32 ny, f64 box, row-major f64 payload, u64 FNV-1a of payload ----

inline std::vector<unsigned char> encode_grid_image(const GridImage& img) {
    detail::LeWriter w;
    w.bytes("CTG1", 4);
    const auto& g = img.grid;
    w.u32(static_cast<std::uint32_t>(g.nx()));
    w.u32(static_cast<std::uint32_t>(g.ny()));
    w.f64(g.box().x_min);
    w.f64(g.box().x_max);
    w.f64(g.box().y_min);
    w.f64(g.box().y_max);
    const std::size_t start = w.size();
    for (double v : img.values) w.f64(v);
    const std::uint64_t h = fnv1a(w.data().data() + start, w.size() - start);
    w.u64(h);
    return w.data();
}

inline GridImage decode_grid_image(const std::vector<unsigned char>& bytes, const std::string& path = "image") {
    detail::LeReader r(bytes, path);
    if (r.magic() != "CTG1") throw FormatError(path + ": bad magic (expected CTG1)");
    const std::uint32_t nx = r.u32(), ny = r.u32();
    Box box;
    box.x_min = r.f64();
    box.x_max = r.f64();
    box.y_min = r.f64();
    box.y_max = r.f64();
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    if (r.remaining() != 8 * n + 8)
        throw FormatError(path + ": payload length does not match header dimensions " + std::to_string(nx) + "x" +
                          std::to_string(ny));
    const std::size_t start = r.pos();
    std::vector<double> v(n);
    for (double& x : v) x = r.f64();
    const std::uint64_t expect = fnv1a(r.at(start), 8 * n);
    if (r.u64() != expect) throw FormatError(path + ": checksum mismatch");
    if (nx == 0 || ny == 0 || !(box.x_max > box.x_min) || !(box.y_max > box.y_min))
        throw FormatError(path + ": invalid grid header");
    return GridImage(SpatialGrid(box, nx, ny), std::move(v));
}

inline void write_grid_image(const std::string& path, const GridImage& img) {
    detail::write_file(path, encode_grid_image(img));
}
inline GridImage read_grid_image(const std::string& path) { return decode_grid_image(detail::read_file(path), path); }

inline std::string grid_image_csv(const GridImage& img) {
    std::string s = "i,j,x,y,value\n";
    const auto& g = img.grid;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const Vec2 c = g.center(i, j);
            s += std::to_string(i) + "," + std::to_string(j) + "," + format_double(c[0]) + "," + format_double(c[1]) + "," +
                 format_double(img(i, j)) + "\n";
        }
    return s;
}

// ---- sinograms: "CTS1", u32 count, per node (f64 arc length, f64 angle, f64 weight, f64 value), u64 FNV-1a ----

/// One stored node. The angle is the absolute direction angle of theta.
struct SinogramRecord {
    double arc_length = 0.0;
    double angle = 0.0;
    double weight = 0.0;
    double value = 0.0;
};

inline std::vector<SinogramRecord> sinogram_records(const BoundarySinogram& s) {
    std::vector<SinogramRecord> r(s.size());
    for (std::size_t q = 0; q < s.size(); ++q)
        r[q] = {s.nodes[q].arc_length, s.nodes[q].direction_angle(), s.nodes[q].weight, s.values[q]};
    return r;
}

inline std::vector<unsigned char> encode_sinogram(const std::vector<SinogramRecord>& recs) {
    detail::LeWriter w;
    w.bytes("CTS1", 4);
    w.u32(static_cast<std::uint32_t>(recs.size()));
    const std::size_t start = w.size();
    for (const auto& r : recs) {
        w.f64(r.arc_length);
        w.f64(r.angle);
        w.f64(r.weight);
        w.f64(r.value);
    }
    const std::uint64_t h = fnv1a(w.data().data() + start, w.size() - start);
    w.u64(h);
    return w.data();
}

inline std::vector<SinogramRecord> decode_sinogram(const std::vector<unsigned char>& bytes, const std::string& path = "sinogram") {
    detail::LeReader r(bytes, path);
    if (r.magic() != "CTS1") throw FormatError(path + ": bad magic (expected CTS1)");
    const std::uint32_t n = r.u32();
    if (r.remaining() != 32ull * n + 8) throw FormatError(path + ": payload length does not match node count " + std::to_string(n));
    const std::size_t start = r.pos();
    std::vector<SinogramRecord> recs(n);
    for (auto& x : recs) {
        x.arc_length = r.f64();
        x.angle = r.f64();
        x.weight = r.f64();
        x.value = r.f64();
    }
    if (r.u64() != fnv1a(r.at(start), 32ull * n)) throw FormatError(path + ": checksum mismatch");
    return recs;
}

inline void write_sinogram(const std::string& path, const BoundarySinogram& s) {
    detail::write_file(path, encode_sinogram(sinogram_records(s)));
}
inline std::vector<SinogramRecord> read_sinogram_records(const std::string& path) {
    return decode_sinogram(detail::read_file(path), path);
}

/// Attaches stored values to a node set; the stored coordinates and weights
/// must match the nodes.
inline BoundarySinogram attach_sinogram(const std::vector<SinogramRecord>& recs, const BoundarySinogram& layout,
                                        double tol = 1e-12) {
    if (recs.size() != layout.size())
        throw FormatError("sinogram has " + std::to_string(recs.size()) + " nodes, the configuration expects " +
                          std::to_string(layout.size()));
    BoundarySinogram s = layout;
    for (std::size_t q = 0; q < recs.size(); ++q) {
        const auto& n = layout.nodes[q];
        const double da = std::abs(wrap_angle(recs[q].angle - n.direction_angle() + kPi) - kPi);
        if (std::abs(recs[q].arc_length - n.arc_length) > tol * (1.0 + n.arc_length) || da > tol * 10.0 ||
            std::abs(recs[q].weight - n.weight) > tol * (1.0 + n.weight))
            throw FormatError("sinogram node " + std::to_string(q) + " does not match the configured node set");
        s.values[q] = recs[q].value;
    }
    return s;
}

inline std::string sinogram_csv(const BoundarySinogram& s) {
    std::string out = "position,direction,arc_length,angle,weight,value\n";
    for (std::size_t q = 0; q < s.size(); ++q) {
        const auto& n = s.nodes[q];
        out += std::to_string(n.position_index) + "," + std::to_string(n.direction_index) + "," + format_double(n.arc_length) +
               "," + format_double(n.direction_angle()) + "," + format_double(n.weight) + "," + format_double(s.values[q]) +
               "\n";
    }
    return out;
}

inline std::string residual_csv(const std::vector<double>& residual, const std::vector<double>& normal_residual) {
    std::string out = "iteration,residual,normal_residual\n";
    const std::size_t n = std::max(residual.size(), normal_residual.size());
    for (std::size_t k = 0; k < n; ++k) {
        out += std::to_string(k) + "," + (k < residual.size() ? format_double(residual[k]) : "") + "," +
               (k < normal_residual.size() ? format_double(normal_residual[k]) : "") + "\n";
    }
    return out;
}

}  // namespace curvtomo
