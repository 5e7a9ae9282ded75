// VOL1 on-disk format and PGM slice export.
//
// A VOL1 dataset is a pair of files: `<name>.vol.json` (UTF-8 JSON header with
// fields dims, spacing, dtype, data) and the raw little-endian payload file the
// header points to, exactly nx*ny*nz elements in x-fastest order. Volumes use
// dtype "f32", masks dtype "u8" with 0/1 bytes.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxseg/core.hpp"

namespace voxseg {

namespace detail {

inline constexpr const char* kHeaderSuffix = ".vol.json";

inline std::filesystem::path header_path(const std::string& path_or_base) {
    std::filesystem::path p(path_or_base);
    if (p.string().size() >= 9 && p.string().ends_with(kHeaderSuffix)) return p;
    return std::filesystem::path(path_or_base + kHeaderSuffix);
}

inline std::string base_of(const std::filesystem::path& header) {
    std::string s = header.string();
    return s.substr(0, s.size() - std::string(kHeaderSuffix).size());
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail("io", "cannot open " + p.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) fail("io", "read failed for " + p.string());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& p,
                             const void* data, std::size_t n) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail("io", "cannot open " + p.string() + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out) fail("io", "write failed for " + p.string());
}

struct Vol1Header {
    Dims dims;
    std::array<double, 3> spacing;
    std::string dtype;
    std::filesystem::path raw_path; // resolved against the header directory
};

inline Vol1Header parse_header(const std::filesystem::path& hp) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_bytes(hp));
    } catch (const nlohmann::json::exception& e) {
        fail("format", "malformed VOL1 header " + hp.string() + ": " + e.what());
    }
    Vol1Header h;
    try {
        if (!j.is_object() || !j.contains("dims") || !j.contains("spacing") ||
            !j.contains("dtype") || !j.contains("data"))
            fail("format", "VOL1 header missing required fields in " + hp.string());
        auto dims = j.at("dims");
        auto spc = j.at("spacing");
        if (!dims.is_array() || dims.size() != 3 || !spc.is_array() || spc.size() != 3)
            fail("format", "VOL1 dims/spacing must be 3-element arrays in " + hp.string());
        h.dims = Dims{dims.at(0).get<int>(), dims.at(1).get<int>(), dims.at(2).get<int>()};
        for (int i = 0; i < 3; ++i) h.spacing[static_cast<std::size_t>(i)] = spc.at(i).get<double>();
        h.dtype = j.at("dtype").get<std::string>();
        auto data = j.at("data").get<std::string>();
        h.raw_path = hp.parent_path() / data;
    } catch (const nlohmann::json::exception& e) {
        fail("format", "malformed VOL1 header " + hp.string() + ": " + e.what());
    }
    validate_dims(h.dims);
    if (h.dtype != "f32" && h.dtype != "u8")
        fail("format", "VOL1 dtype must be \"f32\" or \"u8\", got \"" + h.dtype + "\"");
    return h;
}

inline void write_header(const std::string& base, const Dims& d,
                         const std::array<double, 3>& spacing, const char* dtype) {
    nlohmann::ordered_json j;
    j["dims"] = {d.nx, d.ny, d.nz};
    j["spacing"] = {spacing[0], spacing[1], spacing[2]};
    j["dtype"] = dtype;
    j["data"] = std::filesystem::path(base + ".raw").filename().string();
    const std::string text = j.dump();
    write_file_bytes(std::filesystem::path(base + kHeaderSuffix), text.data(), text.size());
}

inline float f32_from_le(const unsigned char* b) {
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                            (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

inline void f32_to_le(float f, unsigned char* b) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    b[0] = static_cast<unsigned char>(u & 0xff);
    b[1] = static_cast<unsigned char>((u >> 8) & 0xff);
    b[2] = static_cast<unsigned char>((u >> 16) & 0xff);
    b[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

} // namespace detail

/// Loads a VOL1 volume (dtype f32). `path` is either the header path or the
/// dataset basename.
inline VoxelVolume load_volume(const std::string& path) {
    const auto hp = detail::header_path(path);
    if (!std::filesystem::exists(hp)) fail("io", "no such file: " + hp.string());
    const auto h = detail::parse_header(hp);
    if (h.dtype != "f32")
        fail("format", "expected dtype f32 in " + hp.string() + ", got " + h.dtype);
    const auto bytes = detail::read_file_bytes(h.raw_path);
    const std::size_t expect = static_cast<std::size_t>(h.dims.total()) * 4;
    if (bytes.size() != expect)
        fail("format", "payload size mismatch in " + h.raw_path.string() + ": expected " +
                           std::to_string(expect) + " bytes, got " + std::to_string(bytes.size()));
    VoxelVolume vol(h.dims, 0.0, h.spacing);
    const std::size_t n = static_cast<std::size_t>(h.dims.total());
    for (std::size_t i = 0; i < n; ++i) {
        const float f = detail::f32_from_le(bytes.data() + 4 * i);
        if (!std::isfinite(f))
            fail("format", "non-finite value at voxel " + std::to_string(i) + " in " +
                               h.raw_path.string());
        vol[i] = static_cast<double>(f);
    }
    return vol;
}

/// Loads a VOL1 mask (dtype u8, strictly 0/1 bytes).
inline BinaryMask load_mask(const std::string& path) {
    const auto hp = detail::header_path(path);
    if (!std::filesystem::exists(hp)) fail("io", "no such file: " + hp.string());
    const auto h = detail::parse_header(hp);
    if (h.dtype != "u8")
        fail("format", "expected dtype u8 in " + hp.string() + ", got " + h.dtype);
    const auto bytes = detail::read_file_bytes(h.raw_path);
    const std::size_t expect = static_cast<std::size_t>(h.dims.total());
    if (bytes.size() != expect)
        fail("format", "payload size mismatch in " + h.raw_path.string() + ": expected " +
                           std::to_string(expect) + " bytes, got " + std::to_string(bytes.size()));
    BinaryMask mask(h.dims);
    for (std::size_t i = 0; i < expect; ++i) {
        if (bytes[i] > 1)
            fail("format", "mask byte not 0/1 at voxel " + std::to_string(i) + " in " +
                               h.raw_path.string());
        mask[i] = bytes[i];
    }
    return mask;
}

/// Writes `<base>.vol.json` + `<base>.raw` (f32 little-endian payload).
inline void save_volume(const VoxelVolume& vol, const std::string& base) {
    detail::write_header(base, vol.dims(), vol.spacing, "f32");
    const std::size_t n = static_cast<std::size_t>(vol.dims().total());
    std::vector<unsigned char> bytes(n * 4);
    for (std::size_t i = 0; i < n; ++i)
        detail::f32_to_le(static_cast<float>(vol[i]), bytes.data() + 4 * i);
    detail::write_file_bytes(base + ".raw", bytes.data(), bytes.size());
}

/// Writes `<base>.vol.json` + `<base>.raw` (u8 payload, 0/1 bytes).
inline void save_mask(const BinaryMask& mask, const std::string& base,
                      std::array<double, 3> spacing = {1.0, 1.0, 1.0}) {
    detail::write_header(base, mask.dims(), spacing, "u8");
    const std::size_t n = static_cast<std::size_t>(mask.dims().total());
    std::vector<unsigned char> bytes(n);
    for (std::size_t i = 0; i < n; ++i) bytes[i] = mask[i] ? 1 : 0;
    detail::write_file_bytes(base + ".raw", bytes.data(), bytes.size());
}

/// Writes one slice of the volume as binary PGM (P5, maxval 255), intensities
/// rescaled to [0, 255], with mask boundary voxels (true voxels having at
/// least one false in-plane 4-neighbor, borders counting as false) painted at
/// maximum intensity.
inline void export_overlay(const VoxelVolume& vol, const BinaryMask& mask,
                           Axis axis, int index, const std::string& path) {
    require_same_dims(vol.dims(), mask.dims(), "export_overlay");
    const Dims d = vol.dims();

    // Slice coordinates (u, v) -> volume (x, y, z); u runs along PGM columns.
    int w = 0, h = 0;
    switch (axis) {
        case Axis::X: w = d.ny; h = d.nz; break;
        case Axis::Y: w = d.nx; h = d.nz; break;
        case Axis::Z: w = d.nx; h = d.ny; break;
    }
    const int extent = axis == Axis::X ? d.nx : axis == Axis::Y ? d.ny : d.nz;
    if (index < 0 || index >= extent)
        fail("bounds", "slice index " + std::to_string(index) + " out of range [0, " +
                           std::to_string(extent) + ")");

    auto vox = [&](int u, int v, const auto& g) -> decltype(auto) {
        switch (axis) {
            case Axis::X: return g(index, u, v);
            case Axis::Y: return g(u, index, v);
            default: return g(u, v, index);
        }
    };

    double lo = vox(0, 0, vol), hi = lo;
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            const double s = vox(u, v, vol);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;

    auto in_mask = [&](int u, int v) -> bool {
        if (u < 0 || u >= w || v < 0 || v >= h) return false;
        return vox(u, v, mask) != 0;
    };

    std::vector<unsigned char> pix(static_cast<std::size_t>(w) * h);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            double g = (vox(u, v, vol) - lo) * scale;
            const bool boundary = in_mask(u, v) &&
                                  (!in_mask(u - 1, v) || !in_mask(u + 1, v) ||
                                   !in_mask(u, v - 1) || !in_mask(u, v + 1));
            if (boundary) g = 255.0;
            pix[static_cast<std::size_t>(v) * w + u] =
                static_cast<unsigned char>(std::lround(std::clamp(g, 0.0, 255.0)));
        }

    std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    std::vector<unsigned char> out;
    out.reserve(header.size() + pix.size());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), pix.begin(), pix.end());
    detail::write_file_bytes(path, out.data(), out.size());
}

} // namespace voxseg
