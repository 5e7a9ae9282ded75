// Core 3D grid types shared by every stage of the contouring pipeline.
//
// Conventions used throughout the library:
//   - voxel storage is x-fastest, then y, then z
//   - coordinates are zero-based
//   - level-set sign: phi < 0 inside, phi > 0 outside
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace voxseg {

/// Error with a short machine-readable code ("io", "format", "args", ...).
/// The CLI prints these as `ERROR <code>: <detail>`.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& detail) {
    throw Error(code, detail);
}

struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    friend bool operator==(const Dims&, const Dims&) = default;

    std::int64_t total() const {
        return static_cast<std::int64_t>(nx) * ny * nz;
    }

    bool contains(int x, int y, int z) const {
        return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
    }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(nx) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * z);
    }

    std::string str() const {
        return std::to_string(nx) + "x" + std::to_string(ny) + "x" + std::to_string(nz);
    }
};

inline void validate_dims(const Dims& d) {
    if (d.nx < 1 || d.ny < 1 || d.nz < 1)
        fail("dims", "dimensions must be >= 1 per axis, got " + d.str());
    if (d.total() > (std::int64_t(1) << 33))
        fail("dims", "volume too large: " + d.str());
}

/// Dense 3D grid with value semantics. x-fastest layout.
template <class T>
class Grid3 {
public:
    Grid3() = default;

    explicit Grid3(Dims dims, T fill = T{}) : dims_(dims) {
        validate_dims(dims);
        data_.assign(static_cast<std::size_t>(dims.total()), fill);
    }

    const Dims& dims() const { return dims_; }
    std::int64_t size() const { return dims_.total(); }

    T& operator()(int x, int y, int z) { return data_[dims_.index(x, y, z)]; }
    const T& operator()(int x, int y, int z) const { return data_[dims_.index(x, y, z)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Grid3&, const Grid3&) = default;

private:
    Dims dims_;
    std::vector<T> data_;
};

/// Boolean occupancy grid: region-growing output, ground truth, final segmentation.
using BinaryMask = Grid3<std::uint8_t>;

/// Signed scalar field phi; the zero level set is the contour, {phi < 0} the interior.
using LevelSetField = Grid3<double>;

/// Scalar intensity volume, nominal range [0, 255]. Spacing is carried in
/// millimeters per voxel but is informational only (distances are in voxels).
class VoxelVolume : public Grid3<double> {
public:
    VoxelVolume() = default;
    explicit VoxelVolume(Dims dims, double fill = 0.0,
                         std::array<double, 3> spacing = {1.0, 1.0, 1.0})
        : Grid3<double>(dims, fill), spacing(spacing) {}

    std::array<double, 3> spacing{1.0, 1.0, 1.0};
};

struct SeedPoint {
    int x = 0;
    int y = 0;
    int z = 0;
};

enum class Axis { X, Y, Z };

inline Axis axis_from_string(const std::string& s) {
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    fail("args", "axis must be one of x|y|z, got \"" + s + "\"");
}

inline void require_same_dims(const Dims& a, const Dims& b, const std::string& what) {
    if (!(a == b))
        fail("dims", what + ": dimension mismatch " + a.str() + " vs " + b.str());
}

inline std::int64_t count_true(const BinaryMask& m) {
    std::int64_t n = 0;
    for (std::uint8_t b : m.data()) n += b ? 1 : 0;
    return n;
}

/// Mask induced by the level set: {phi < 0}.
inline BinaryMask mask_from_phi(const LevelSetField& phi) {
    BinaryMask m(phi.dims());
    const std::size_t n = phi.data().size();
    for (std::size_t i = 0; i < n; ++i) m[i] = phi[i] < 0.0 ? 1 : 0;
    return m;
}

} // namespace voxseg
