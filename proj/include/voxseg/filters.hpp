// Gaussian pre-smoothing and slice-wise morphological closing.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "voxseg/core.hpp"
#include "voxseg/parallel.hpp"

namespace voxseg {

/// In-plane square structuring element. Width must be odd so the element has
/// a symmetric center; even requests are normalized upward (20 -> 21).
struct StructuringElement {
    int width = 21;

    static StructuringElement normalized(int requested) {
        if (requested < 1) fail("args", "structuring element width must be >= 1");
        return StructuringElement{requested % 2 == 0 ? requested + 1 : requested};
    }

    void validate() const {
        if (width < 1 || width % 2 == 0)
            fail("args", "structuring element width must be odd and >= 1, got " +
                             std::to_string(width));
    }

    int radius() const { return (width - 1) / 2; }
};

/// Normalized 1D Gaussian taps for offsets [-radius, radius], radius = ceil(3*sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) fail("args", "sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * (k / sigma) * (k / sigma));
        w[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

/// One separable pass along `axis` with replicate boundary handling.
inline VoxelVolume gaussian_blur_axis(const VoxelVolume& vol, double sigma, Axis axis,
                                      int threads = 1) {
    const auto kernel = gaussian_kernel(sigma);
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    const Dims d = vol.dims();
    VoxelVolume out(d, 0.0, vol.spacing);

    // Each output voxel depends only on the input volume, so any partition of
    // the z range gives bitwise-identical results.
    parallel_for(d.nz, threads, [&](std::int64_t z0, std::int64_t z1) {
        for (int z = static_cast<int>(z0); z < static_cast<int>(z1); ++z)
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) {
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        int sx = x, sy = y, sz = z;
                        switch (axis) {
                            case Axis::X: sx = std::clamp(x + k, 0, d.nx - 1); break;
                            case Axis::Y: sy = std::clamp(y + k, 0, d.ny - 1); break;
                            case Axis::Z: sz = std::clamp(z + k, 0, d.nz - 1); break;
                        }
                        acc += kernel[static_cast<std::size_t>(k + radius)] * vol(sx, sy, sz);
                    }
                    out(x, y, z) = acc;
                }
    });
    return out;
}

/// Separable 3D Gaussian blur: x, then y, then z.
inline VoxelVolume gaussian_blur3d(const VoxelVolume& vol, double sigma, int threads = 1) {
    VoxelVolume tmp = gaussian_blur_axis(vol, sigma, Axis::X, threads);
    tmp = gaussian_blur_axis(tmp, sigma, Axis::Y, threads);
    return gaussian_blur_axis(tmp, sigma, Axis::Z, threads);
}

namespace detail {

// Slice-wise separable max/min filters. The width x width square decomposes
// into a horizontal then a vertical segment; out-of-bounds samples count as
// false for both dilation (OR of nothing) and erosion (window must fit).
inline BinaryMask morph2d(const BinaryMask& mask, const StructuringElement& se,
                          bool dilate, int threads) {
    se.validate();
    const int r = se.radius();
    const Dims d = mask.dims();
    BinaryMask mid(d), out(d);

    parallel_for(d.nz, threads, [&](std::int64_t z0, std::int64_t z1) {
        for (int z = static_cast<int>(z0); z < static_cast<int>(z1); ++z) {
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) {
                    bool v = !dilate;
                    for (int k = -r; k <= r; ++k) {
                        const int sx = x + k;
                        const bool s = sx >= 0 && sx < d.nx && mask(sx, y, z) != 0;
                        v = dilate ? (v || s) : (v && s);
                    }
                    mid(x, y, z) = v ? 1 : 0;
                }
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) {
                    bool v = !dilate;
                    for (int k = -r; k <= r; ++k) {
                        const int sy = y + k;
                        const bool s = sy >= 0 && sy < d.ny && mid(x, sy, z) != 0;
                        v = dilate ? (v || s) : (v && s);
                    }
                    out(x, y, z) = v ? 1 : 0;
                }
        }
    });
    return out;
}

} // namespace detail

/// Per-slice (fixed z) dilation by the width x width square.
inline BinaryMask dilate2d(const BinaryMask& mask, const StructuringElement& se,
                           int threads = 1) {
    return detail::morph2d(mask, se, true, threads);
}

/// Per-slice erosion; windows crossing the slice border never pass.
inline BinaryMask erode2d(const BinaryMask& mask, const StructuringElement& se,
                          int threads = 1) {
    return detail::morph2d(mask, se, false, threads);
}

/// Morphological closing, slice-wise over z: dilate then erode.
inline BinaryMask close_mask(const BinaryMask& mask, const StructuringElement& se,
                             int threads = 1) {
    return erode2d(dilate2d(mask, se, threads), se, threads);
}

} // namespace voxseg
