// End-to-end segmentation pipeline: seeded growing -> slice-wise closing ->
// Gaussian smoothing -> level-set refinement.
#pragma once

#include <chrono>

#include "voxseg/core.hpp"
#include "voxseg/filters.hpp"
#include "voxseg/growing.hpp"
#include "voxseg/levelset.hpp"

namespace voxseg {

struct PipelineConfig {
    SeedPoint seed;
    GrowParams grow;
    int se_width = 21;      // even widths are normalized upward
    double sigma = 1.5;
    ChanVeseParams cv;
    bool blur_before_grow = false; // grow on the smoothed volume instead of the raw one

    void validate() const {
        grow.validate();
        cv.validate();
        StructuringElement::normalized(se_width);
        if (!(sigma > 0.0)) fail("args", "sigma must be > 0");
    }
};

struct PipelineResult {
    BinaryMask mask;    // final segmentation
    CvTrace trace;
    BinaryMask initial; // region-growing output
    BinaryMask closed;  // after morphological closing
    double t_grow = 0.0, t_close = 0.0, t_blur = 0.0, t_levelset = 0.0; // seconds
};

/// Runs the full pipeline. Region growing sees the raw volume (unless
/// blur_before_grow); the level set always evolves on the smoothed volume.
/// A closed initial region that is empty or floods the whole volume aborts
/// with a "collapse" error before the level-set stage.
inline PipelineResult segment_pipeline(const VoxelVolume& vol, const PipelineConfig& config,
                                       int threads = 1) {
    config.validate();
    normalize_threads(threads);
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    PipelineResult res;

    auto t0 = clock::now();
    VoxelVolume smoothed = gaussian_blur3d(vol, config.sigma, threads);
    auto t1 = clock::now();
    res.t_blur = seconds(t0, t1);

    res.initial = region_grow(config.blur_before_grow ? smoothed : vol, config.seed,
                              config.grow);
    auto t2 = clock::now();
    res.t_grow = seconds(t1, t2);

    const StructuringElement se = StructuringElement::normalized(config.se_width);
    res.closed = close_mask(res.initial, se, threads);
    auto t3 = clock::now();
    res.t_close = seconds(t2, t3);

    const std::int64_t n_closed = count_true(res.closed);
    if (n_closed == 0)
        fail("collapse", "initial region is empty after closing");
    if (n_closed == res.closed.dims().total())
        fail("collapse", "initial region floods the whole volume");

    auto [mask, trace] = cv_run(smoothed, res.closed, config.cv, threads);
    res.mask = std::move(mask);
    res.trace = std::move(trace);
    res.t_levelset = seconds(t3, clock::now());
    return res;
}

} // namespace voxseg
