// Synthetic tumor phantoms with exact analytic ground truth.
//
// Shapes are ellipsoids, optionally with a lobulated boundary: the normalized
// radius rho(v) = sqrt(sum(((v_i - c_i)/r_i)^2)) is compared against
// 1 + lobe_amplitude * sin(lobe_count * theta) * sin(lobe_count * phi), where
// (theta, phi) are the azimuth/polar angles of the voxel offset about the
// center. Noise never touches the mask; it is applied to the intensity volume
// only, in a single x-fastest pass per voxel: multiplicative log-normal
// speckle (clamped to [0, 255]) followed by additive Gaussian (clamped again).
// All randomness comes from the library's xoshiro256++ generator seeded with
// rng_seed, so output is a pure function of (dims, spec).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "voxseg/core.hpp"
#include "voxseg/rng.hpp"

namespace voxseg {

struct PhantomSpec {
    std::string shape = "ellipsoid"; // "ellipsoid" | "lobulated"
    std::array<double, 3> center{0.0, 0.0, 0.0};
    std::array<double, 3> radii{0.0, 0.0, 0.0};
    int lobe_count = 0;              // lobulated only
    double lobe_amplitude = 0.0;     // fraction of radius, [0, 0.5]
    double fg_intensity = 200.0;
    double bg_intensity = 50.0;
    double speckle_sigma = 0.0;      // log-normal scale, >= 0
    double additive_sigma = 0.0;     // gray levels, >= 0
    std::uint64_t rng_seed = 0;
};

inline void validate_phantom_spec(const PhantomSpec& s) {
    if (s.shape != "ellipsoid" && s.shape != "lobulated")
        fail("args", "phantom shape must be ellipsoid or lobulated, got \"" + s.shape + "\"");
    for (double r : s.radii)
        if (!(r > 0.0)) fail("args", "phantom radii must be > 0");
    for (double c : s.center)
        if (!std::isfinite(c)) fail("args", "phantom center must be finite");
    if (s.lobe_count < 0) fail("args", "lobe_count must be >= 0");
    if (!(s.lobe_amplitude >= 0.0 && s.lobe_amplitude <= 0.5))
        fail("args", "lobe_amplitude must lie in [0, 0.5]");
    for (double v : {s.fg_intensity, s.bg_intensity})
        if (!(v >= 0.0 && v <= 255.0)) fail("args", "intensities must lie in [0, 255]");
    if (s.fg_intensity == s.bg_intensity)
        fail("args", "fg_intensity must differ from bg_intensity");
    if (!(s.speckle_sigma >= 0.0)) fail("args", "speckle_sigma must be >= 0");
    if (!(s.additive_sigma >= 0.0)) fail("args", "additive_sigma must be >= 0");
}

inline PhantomSpec parse_phantom_spec(const nlohmann::json& j) {
    if (!j.is_object()) fail("format", "phantom spec must be a JSON object");
    static const char* known[] = {"shape", "center", "radii", "lobe_count",
                                  "lobe_amplitude", "fg_intensity", "bg_intensity",
                                  "speckle_sigma", "additive_sigma", "rng_seed"};
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) fail("format", "unknown phantom spec field \"" + key + "\"");
    }
    PhantomSpec s;
    try {
        s.shape = j.at("shape").get<std::string>();
        auto vec3 = [&](const char* name) {
            const auto& a = j.at(name);
            if (!a.is_array() || a.size() != 3)
                fail("format", std::string("phantom spec field \"") + name +
                                   "\" must be a 3-element array");
            return std::array<double, 3>{a.at(0).get<double>(), a.at(1).get<double>(),
                                         a.at(2).get<double>()};
        };
        s.center = vec3("center");
        s.radii = vec3("radii");
        if (j.contains("lobe_count")) s.lobe_count = j.at("lobe_count").get<int>();
        if (j.contains("lobe_amplitude")) s.lobe_amplitude = j.at("lobe_amplitude").get<double>();
        s.fg_intensity = j.at("fg_intensity").get<double>();
        s.bg_intensity = j.at("bg_intensity").get<double>();
        if (j.contains("speckle_sigma")) s.speckle_sigma = j.at("speckle_sigma").get<double>();
        if (j.contains("additive_sigma")) s.additive_sigma = j.at("additive_sigma").get<double>();
        if (j.contains("rng_seed")) s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        fail("format", std::string("malformed phantom spec: ") + e.what());
    }
    validate_phantom_spec(s);
    return s;
}

inline PhantomSpec load_phantom_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail("format", "malformed phantom spec " + path + ": " + e.what());
    }
    return parse_phantom_spec(j);
}

namespace detail {

/// Analytic inside test shared by both shapes (lobulated with amplitude 0 is
/// bit-for-bit the ellipsoid test).
inline bool phantom_inside(const PhantomSpec& s, int x, int y, int z) {
    const double dx = x - s.center[0];
    const double dy = y - s.center[1];
    const double dz = z - s.center[2];
    const double sx = dx / s.radii[0];
    const double sy = dy / s.radii[1];
    const double sz = dz / s.radii[2];
    const double rho = std::sqrt(sx * sx + sy * sy + sz * sz);
    const double amp = s.shape == "lobulated" ? s.lobe_amplitude : 0.0;
    double bound = 1.0;
    if (amp != 0.0) {
        const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (len == 0.0) return true; // center voxel, rho = 0
        const double theta = std::atan2(dy, dx);
        const double phi = std::acos(std::clamp(dz / len, -1.0, 1.0));
        bound = 1.0 + amp * std::sin(s.lobe_count * theta) * std::sin(s.lobe_count * phi);
    }
    return rho <= bound;
}

} // namespace detail

/// Builds the (intensity volume, ground-truth mask) pair. Deterministic under
/// the spec's rng_seed.
inline std::pair<VoxelVolume, BinaryMask> generate_phantom(Dims dims, const PhantomSpec& spec) {
    validate_phantom_spec(spec);
    if (dims.nx < 16 || dims.ny < 16 || dims.nz < 16)
        fail("dims", "phantom dims must be >= 16 per axis, got " + dims.str());
    validate_dims(dims);

    const double stretch = 1.0 + (spec.shape == "lobulated" ? spec.lobe_amplitude : 0.0);
    const int n[3] = {dims.nx, dims.ny, dims.nz};
    for (int i = 0; i < 3; ++i) {
        const double lo = spec.center[static_cast<std::size_t>(i)] -
                          spec.radii[static_cast<std::size_t>(i)] * stretch;
        const double hi = spec.center[static_cast<std::size_t>(i)] +
                          spec.radii[static_cast<std::size_t>(i)] * stretch;
        if (lo < 0.0 || hi > n[i] - 1.0)
            fail("bounds", "phantom shape exceeds volume bounds on axis " + std::to_string(i));
    }

    VoxelVolume vol(dims, spec.bg_intensity);
    BinaryMask mask(dims);
    Xoshiro256pp rng(spec.rng_seed);

    std::size_t i = 0;
    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x, ++i) {
                const bool inside = detail::phantom_inside(spec, x, y, z);
                mask[i] = inside ? 1 : 0;
                double v = inside ? spec.fg_intensity : spec.bg_intensity;
                if (spec.speckle_sigma > 0.0) {
                    v *= std::exp(rng.gaussian() * spec.speckle_sigma);
                    v = std::clamp(v, 0.0, 255.0);
                }
                if (spec.additive_sigma > 0.0) {
                    v += rng.gaussian() * spec.additive_sigma;
                    v = std::clamp(v, 0.0, 255.0);
                }
                vol[i] = v;
            }
    return {std::move(vol), std::move(mask)};
}

} // namespace voxseg
