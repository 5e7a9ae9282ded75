#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <set>

#include "voxseg/phantom.hpp"

#include "test_util.hpp"

using namespace voxseg;

namespace {

PhantomSpec base_spec() {
    PhantomSpec s;
    s.center = {32.0, 32.0, 32.0};
    s.radii = {10.0, 12.0, 8.0};
    s.fg_intensity = 200.0;
    s.bg_intensity = 50.0;
    return s;
}

} // namespace

TEST_CASE("noiseless ellipsoid has exactly two intensities and the analytic mask") {
    const Dims d{64, 64, 64};
    const PhantomSpec s = base_spec();
    const auto [vol, mask] = generate_phantom(d, s);

    std::set<double> values(vol.data().begin(), vol.data().end());
    REQUIRE(values == std::set<double>{50.0, 200.0});

    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                const double sx = (x - s.center[0]) / s.radii[0];
                const double sy = (y - s.center[1]) / s.radii[1];
                const double sz = (z - s.center[2]) / s.radii[2];
                const bool inside = sx * sx + sy * sy + sz * sz <= 1.0;
                REQUIRE(static_cast<bool>(mask(x, y, z)) == inside);
                REQUIRE(vol(x, y, z) == (inside ? 200.0 : 50.0));
            }
}

TEST_CASE("ellipsoid voxel count matches continuous volume within 2%") {
    const auto [vol, mask] = generate_phantom(Dims{64, 64, 64}, base_spec());
    const double analytic = 4.0 / 3.0 * 3.14159265358979323846 * 10.0 * 12.0 * 8.0;
    const double counted = static_cast<double>(count_true(mask));
    REQUIRE(std::abs(counted - analytic) / analytic < 0.02);
}

TEST_CASE("phantom generation is bitwise deterministic") {
    PhantomSpec s = base_spec();
    s.center = {16.0, 16.0, 16.0}; // fits the smaller grid used here
    s.radii = {7.0, 8.0, 6.0};
    s.speckle_sigma = 0.2;
    s.additive_sigma = 10.0;
    s.rng_seed = 99;
    const auto [vol1, mask1] = generate_phantom(Dims{32, 32, 32}, s);
    const auto [vol2, mask2] = generate_phantom(Dims{32, 32, 32}, s);
    REQUIRE(vol1.data() == vol2.data());
    REQUIRE(mask1 == mask2);

    PhantomSpec other = s;
    other.rng_seed = 100;
    const auto [vol3, mask3] = generate_phantom(Dims{32, 32, 32}, other);
    REQUIRE(mask3 == mask1);          // mask is analytic, seed-independent
    REQUIRE(vol3.data() != vol1.data());
}

TEST_CASE("noise never alters the mask and stays in range") {
    PhantomSpec s = base_spec();
    const auto [clean_vol, clean_mask] = generate_phantom(Dims{48, 48, 48}, s);
    s.speckle_sigma = 0.3;
    s.additive_sigma = 20.0;
    s.rng_seed = 7;
    const auto [noisy_vol, noisy_mask] = generate_phantom(Dims{48, 48, 48}, s);
    REQUIRE(noisy_mask == clean_mask);
    for (double v : noisy_vol.data()) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 255.0);
    }
}

TEST_CASE("lobe amplitude zero reproduces the ellipsoid exactly") {
    PhantomSpec e = base_spec();
    PhantomSpec l = base_spec();
    l.shape = "lobulated";
    l.lobe_count = 8;
    l.lobe_amplitude = 0.0;
    const auto [ev, em] = generate_phantom(Dims{64, 64, 64}, e);
    const auto [lv, lm] = generate_phantom(Dims{64, 64, 64}, l);
    REQUIRE(em == lm);
    REQUIRE(ev.data() == lv.data());
}

TEST_CASE("lobulated mask follows the modulated-radius inequality") {
    PhantomSpec s = base_spec();
    s.shape = "lobulated";
    s.lobe_count = 6;
    s.lobe_amplitude = 0.25;
    const Dims d{64, 64, 64};
    const auto [vol, mask] = generate_phantom(d, s);
    REQUIRE(count_true(mask) > 0);

    std::int64_t mismatches = 0;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                const double dx = x - s.center[0], dy = y - s.center[1], dz = z - s.center[2];
                const double rho = std::sqrt((dx / s.radii[0]) * (dx / s.radii[0]) +
                                             (dy / s.radii[1]) * (dy / s.radii[1]) +
                                             (dz / s.radii[2]) * (dz / s.radii[2]));
                const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
                bool inside = true;
                if (len > 0.0) {
                    const double theta = std::atan2(dy, dx);
                    const double phi = std::acos(std::clamp(dz / len, -1.0, 1.0));
                    inside = rho <= 1.0 + s.lobe_amplitude * std::sin(s.lobe_count * theta) *
                                              std::sin(s.lobe_count * phi);
                }
                if (static_cast<bool>(mask(x, y, z)) != inside) ++mismatches;
            }
    REQUIRE(mismatches == 0);
}

TEST_CASE("phantom spec validation") {
    SECTION("bad shape") {
        PhantomSpec s = base_spec();
        s.shape = "cube";
        REQUIRE_THROWS_AS(validate_phantom_spec(s), Error);
    }
    SECTION("equal intensities") {
        PhantomSpec s = base_spec();
        s.bg_intensity = s.fg_intensity;
        REQUIRE_THROWS_AS(validate_phantom_spec(s), Error);
    }
    SECTION("non-positive radius") {
        PhantomSpec s = base_spec();
        s.radii[1] = 0.0;
        REQUIRE_THROWS_AS(validate_phantom_spec(s), Error);
    }
    SECTION("amplitude out of range") {
        PhantomSpec s = base_spec();
        s.shape = "lobulated";
        s.lobe_amplitude = 0.6;
        REQUIRE_THROWS_AS(validate_phantom_spec(s), Error);
    }
    SECTION("dims too small") {
        REQUIRE_THROWS_AS(generate_phantom(Dims{15, 64, 64}, base_spec()), Error);
    }
    SECTION("shape exceeding bounds") {
        PhantomSpec s = base_spec();
        s.center = {5.0, 32.0, 32.0}; // radius 10 pokes past x = 0
        REQUIRE_THROWS_AS(generate_phantom(Dims{64, 64, 64}, s), Error);
    }
}

TEST_CASE("phantom spec JSON round-trip and errors") {
    testutil::TempDir tmp;
    const std::string path = tmp.file("spec.json");
    {
        std::ofstream out(path);
        out << R"({
          "shape": "lobulated",
          "center": [32, 31.5, 30],
          "radii": [10, 12, 8],
          "lobe_count": 8,
          "lobe_amplitude": 0.3,
          "fg_intensity": 200,
          "bg_intensity": 60,
          "speckle_sigma": 0.15,
          "additive_sigma": 8,
          "rng_seed": 12345
        })";
    }
    const PhantomSpec s = load_phantom_spec(path);
    REQUIRE(s.shape == "lobulated");
    REQUIRE(s.center == std::array<double, 3>{32.0, 31.5, 30.0});
    REQUIRE(s.radii == std::array<double, 3>{10.0, 12.0, 8.0});
    REQUIRE(s.lobe_count == 8);
    REQUIRE(s.lobe_amplitude == 0.3);
    REQUIRE(s.fg_intensity == 200.0);
    REQUIRE(s.bg_intensity == 60.0);
    REQUIRE(s.speckle_sigma == 0.15);
    REQUIRE(s.additive_sigma == 8.0);
    REQUIRE(s.rng_seed == 12345);

    SECTION("unknown field rejected") {
        nlohmann::json j = {{"shape", "ellipsoid"},     {"center", {32, 32, 32}},
                            {"radii", {10, 10, 10}},    {"fg_intensity", 200},
                            {"bg_intensity", 50},       {"fg_intesity", 1}};
        REQUIRE_THROWS_WITH(parse_phantom_spec(j),
                            Catch::Matchers::ContainsSubstring("unknown phantom spec field"));
    }
    SECTION("noise fields default to zero") {
        nlohmann::json j = {{"shape", "ellipsoid"},
                            {"center", {32, 32, 32}},
                            {"radii", {10, 10, 10}},
                            {"fg_intensity", 200},
                            {"bg_intensity", 50}};
        const PhantomSpec p = parse_phantom_spec(j);
        REQUIRE(p.speckle_sigma == 0.0);
        REQUIRE(p.additive_sigma == 0.0);
        REQUIRE(p.rng_seed == 0);
    }
    SECTION("malformed center") {
        nlohmann::json j = {{"shape", "ellipsoid"},
                            {"center", {32, 32}},
                            {"radii", {10, 10, 10}},
                            {"fg_intensity", 200},
                            {"bg_intensity", 50}};
        REQUIRE_THROWS_AS(parse_phantom_spec(j), Error);
    }
}
