#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "voxseg/levelset.hpp"
#include "voxseg/metrics.hpp"

#include "oracle.hpp"

using namespace voxseg;

namespace {

// Ellipsoid indicator on an integer lattice.
BinaryMask ellipsoid_mask(Dims d, std::array<double, 3> c, std::array<double, 3> r) {
    BinaryMask m(d);
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                const double u = (x - c[0]) / r[0], v = (y - c[1]) / r[1],
                             w = (z - c[2]) / r[2];
                m(x, y, z) = (u * u + v * v + w * w <= 1.0) ? 1 : 0;
            }
    return m;
}

} // namespace

TEST_CASE("region means are exact on a two-valued volume") {
    const Dims d{8, 8, 8};
    VoxelVolume vol(d, 90.0);
    LevelSetField phi(d, 1.0);
    for (int z = 2; z <= 4; ++z)
        for (int y = 2; y <= 4; ++y)
            for (int x = 2; x <= 4; ++x) {
                vol(x, y, z) = 10.0;
                phi(x, y, z) = -1.0;
            }
    const auto [c1, c2] = region_means(vol, phi);
    REQUIRE(c1 == 90.0);
    REQUIRE(c2 == 10.0);
}

TEST_CASE("region means match a direct sum on random data") {
    Xoshiro256pp rng(31);
    const Dims d{8, 8, 8};
    VoxelVolume vol(d);
    LevelSetField phi(d);
    for (std::size_t i = 0; i < vol.data().size(); ++i) {
        vol[i] = rng.uniform(0.0, 255.0);
        phi[i] = rng.uniform(-2.0, 2.0);
    }
    double s1 = 0, s2 = 0;
    std::int64_t n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < vol.data().size(); ++i) {
        if (phi[i] >= 0.0) {
            s1 += vol[i];
            ++n1;
        } else {
            s2 += vol[i];
            ++n2;
        }
    }
    const auto [c1, c2] = region_means(vol, phi);
    REQUIRE(c1 == Catch::Approx(s1 / n1).epsilon(1e-14));
    REQUIRE(c2 == Catch::Approx(s2 / n2).epsilon(1e-14));
}

TEST_CASE("region means reject a one-phase field") {
    const VoxelVolume vol(Dims{4, 4, 4}, 1.0);
    const LevelSetField all_out(Dims{4, 4, 4}, 1.0);
    const LevelSetField all_in(Dims{4, 4, 4}, -1.0);
    for (const auto* phi : {&all_out, &all_in}) {
        try {
            region_means(vol, *phi);
            FAIL("expected collapse error");
        } catch (const Error& e) {
            REQUIRE(e.code() == "collapse");
        }
    }
}

TEST_CASE("curvature of a spherical distance field is 2/r at the interface") {
    const Dims d{25, 25, 25};
    const double cx = 12.0, R = 8.0;
    LevelSetField phi(d);
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x)
                phi(x, y, z) = std::sqrt((x - cx) * (x - cx) + (y - cx) * (y - cx) +
                                         (z - cx) * (z - cx)) -
                               R;
    const LevelSetField kappa = curvature_field(phi);
    int checked = 0;
    for (int z = 1; z < d.nz - 1; ++z)
        for (int y = 1; y < d.ny - 1; ++y)
            for (int x = 1; x < d.nx - 1; ++x) {
                if (std::abs(phi(x, y, z)) > 0.5) continue;
                const double r = phi(x, y, z) + R;
                const double expected = 2.0 / r;
                REQUIRE(std::abs(kappa(x, y, z) - expected) < 0.15 * expected);
                ++checked;
            }
    REQUIRE(checked > 100);
}

TEST_CASE("curvature of a planar ramp vanishes away from the borders") {
    const Dims d{16, 12, 10};
    LevelSetField phi(d);
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) phi(x, y, z) = x - 5.0;
    const LevelSetField kappa = curvature_field(phi);
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 1; x < d.nx - 1; ++x) REQUIRE(std::abs(kappa(x, y, z)) < 1e-6);
}

TEST_CASE("curvature is clamped to unit magnitude") {
    Xoshiro256pp rng(33);
    LevelSetField phi(Dims{12, 12, 12});
    for (auto& v : phi.data()) v = rng.uniform(-50.0, 50.0);
    const LevelSetField kappa = curvature_field(phi);
    for (double k : kappa.data()) {
        REQUIRE(k <= 1.0);
        REQUIRE(k >= -1.0);
    }
}

TEST_CASE("a constant volume exerts zero fitting force") {
    Xoshiro256pp rng(34);
    const Dims d{8, 8, 8};
    const VoxelVolume vol(d, 42.0);
    CvState state;
    state.phi = LevelSetField(d);
    for (auto& v : state.phi.data()) v = rng.uniform01() < 0.5 ? -1.0 : 1.0;

    ChanVeseParams p;
    p.mu = 0.0;
    p.nu = 0.0;
    const CvState next = cv_step(vol, state, p);
    REQUIRE(next.phi == state.phi); // bitwise: both means equal 42 exactly
    REQUIRE(next.last_change == 0.0);
    REQUIRE(next.c1 == 42.0);
    REQUIRE(next.c2 == 42.0);
    REQUIRE(next.iter == state.iter + 1);
}

TEST_CASE("dt = 0 freezes the field") {
    Xoshiro256pp rng(35);
    const Dims d{8, 8, 8};
    VoxelVolume vol(d);
    CvState state;
    state.phi = LevelSetField(d);
    for (std::size_t i = 0; i < vol.data().size(); ++i) {
        vol[i] = rng.uniform(0.0, 255.0);
        state.phi[i] = rng.uniform01() < 0.5 ? rng.uniform(-3.0, -0.1) : rng.uniform(0.1, 3.0);
    }
    ChanVeseParams p;
    p.dt = 0.0;
    const CvState next = cv_step(vol, state, p);
    REQUIRE(next.phi == state.phi);
    REQUIRE(next.last_change == 0.0);
    REQUIRE(next.iter == 1);
}

TEST_CASE("the update drives each voxel toward the nearer mean") {
    Xoshiro256pp rng(36);
    const Dims d{8, 8, 8};
    VoxelVolume vol(d);
    CvState state;
    state.phi = LevelSetField(d);
    for (std::size_t i = 0; i < vol.data().size(); ++i) {
        vol[i] = rng.uniform01() < 0.5 ? 30.0 : 220.0;
        state.phi[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    }
    ChanVeseParams p;
    p.mu = 0.0;
    p.nu = 0.0;
    const auto [c1, c2] = region_means(vol, state.phi);
    const CvState next = cv_step(vol, state, p);
    for (std::size_t i = 0; i < vol.data().size(); ++i) {
        const double d1 = (vol[i] - c1) * (vol[i] - c1);
        const double d2 = (vol[i] - c2) * (vol[i] - c2);
        if (d2 < d1) REQUIRE(next.phi[i] < state.phi[i]);
        if (d1 < d2) REQUIRE(next.phi[i] > state.phi[i]);
    }
}

TEST_CASE("cv_step is invariant to thread count") {
    Xoshiro256pp rng(37);
    const Dims d{16, 14, 12};
    VoxelVolume vol(d);
    CvState state;
    state.phi = LevelSetField(d);
    for (std::size_t i = 0; i < vol.data().size(); ++i) {
        vol[i] = rng.uniform(0.0, 255.0);
        state.phi[i] = rng.uniform(-3.0, 3.0);
    }
    const ChanVeseParams p; // defaults, curvature active
    const CvState a = cv_step(vol, state, p, 1);
    const CvState b = cv_step(vol, state, p, 4);
    REQUIRE(a.phi == b.phi);
    REQUIRE(std::memcmp(&a.c1, &b.c1, sizeof(double)) == 0);
    REQUIRE(std::memcmp(&a.c2, &b.c2, sizeof(double)) == 0);
}

TEST_CASE("a correct two-phase partition is stationary") {
    const Dims d{16, 16, 16};
    VoxelVolume vol(d, 50.0);
    BinaryMask init(d);
    for (int z = 5; z <= 10; ++z)
        for (int y = 5; y <= 10; ++y)
            for (int x = 5; x <= 10; ++x) {
                vol(x, y, z) = 200.0;
                init(x, y, z) = 1;
            }
    ChanVeseParams p;
    p.mu = 0.0;
    p.nu = 0.0;
    const auto [mask, trace] = cv_run(vol, init, p);
    REQUIRE(trace.status == CvStatus::Converged);
    REQUIRE(mask == init);
    REQUIRE(trace.rows.size() == 2); // initial row plus the single converged step
    REQUIRE(trace.rows.back().last_change == 0.0);
}

TEST_CASE("max_iters = 0 returns the initial mask verbatim") {
    Xoshiro256pp rng(38);
    const Dims d{10, 10, 10};
    VoxelVolume vol(d);
    for (auto& v : vol.data()) v = rng.uniform(0.0, 255.0);
    const BinaryMask init = oracle::random_mask(d, rng, 0.4);
    ChanVeseParams p;
    p.max_iters = 0;
    const auto [mask, trace] = cv_run(vol, init, p);
    REQUIRE(mask == init);
    REQUIRE(trace.status == CvStatus::MaxIters);
    REQUIRE(trace.rows.size() == 1);
    REQUIRE(trace.rows[0].iter == 0);
}

TEST_CASE("redistancing never changes the evolving mask") {
    Xoshiro256pp rng(39);
    const Dims d{16, 16, 16};
    VoxelVolume vol(d, 40.0);
    BinaryMask init(d);
    for (int z = 4; z <= 11; ++z)
        for (int y = 4; y <= 11; ++y)
            for (int x = 4; x <= 11; ++x) vol(x, y, z) = 210.0 + rng.uniform(-5.0, 5.0);
    for (int z = 6; z <= 9; ++z)
        for (int y = 6; y <= 9; ++y)
            for (int x = 6; x <= 9; ++x) init(x, y, z) = 1;

    int redistances = 0;
    CvObserver obs;
    obs.on_redistance = [&](const LevelSetField& before, const LevelSetField& after) {
        ++redistances;
        REQUIRE(mask_from_phi(before) == mask_from_phi(after));
    };
    ChanVeseParams p;
    p.max_iters = 12;
    p.redistance_every = 5;
    p.stop_tol = 0.0; // strict < never fires, so the run exhausts max_iters
    const auto [mask, trace] = cv_run(vol, init, p, 1, &obs);
    REQUIRE(redistances == 2);
    REQUIRE(trace.status == CvStatus::MaxIters);
    REQUIRE(trace.rows.size() == 13);
}

TEST_CASE("an eroded initial contour recovers the noiseless ellipsoid") {
    const Dims d{33, 33, 33};
    const std::array<double, 3> c{16, 16, 16};
    const BinaryMask truth = ellipsoid_mask(d, c, {10, 8, 7});
    VoxelVolume vol(d, 50.0);
    for (std::size_t i = 0; i < vol.data().size(); ++i)
        if (truth[i]) vol[i] = 200.0;
    const BinaryMask init = ellipsoid_mask(d, c, {8, 6, 5});

    ChanVeseParams p;
    p.max_iters = 200;
    const auto [mask, trace] = cv_run(vol, init, p);
    REQUIRE(trace.status == CvStatus::Converged);
    const SimilarityReport rep = similarity(truth, mask);
    REQUIRE(rep.si >= 0.98);
}

TEST_CASE("bimodal data converges to the nearer-mean partition") {
    Xoshiro256pp rng(40);
    const Dims d{12, 12, 12};
    VoxelVolume vol(d);
    BinaryMask init(d);
    for (std::size_t i = 0; i < vol.data().size(); ++i) {
        const bool high = rng.uniform01() < 0.35;
        vol[i] = high ? 220.0 : 30.0;
        // Start from an imperfect mask: right on 85% of voxels.
        const bool correct = rng.uniform01() < 0.85;
        init[i] = (high == correct) ? 1 : 0;
    }
    ChanVeseParams p;
    p.mu = 0.0;
    p.nu = 0.0;
    p.stop_tol = 1e-12;
    p.max_iters = 400;
    const auto [mask, trace] = cv_run(vol, init, p);
    REQUIRE(trace.status == CvStatus::Converged);
    REQUIRE(mask == oracle::nearer_mean_fixpoint(vol, init));
}

TEST_CASE("a runaway volume penalty collapses the inside phase") {
    const Dims d{12, 12, 12};
    VoxelVolume vol(d, 100.0);
    BinaryMask init(d);
    for (int z = 5; z <= 7; ++z)
        for (int y = 5; y <= 7; ++y)
            for (int x = 5; x <= 7; ++x) init(x, y, z) = 1;
    ChanVeseParams p;
    p.mu = 0.0;
    p.nu = 1e6;
    p.stop_tol = 0.0;
    const auto [mask, trace] = cv_run(vol, init, p);
    REQUIRE(trace.status == CvStatus::PhaseCollapse);
    REQUIRE(trace.collapse_iter >= 1);
    REQUIRE(count_true(mask) > 0); // last valid state, not the collapsed one
    REQUIRE(trace.rows.size() == static_cast<std::size_t>(trace.collapse_iter));
}

TEST_CASE("the energy accumulator matches a direct serial evaluation") {
    Xoshiro256pp rng(41);
    const Dims d{9, 8, 7};
    VoxelVolume vol(d);
    LevelSetField phi(d);
    for (std::size_t i = 0; i < vol.data().size(); ++i) {
        vol[i] = rng.uniform(0.0, 255.0);
        phi[i] = rng.uniform(-4.0, 4.0);
    }
    ChanVeseParams p;
    p.mu = 0.3;
    p.nu = 0.7;
    p.lambda1 = 1.2;
    p.lambda2 = 0.8;

    double s1 = 0, s2 = 0;
    std::int64_t n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < vol.data().size(); ++i)
        (phi[i] >= 0.0 ? (s1 += vol[i], ++n1) : (s2 += vol[i], ++n2));
    const double c1 = s1 / n1, c2 = s2 / n2;

    auto at = [&](int x, int y, int z) {
        return phi(std::clamp(x, 0, d.nx - 1), std::clamp(y, 0, d.ny - 1),
                   std::clamp(z, 0, d.nz - 1));
    };
    double expected = 0.0;
    std::int64_t inside = 0;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                const double gx = 0.5 * (at(x + 1, y, z) - at(x - 1, y, z));
                const double gy = 0.5 * (at(x, y + 1, z) - at(x, y - 1, z));
                const double gz = 0.5 * (at(x, y, z + 1) - at(x, y, z - 1));
                const double g = std::sqrt(gx * gx + gy * gy + gz * gz);
                expected += p.mu * dirac_eps(phi(x, y, z), p.epsilon) * g;
                const double u = vol(x, y, z);
                if (phi(x, y, z) >= 0.0)
                    expected += p.lambda1 * (u - c1) * (u - c1);
                else {
                    expected += p.lambda2 * (u - c2) * (u - c2);
                    ++inside;
                }
            }
    expected += p.nu * static_cast<double>(inside);
    REQUIRE(cv_energy(vol, phi, p) == Catch::Approx(expected).epsilon(1e-12));
    REQUIRE(cv_energy(vol, phi, p, 4) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the trace serializes with the pinned header and row shape") {
    const Dims d{16, 16, 16};
    VoxelVolume vol(d, 50.0);
    BinaryMask init(d);
    for (int z = 5; z <= 10; ++z)
        for (int y = 5; y <= 10; ++y)
            for (int x = 5; x <= 10; ++x) {
                vol(x, y, z) = 200.0;
                init(x, y, z) = 1;
            }
    ChanVeseParams p;
    p.max_iters = 3;
    p.stop_tol = 0.0;
    const auto [mask, trace] = cv_run(vol, init, p);
    const std::string csv = trace.csv();
    REQUIRE(csv.rfind("iter,c1,c2,last_change,energy\n", 0) == 0);
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    REQUIRE(lines == trace.rows.size() + 1);
    REQUIRE(csv.find("\n0,") != std::string::npos);
}

TEST_CASE("level-set parameter validation rejects bad values") {
    ChanVeseParams p;
    p.mu = -0.1;
    REQUIRE_THROWS_AS(p.validate(), Error);
    p = {};
    p.lambda1 = 0.0;
    REQUIRE_THROWS_AS(p.validate(), Error);
    p = {};
    p.epsilon = 0.0;
    REQUIRE_THROWS_AS(p.validate(), Error);
    p = {};
    p.stop_tol = -1.0;
    REQUIRE_THROWS_AS(p.validate(), Error);
    p = {};
    p.dt = -0.5;
    REQUIRE_THROWS_AS(p.validate(), Error);
    p = {};
    p.max_iters = -1;
    REQUIRE_THROWS_AS(p.validate(), Error);
}

TEST_CASE("cv_run rejects a degenerate initial mask") {
    const VoxelVolume vol(Dims{8, 8, 8}, 1.0);
    const BinaryMask empty(Dims{8, 8, 8});
    BinaryMask full(Dims{8, 8, 8});
    for (auto& v : full.data()) v = 1;
    REQUIRE_THROWS_AS(cv_run(vol, empty, {}), Error);
    REQUIRE_THROWS_AS(cv_run(vol, full, {}), Error);
}
