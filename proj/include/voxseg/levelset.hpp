// 3D two-phase active-contour refinement (region-based level set).
//
// Sign convention: phi < 0 inside the contour, phi >= 0 outside. c1 is the
// mean intensity over {phi >= 0} (outside), c2 over {phi < 0} (inside). The
// per-voxel update is
//
//   phi += dt * dirac_eps(phi) * [ mu*kappa - l1*(u-c1)^2 + l2*(u-c2)^2 + nu ]
//
// which drives voxels whose intensity is nearer c2 toward phi < 0 and voxels
// nearer c1 toward phi >= 0; positive nu shrinks the inside region (it
// penalizes inside volume in the energy below). dirac_eps has global support,
// so the whole field moves, and phi is periodically rebuilt as a signed
// distance field to keep its slope sane.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "voxseg/core.hpp"
#include "voxseg/parallel.hpp"
#include "voxseg/sdf.hpp"

namespace voxseg {

struct ChanVeseParams {
    double mu = 0.2;       // length penalty
    double nu = 0.0;       // inside-volume penalty
    double lambda1 = 1.0;  // outside fit weight
    double lambda2 = 1.0;  // inside fit weight
    double dt = 0.5;
    double epsilon = 1.5;  // Dirac width, voxels
    int max_iters = 500;
    int redistance_every = 20; // 0 disables redistancing
    double stop_tol = 5e-4;    // stop when sign-flip fraction drops below this

    void validate() const {
        if (!(mu >= 0.0)) fail("args", "mu must be >= 0");
        if (!std::isfinite(nu)) fail("args", "nu must be finite");
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) fail("args", "lambda1/lambda2 must be > 0");
        if (!(dt >= 0.0)) fail("args", "dt must be >= 0");
        if (!(epsilon > 0.0)) fail("args", "epsilon must be > 0");
        if (max_iters < 0) fail("args", "max_iters must be >= 0");
        if (redistance_every < 0) fail("args", "redistance_every must be >= 0");
        if (!(stop_tol >= 0.0)) fail("args", "stop_tol must be >= 0");
    }
};

struct CvState {
    LevelSetField phi;
    double c1 = 0.0;       // mean over {phi >= 0}
    double c2 = 0.0;       // mean over {phi < 0}
    int iter = 0;
    double last_change = 0.0; // fraction of voxels whose sign flipped last step
};

enum class CvStatus { Converged, MaxIters, PhaseCollapse };

struct CvTraceRow {
    int iter = 0;
    double c1 = 0.0;
    double c2 = 0.0;
    double last_change = 0.0;
    double energy = 0.0;
};

struct CvTrace {
    std::vector<CvTraceRow> rows;
    CvStatus status = CvStatus::MaxIters;
    int collapse_iter = -1; // iteration at which a phase emptied, if any

    std::string csv() const {
        std::ostringstream os;
        os << std::setprecision(17);
        os << "iter,c1,c2,last_change,energy\n";
        for (const auto& r : rows)
            os << r.iter << ',' << r.c1 << ',' << r.c2 << ',' << r.last_change << ','
               << r.energy << '\n';
        return os.str();
    }
};

inline double dirac_eps(double phi, double epsilon) {
    return epsilon / (3.14159265358979323846 * (epsilon * epsilon + phi * phi));
}

namespace detail {

struct MeansAcc {
    double sum1 = 0.0, sum2 = 0.0;
    std::int64_t n1 = 0, n2 = 0;

    MeansAcc& operator+=(const MeansAcc& o) {
        sum1 += o.sum1;
        sum2 += o.sum2;
        n1 += o.n1;
        n2 += o.n2;
        return *this;
    }
};

inline MeansAcc accumulate_means(const VoxelVolume& vol, const LevelSetField& phi,
                                 int threads) {
    return block_reduce<MeansAcc>(vol.size(), threads, [&](std::int64_t b, std::int64_t e) {
        MeansAcc a;
        for (std::int64_t i = b; i < e; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            if (phi[idx] >= 0.0) {
                a.sum1 += vol[idx];
                ++a.n1;
            } else {
                a.sum2 += vol[idx];
                ++a.n2;
            }
        }
        return a;
    });
}

} // namespace detail

/// Sharp region means: c1 over {phi >= 0}, c2 over {phi < 0}. Both regions
/// must be non-empty.
inline std::pair<double, double> region_means(const VoxelVolume& vol, const LevelSetField& phi,
                                              int threads = 1) {
    require_same_dims(vol.dims(), phi.dims(), "region_means");
    const auto a = detail::accumulate_means(vol, phi, threads);
    if (a.n1 == 0 || a.n2 == 0)
        fail("collapse", std::string("phase collapse: region {phi ") +
                             (a.n1 == 0 ? ">= 0}" : "< 0}") + " is empty");
    return {a.sum1 / a.n1, a.sum2 / a.n2};
}

/// Mean curvature div(grad(phi)/|grad(phi)|) by first/second central
/// differences, replicate boundary, denominator regularized by eta = 1e-8
/// inside the square root, clamped to [-1, 1] (unit voxel pitch).
inline LevelSetField curvature_field(const LevelSetField& phi, int threads = 1) {
    const Dims d = phi.dims();
    LevelSetField kappa(d);

    parallel_for(d.nz, threads, [&](std::int64_t z0, std::int64_t z1) {
        auto at = [&](int x, int y, int z) {
            return phi(std::clamp(x, 0, d.nx - 1), std::clamp(y, 0, d.ny - 1),
                       std::clamp(z, 0, d.nz - 1));
        };
        for (int z = static_cast<int>(z0); z < static_cast<int>(z1); ++z)
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) {
                    const double c = at(x, y, z);
                    const double gx = 0.5 * (at(x + 1, y, z) - at(x - 1, y, z));
                    const double gy = 0.5 * (at(x, y + 1, z) - at(x, y - 1, z));
                    const double gz = 0.5 * (at(x, y, z + 1) - at(x, y, z - 1));
                    const double xx = at(x + 1, y, z) - 2.0 * c + at(x - 1, y, z);
                    const double yy = at(x, y + 1, z) - 2.0 * c + at(x, y - 1, z);
                    const double zz = at(x, y, z + 1) - 2.0 * c + at(x, y, z - 1);
                    const double xy = 0.25 * (at(x + 1, y + 1, z) - at(x + 1, y - 1, z) -
                                              at(x - 1, y + 1, z) + at(x - 1, y - 1, z));
                    const double xz = 0.25 * (at(x + 1, y, z + 1) - at(x + 1, y, z - 1) -
                                              at(x - 1, y, z + 1) + at(x - 1, y, z - 1));
                    const double yz = 0.25 * (at(x, y + 1, z + 1) - at(x, y + 1, z - 1) -
                                              at(x, y - 1, z + 1) + at(x, y - 1, z - 1));
                    const double g2 = gx * gx + gy * gy + gz * gz;
                    const double num = xx * (gy * gy + gz * gz) + yy * (gx * gx + gz * gz) +
                                       zz * (gx * gx + gy * gy) -
                                       2.0 * (gx * gy * xy + gx * gz * xz + gy * gz * yz);
                    const double den = std::sqrt(g2 + 1e-8);
                    kappa(x, y, z) = std::clamp(num / (den * den * den), -1.0, 1.0);
                }
    });
    return kappa;
}

namespace detail {

struct EnergyAcc {
    double perimeter = 0.0;
    double fit1 = 0.0, fit2 = 0.0;
    std::int64_t inside = 0;

    EnergyAcc& operator+=(const EnergyAcc& o) {
        perimeter += o.perimeter;
        fit1 += o.fit1;
        fit2 += o.fit2;
        inside += o.inside;
        return *this;
    }
};

inline double energy_impl(const VoxelVolume& vol, const LevelSetField& phi,
                          const ChanVeseParams& p, double c1, double c2, int threads) {
    const Dims d = phi.dims();
    const auto acc = block_reduce<EnergyAcc>(
        vol.size(), threads, [&](std::int64_t b, std::int64_t e) {
            EnergyAcc a;
            auto at = [&](int x, int y, int z) {
                return phi(std::clamp(x, 0, d.nx - 1), std::clamp(y, 0, d.ny - 1),
                           std::clamp(z, 0, d.nz - 1));
            };
            for (std::int64_t i = b; i < e; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                const int x = static_cast<int>(i % d.nx);
                const int y = static_cast<int>((i / d.nx) % d.ny);
                const int z = static_cast<int>(i / (static_cast<std::int64_t>(d.nx) * d.ny));
                const double gx = 0.5 * (at(x + 1, y, z) - at(x - 1, y, z));
                const double gy = 0.5 * (at(x, y + 1, z) - at(x, y - 1, z));
                const double gz = 0.5 * (at(x, y, z + 1) - at(x, y, z - 1));
                const double gnorm = std::sqrt(gx * gx + gy * gy + gz * gz);
                a.perimeter += dirac_eps(phi[idx], p.epsilon) * gnorm;
                const double u = vol[idx];
                if (phi[idx] >= 0.0) {
                    a.fit1 += (u - c1) * (u - c1);
                } else {
                    a.fit2 += (u - c2) * (u - c2);
                    ++a.inside;
                }
            }
            return a;
        });
    return p.mu * acc.perimeter + p.nu * static_cast<double>(acc.inside) +
           p.lambda1 * acc.fit1 + p.lambda2 * acc.fit2;
}

} // namespace detail

/// Monitoring functional: mu * sum(dirac_eps(phi)*|grad phi|)
///   + nu * |{phi < 0}| + lambda1 * sum_{phi>=0}(u-c1)^2
///   + lambda2 * sum_{phi<0}(u-c2)^2, with c1/c2 the sharp region means of
/// this phi (an empty region contributes nothing).
inline double cv_energy(const VoxelVolume& vol, const LevelSetField& phi,
                        const ChanVeseParams& params, int threads = 1) {
    require_same_dims(vol.dims(), phi.dims(), "cv_energy");
    const auto a = detail::accumulate_means(vol, phi, threads);
    const double c1 = a.n1 > 0 ? a.sum1 / a.n1 : 0.0;
    const double c2 = a.n2 > 0 ? a.sum2 / a.n2 : 0.0;
    return detail::energy_impl(vol, phi, params, c1, c2, threads);
}

/// One explicit Euler step. Region means are recomputed from the incoming
/// field before the update; the returned state carries the means of the
/// updated field (so its invariant holds) plus the sign-flip fraction.
/// Throws Error("collapse", ...) when either phase is empty on entry or
/// becomes empty after the update.
inline CvState cv_step(const VoxelVolume& vol, const CvState& state,
                       const ChanVeseParams& params, int threads = 1) {
    params.validate();
    require_same_dims(vol.dims(), state.phi.dims(), "cv_step");
    const auto [c1, c2] = region_means(vol, state.phi, threads);

    const Dims d = state.phi.dims();
    CvState next;
    next.phi = LevelSetField(d);
    next.iter = state.iter + 1;

    const bool need_curvature = params.mu != 0.0;
    LevelSetField kappa;
    if (need_curvature) kappa = curvature_field(state.phi, threads);

    struct FlipCount {
        std::int64_t flips = 0;
        FlipCount& operator+=(const FlipCount& o) {
            flips += o.flips;
            return *this;
        }
    };
    const auto flips = block_reduce<FlipCount>(
        vol.size(), threads, [&](std::int64_t b, std::int64_t e) {
            FlipCount fc;
            for (std::int64_t i = b; i < e; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                const double phi_old = state.phi[idx];
                const double u = vol[idx];
                const double fit = -params.lambda1 * (u - c1) * (u - c1) +
                                   params.lambda2 * (u - c2) * (u - c2);
                const double force = (need_curvature ? params.mu * kappa[idx] : 0.0) + fit +
                                     params.nu;
                const double phi_new =
                    phi_old + params.dt * dirac_eps(phi_old, params.epsilon) * force;
                next.phi[idx] = phi_new;
                if ((phi_new < 0.0) != (phi_old < 0.0)) ++fc.flips;
            }
            return fc;
        });
    next.last_change = static_cast<double>(flips.flips) / static_cast<double>(vol.size());

    const auto [nc1, nc2] = region_means(vol, next.phi, threads);
    next.c1 = nc1;
    next.c2 = nc2;
    return next;
}

/// Optional instrumentation for cv_run.
struct CvObserver {
    std::function<void(const CvState&)> on_step;
    std::function<void(const LevelSetField& before, const LevelSetField& after)> on_redistance;
};

/// Full evolution: phi0 = mask_to_sdf(initial); repeat cv_step until the
/// sign-flip fraction drops below stop_tol or max_iters is reached,
/// rebuilding phi as a signed distance field every redistance_every
/// iterations (which never changes the mask {phi < 0}). Trace row 0 records
/// the initial state; row k the state after step k, with the energy taken
/// before any redistancing at that iteration. Phase collapse ends the run
/// with status PhaseCollapse and the iteration recorded in collapse_iter.
inline std::pair<BinaryMask, CvTrace> cv_run(const VoxelVolume& vol, const BinaryMask& initial,
                                             const ChanVeseParams& params, int threads = 1,
                                             const CvObserver* observer = nullptr) {
    params.validate();
    require_same_dims(vol.dims(), initial.dims(), "cv_run");
    const std::int64_t n_true = count_true(initial);
    if (n_true == 0 || n_true == initial.dims().total())
        fail("collapse", "initial mask must contain both phases");

    CvState state;
    state.phi = mask_to_sdf(initial);
    {
        const auto [c1, c2] = region_means(vol, state.phi, threads);
        state.c1 = c1;
        state.c2 = c2;
    }

    CvTrace trace;
    trace.rows.push_back({0, state.c1, state.c2, 0.0,
                          detail::energy_impl(vol, state.phi, params, state.c1, state.c2,
                                              threads)});

    if (params.max_iters == 0) {
        trace.status = CvStatus::MaxIters;
        return {initial, trace};
    }

    for (int k = 1; k <= params.max_iters; ++k) {
        CvState next;
        try {
            next = cv_step(vol, state, params, threads);
        } catch (const Error& e) {
            if (e.code() != "collapse") throw;
            trace.status = CvStatus::PhaseCollapse;
            trace.collapse_iter = k;
            return {mask_from_phi(state.phi), trace};
        }
        state = std::move(next);
        if (observer && observer->on_step) observer->on_step(state);
        trace.rows.push_back({state.iter, state.c1, state.c2, state.last_change,
                              detail::energy_impl(vol, state.phi, params, state.c1, state.c2,
                                                  threads)});
        if (state.last_change < params.stop_tol) {
            trace.status = CvStatus::Converged;
            return {mask_from_phi(state.phi), trace};
        }
        if (params.redistance_every > 0 && k % params.redistance_every == 0) {
            LevelSetField fresh = mask_to_sdf(mask_from_phi(state.phi));
            if (observer && observer->on_redistance)
                observer->on_redistance(state.phi, fresh);
            state.phi = std::move(fresh);
        }
    }
    trace.status = CvStatus::MaxIters;
    return {mask_from_phi(state.phi), trace};
}

} // namespace voxseg
