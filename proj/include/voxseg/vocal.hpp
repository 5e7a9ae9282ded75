// Rotational-contour comparator: extract planar contours from a mask on six
// half-turn planes (0..150 degrees about a z-parallel axis) and rebuild a
// volume from them by angular interpolation of the radius profiles.
//
// Plane coordinates are (a, r): a is the axis coordinate (z, in voxels) and
// r the signed radial offset from the axis (positive toward the plane's
// angle, negative toward angle+180). Contour polygons come from marching
// squares over a dense sampling of the mask on the plane (bilinear in-plane
// interpolation at integer z, iso level 0.5), so vertices are ordered, the
// loop is closed and simple, and both sides of the axis appear in one
// polygon.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "voxseg/core.hpp"

namespace voxseg {

struct PlanarContour {
    double angle = 0.0;                        // degrees
    std::vector<std::array<double, 2>> points; // (a, r) vertices, closed loop
};

inline void validate_contour(const PlanarContour& c) {
    if (!std::isfinite(c.angle)) fail("contour", "contour angle must be finite");
    if (c.points.size() < 3) fail("contour", "contour polygon needs >= 3 vertices");
    for (const auto& p : c.points)
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
            fail("contour", "contour vertices must be finite");
}

inline nlohmann::ordered_json contour_to_json(const PlanarContour& c) {
    nlohmann::ordered_json j;
    j["angle"] = c.angle;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : c.points) pts.push_back({p[0], p[1]});
    j["points"] = std::move(pts);
    return j;
}

inline PlanarContour contour_from_json(const nlohmann::json& j) {
    PlanarContour c;
    try {
        c.angle = j.at("angle").get<double>();
        for (const auto& p : j.at("points")) {
            if (!p.is_array() || p.size() != 2)
                fail("format", "contour points must be [a, r] pairs");
            c.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        fail("format", std::string("malformed contour JSON: ") + e.what());
    }
    validate_contour(c);
    return c;
}

inline void save_contour(const PlanarContour& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("io", "cannot open " + path + " for writing");
    out << contour_to_json(c).dump(2) << '\n';
    if (!out) fail("io", "write failed for " + path);
}

inline PlanarContour load_contour(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail("format", "malformed contour JSON " + path + ": " + e.what());
    }
    return contour_from_json(j);
}

/// In-plane centroid of the true voxels; the default rotation axis point.
inline std::array<double, 2> mask_centroid_xy(const BinaryMask& mask) {
    const Dims d = mask.dims();
    double sx = 0.0, sy = 0.0;
    std::int64_t n = 0;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x)
                if (mask(x, y, z)) {
                    sx += x;
                    sy += y;
                    ++n;
                }
    if (n == 0) fail("contour", "mask is empty, no centroid");
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

namespace detail {

/// Bilinear read of the mask in the xy plane at integer z; everything outside
/// the voxel-center lattice contributes 0.
inline double sample_mask(const BinaryMask& mask, double x, double y, int z) {
    const Dims d = mask.dims();
    if (z < 0 || z >= d.nz) return 0.0;
    const int fx = static_cast<int>(std::floor(x));
    const int fy = static_cast<int>(std::floor(y));
    const double wx = x - fx, wy = y - fy;
    double acc = 0.0;
    for (int j = 0; j <= 1; ++j)
        for (int i = 0; i <= 1; ++i) {
            const int sx = fx + i, sy = fy + j;
            if (sx < 0 || sx >= d.nx || sy < 0 || sy >= d.ny) continue;
            const double w = (i ? wx : 1.0 - wx) * (j ? wy : 1.0 - wy);
            if (mask(sx, sy, z)) acc += w;
        }
    return acc;
}

struct PlaneGrid {
    int nr = 0;        // radial sample count
    int nrows = 0;     // z rows, z = row - 1 (one padding row below and above)
    double r0 = 0.0;   // radial coordinate of sample j = 0
    double dr = 0.25;  // radial step
    std::vector<double> f; // nrows * nr samples, row-major

    double r_of(int j) const { return r0 + j * dr; }
    int z_of(int row) const { return row - 1; }
    double at(int j, int row) const { return f[static_cast<std::size_t>(row) * nr + j]; }
};

inline PlaneGrid sample_plane(const BinaryMask& mask, std::array<double, 2> axis_point,
                              double angle_deg, double dr) {
    const Dims d = mask.dims();
    const double th = angle_deg * 3.14159265358979323846 / 180.0;
    const double cx = std::cos(th), sy = std::sin(th);

    double dmax = 0.0;
    for (int corner = 0; corner < 4; ++corner) {
        const double px = (corner & 1) ? d.nx - 1.0 : 0.0;
        const double py = (corner & 2) ? d.ny - 1.0 : 0.0;
        dmax = std::max(dmax, std::hypot(px - axis_point[0], py - axis_point[1]));
    }
    const double rext = dmax + 2.0; // padding so border samples are empty
    const int half = static_cast<int>(std::ceil(rext / dr));

    PlaneGrid g;
    g.dr = dr;
    g.nr = 2 * half + 1;
    g.r0 = -half * dr;
    g.nrows = d.nz + 2;
    g.f.assign(static_cast<std::size_t>(g.nrows) * g.nr, 0.0);
    for (int row = 1; row + 1 < g.nrows; ++row) {
        const int z = g.z_of(row);
        for (int j = 0; j < g.nr; ++j) {
            const double r = g.r_of(j);
            g.f[static_cast<std::size_t>(row) * g.nr + j] =
                sample_mask(mask, axis_point[0] + r * cx, axis_point[1] + r * sy, z);
        }
    }
    return g;
}

/// 4-connected component labels over {f >= 0.5}; 0 = background.
inline std::vector<int> label_plane(const PlaneGrid& g, int& n_labels) {
    const std::size_t n = g.f.size();
    std::vector<int> label(n, 0);
    n_labels = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (g.f[start] < 0.5 || label[start] != 0) continue;
        ++n_labels;
        label[start] = n_labels;
        stack.assign(1, start);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const int j = static_cast<int>(i % g.nr);
            const int row = static_cast<int>(i / g.nr);
            const int nbr[4][2] = {{j - 1, row}, {j + 1, row}, {j, row - 1}, {j, row + 1}};
            for (const auto& nb : nbr) {
                if (nb[0] < 0 || nb[0] >= g.nr || nb[1] < 0 || nb[1] >= g.nrows) continue;
                const std::size_t k = static_cast<std::size_t>(nb[1]) * g.nr + nb[0];
                if (g.f[k] >= 0.5 && label[k] == 0) {
                    label[k] = n_labels;
                    stack.push_back(k);
                }
            }
        }
    }
    return label;
}

/// Marching squares at iso 0.5 over the plane grid; returns closed loops of
/// (a, r) vertices. Saddle cells are disambiguated by the cell-center
/// average. The grid border must be below iso (guaranteed by sample_plane's
/// padding), so every chain closes.
inline std::vector<std::vector<std::array<double, 2>>> marching_squares(const PlaneGrid& g) {
    const int nr = g.nr, nrows = g.nrows;
    const std::int64_t n_edges = static_cast<std::int64_t>(nr) * nrows * 2;
    // Edge ids: horizontal (j,row)-(j+1,row) -> 2*(row*nr+j); vertical
    // (j,row)-(j,row+1) -> 2*(row*nr+j)+1.
    auto h_edge = [&](int j, int row) { return 2 * (static_cast<std::int64_t>(row) * nr + j); };
    auto v_edge = [&](int j, int row) {
        return 2 * (static_cast<std::int64_t>(row) * nr + j) + 1;
    };

    std::vector<std::array<double, 2>> coords(static_cast<std::size_t>(n_edges),
                                              {0.0, 0.0});
    std::vector<std::uint8_t> has_coord(static_cast<std::size_t>(n_edges), 0);
    auto crossing = [&](std::int64_t id, int j0, int row0, int j1, int row1) {
        if (has_coord[static_cast<std::size_t>(id)]) return;
        const double a = g.at(j0, row0), b = g.at(j1, row1);
        const double t = (0.5 - a) / (b - a); // endpoints straddle iso, b != a
        const double ra = g.r_of(j0), rb = g.r_of(j1);
        const double za = g.z_of(row0), zb = g.z_of(row1);
        coords[static_cast<std::size_t>(id)] = {za + t * (zb - za), ra + t * (rb - ra)};
        has_coord[static_cast<std::size_t>(id)] = 1;
    };

    std::vector<std::pair<std::int64_t, std::int64_t>> segments;
    for (int row = 0; row + 1 < nrows; ++row)
        for (int j = 0; j + 1 < nr; ++j) {
            const bool b00 = g.at(j, row) >= 0.5;
            const bool b10 = g.at(j + 1, row) >= 0.5;
            const bool b01 = g.at(j, row + 1) >= 0.5;
            const bool b11 = g.at(j + 1, row + 1) >= 0.5;
            const int code = (b00 ? 1 : 0) | (b10 ? 2 : 0) | (b01 ? 4 : 0) | (b11 ? 8 : 0);
            if (code == 0 || code == 15) continue;

            const std::int64_t B = h_edge(j, row);      // bottom: (j,row)-(j+1,row)
            const std::int64_t T = h_edge(j, row + 1);  // top
            const std::int64_t L = v_edge(j, row);      // left: (j,row)-(j,row+1)
            const std::int64_t R = v_edge(j + 1, row);  // right

            auto emit = [&](std::int64_t e1, std::int64_t e2) {
                segments.emplace_back(e1, e2);
            };
            switch (code) {
                case 1: case 14: crossing(B, j, row, j + 1, row); crossing(L, j, row, j, row + 1); emit(B, L); break;
                case 2: case 13: crossing(B, j, row, j + 1, row); crossing(R, j + 1, row, j + 1, row + 1); emit(B, R); break;
                case 4: case 11: crossing(T, j, row + 1, j + 1, row + 1); crossing(L, j, row, j, row + 1); emit(T, L); break;
                case 8: case 7: crossing(T, j, row + 1, j + 1, row + 1); crossing(R, j + 1, row, j + 1, row + 1); emit(T, R); break;
                case 3: case 12: crossing(L, j, row, j, row + 1); crossing(R, j + 1, row, j + 1, row + 1); emit(L, R); break;
                case 5: case 10: crossing(B, j, row, j + 1, row); crossing(T, j, row + 1, j + 1, row + 1); emit(B, T); break;
                case 6: case 9: {
                    // Saddle: opposite corners share a state; the center mean
                    // decides which pairs of crossings connect.
                    crossing(B, j, row, j + 1, row);
                    crossing(T, j, row + 1, j + 1, row + 1);
                    crossing(L, j, row, j, row + 1);
                    crossing(R, j + 1, row, j + 1, row + 1);
                    const double center = 0.25 * (g.at(j, row) + g.at(j + 1, row) +
                                                  g.at(j, row + 1) + g.at(j + 1, row + 1));
                    const bool center_in = center >= 0.5;
                    const bool diag00 = code == 9; // b00 and b11 inside
                    if (diag00 == center_in) {
                        emit(B, R);
                        emit(T, L);
                    } else {
                        emit(B, L);
                        emit(T, R);
                    }
                    break;
                }
                default: break;
            }
        }

    // Stitch segments into loops: every crossing edge is shared by exactly
    // two segments (interior grid, empty border), so the graph is a disjoint
    // union of cycles.
    std::vector<std::array<std::int32_t, 2>> edge_segs(static_cast<std::size_t>(n_edges),
                                                       {-1, -1});
    for (std::size_t s = 0; s < segments.size(); ++s) {
        for (const std::int64_t e : {segments[s].first, segments[s].second}) {
            auto& slot = edge_segs[static_cast<std::size_t>(e)];
            if (slot[0] < 0)
                slot[0] = static_cast<std::int32_t>(s);
            else
                slot[1] = static_cast<std::int32_t>(s);
        }
    }

    std::vector<std::vector<std::array<double, 2>>> loops;
    std::vector<std::uint8_t> used(segments.size(), 0);
    for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
        if (used[s0]) continue;
        std::vector<std::array<double, 2>> loop;
        std::size_t s = s0;
        std::int64_t edge = segments[s0].first;
        while (!used[s]) {
            used[s] = 1;
            loop.push_back(coords[static_cast<std::size_t>(edge)]);
            edge = segments[s].first == edge ? segments[s].second : segments[s].first;
            const auto& slot = edge_segs[static_cast<std::size_t>(edge)];
            const std::size_t next =
                static_cast<std::size_t>(slot[0] == static_cast<std::int32_t>(s) ? slot[1]
                                                                                 : slot[0]);
            s = next;
        }
        // Drop consecutive duplicates (crossings landing exactly on corners).
        std::vector<std::array<double, 2>> clean;
        for (const auto& p : loop) {
            if (!clean.empty() && std::abs(clean.back()[0] - p[0]) < 1e-12 &&
                std::abs(clean.back()[1] - p[1]) < 1e-12)
                continue;
            clean.push_back(p);
        }
        while (clean.size() > 1 && std::abs(clean.front()[0] - clean.back()[0]) < 1e-12 &&
               std::abs(clean.front()[1] - clean.back()[1]) < 1e-12)
            clean.pop_back();
        if (clean.size() >= 3) loops.push_back(std::move(clean));
    }
    return loops;
}

inline double polygon_area_abs(const std::vector<std::array<double, 2>>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return std::abs(0.5 * s);
}

} // namespace detail

/// Extracts the planar contour of the mask on the half-turn plane at the
/// given angle. The in-plane region nearest the axis wins (ties broken by
/// size); its outer marching-squares loop becomes the polygon.
inline PlanarContour slice_at_angle(const BinaryMask& mask, std::array<double, 2> axis_point,
                                    double angle_deg, double dr = 0.25) {
    if (!std::isfinite(angle_deg)) fail("args", "angle must be finite");
    if (!(dr > 0.0 && dr <= 1.0)) fail("args", "radial step must lie in (0, 1]");
    detail::PlaneGrid g = detail::sample_plane(mask, axis_point, angle_deg, dr);

    int n_labels = 0;
    const std::vector<int> label = detail::label_plane(g, n_labels);
    if (n_labels == 0)
        fail("contour", "plane at angle " + std::to_string(angle_deg) +
                            " does not intersect the mask");

    // Pick the component nearest the axis; larger one on ties.
    std::vector<double> min_r(static_cast<std::size_t>(n_labels) + 1, 1e300);
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(n_labels) + 1, 0);
    for (int row = 0; row < g.nrows; ++row)
        for (int j = 0; j < g.nr; ++j) {
            const int l = label[static_cast<std::size_t>(row) * g.nr + j];
            if (l == 0) continue;
            min_r[l] = std::min(min_r[l], std::abs(g.r_of(j)));
            ++sizes[l];
        }
    int chosen = 1;
    for (int l = 2; l <= n_labels; ++l) {
        if (min_r[l] < min_r[chosen] ||
            (min_r[l] == min_r[chosen] && sizes[l] > sizes[chosen]))
            chosen = l;
    }

    // Suppress other components so marching squares traces only the chosen one.
    for (std::size_t i = 0; i < g.f.size(); ++i)
        if (label[i] != 0 && label[i] != chosen) g.f[i] = 0.0;

    auto loops = detail::marching_squares(g);
    if (loops.empty()) fail("contour", "degenerate contour (no closed boundary)");
    std::size_t best = 0;
    double best_area = -1.0;
    for (std::size_t i = 0; i < loops.size(); ++i) {
        const double a = detail::polygon_area_abs(loops[i]);
        if (a > best_area) {
            best_area = a;
            best = i;
        }
    }

    PlanarContour c;
    c.angle = angle_deg;
    c.points = std::move(loops[best]);
    validate_contour(c);
    return c;
}

enum class ScanPolicy { Strict, Outermost };

struct VocalResult {
    BinaryMask mask;
    // Per input contour: number of (z, side) radial rays whose boundary was
    // crossed more than once (always 0 under ScanPolicy::Strict).
    std::vector<std::int64_t> violations;
};

namespace detail {

/// All crossings of the polygon with the horizontal line a = z, split by
/// side. Near-duplicates (|dr| < 1e-9, e.g. a vertex exactly on the line
/// counted by both incident edges) collapse to one.
inline void line_crossings(const std::vector<std::array<double, 2>>& poly, double z,
                           std::vector<double>& pos, std::vector<double>& neg) {
    pos.clear();
    neg.clear();
    std::vector<double> all;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % n];
        if ((p[0] <= z) == (q[0] <= z)) continue; // half-open: no double count
        const double t = (z - p[0]) / (q[0] - p[0]);
        all.push_back(p[1] + t * (q[1] - p[1]));
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (i > 0 && all[i] - all[i - 1] < 1e-9) continue;
        (all[i] >= 0.0 ? pos : neg).push_back(all[i]);
    }
}

} // namespace detail

/// Rebuilds a mask from six contours at 30-degree steps. Each contour feeds
/// two half-planes (its positive side at `angle`, negative side at
/// angle+180); a voxel's boundary radius is the linear angular interpolation
/// of the two bracketing half-plane radius profiles at the voxel's z, and
/// the voxel is inside iff its axis distance is strictly below that radius.
/// Rays crossing a polygon more than once violate the star-shape
/// precondition: Strict fails, Outermost keeps the outermost crossing and
/// counts the violation per contour.
inline VocalResult vocal_reconstruct(const std::vector<PlanarContour>& contours, Dims dims,
                                     std::array<double, 2> axis_point,
                                     ScanPolicy policy = ScanPolicy::Strict) {
    validate_dims(dims);
    if (contours.size() != 6)
        fail("args", "vocal_reconstruct needs exactly 6 contours, got " +
                         std::to_string(contours.size()));

    // Map each contour to its positive-side half-plane index (angle/30 mod 12).
    std::vector<int> half_index(6, -1);
    std::array<bool, 6> class_seen{};
    for (std::size_t i = 0; i < 6; ++i) {
        validate_contour(contours[i]);
        double a = std::fmod(contours[i].angle, 360.0);
        if (a < 0.0) a += 360.0;
        const double steps = a / 30.0;
        const int m = static_cast<int>(std::lround(steps));
        if (std::abs(steps - m) > 1e-6 || m % 12 != m)
            fail("args", "contour angle " + std::to_string(contours[i].angle) +
                             " is not a multiple of 30 degrees below 360");
        half_index[i] = m % 12;
        const int cls = m % 6;
        if (class_seen[static_cast<std::size_t>(cls)])
            fail("args", "duplicate contour angle class " + std::to_string(cls * 30) +
                             " degrees");
        class_seen[static_cast<std::size_t>(cls)] = true;
    }

    // Radius tables for the 12 half-planes at every z.
    std::vector<std::vector<double>> radius(12,
                                            std::vector<double>(static_cast<std::size_t>(dims.nz),
                                                                0.0));
    VocalResult result{BinaryMask(dims), std::vector<std::int64_t>(6, 0)};
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < 6; ++i) {
        const int mp = half_index[i];
        const int mn = (mp + 6) % 12;
        for (int z = 0; z < dims.nz; ++z) {
            detail::line_crossings(contours[i].points, static_cast<double>(z), pos, neg);
            for (int side = 0; side < 2; ++side) {
                const std::vector<double>& c = side == 0 ? pos : neg;
                const int m = side == 0 ? mp : mn;
                double r = 0.0;
                if (c.size() == 1) {
                    r = std::abs(c[0]);
                } else if (c.size() > 1) {
                    if (policy == ScanPolicy::Strict)
                        fail("contour",
                             "non-star polygon at angle " + std::to_string(contours[i].angle) +
                                 " (z=" + std::to_string(z) + ", side " +
                                 (side == 0 ? "+" : "-") + "): " + std::to_string(c.size()) +
                                 " crossings");
                    ++result.violations[i];
                    r = std::max(std::abs(c.front()), std::abs(c.back()));
                }
                radius[static_cast<std::size_t>(m)][static_cast<std::size_t>(z)] = r;
            }
        }
    }

    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x) {
                const double dx = x - axis_point[0];
                const double dy = y - axis_point[1];
                const double rho = std::hypot(dx, dy);
                double deg = std::atan2(dy, dx) * (180.0 / 3.14159265358979323846);
                if (deg < 0.0) deg += 360.0;
                const double posn = deg / 30.0;
                int m0 = static_cast<int>(posn);
                if (m0 >= 12) m0 = 11; // guard against rounding at 360
                const double t = posn - m0;
                const int m1 = (m0 + 1) % 12;
                const double rz =
                    (1.0 - t) * radius[static_cast<std::size_t>(m0)][static_cast<std::size_t>(z)] +
                    t * radius[static_cast<std::size_t>(m1)][static_cast<std::size_t>(z)];
                result.mask(x, y, z) = rho < rz ? 1 : 0;
            }
    return result;
}

/// The canonical six slicing angles.
inline std::array<double, 6> vocal_angles() {
    return {0.0, 30.0, 60.0, 90.0, 120.0, 150.0};
}

} // namespace voxseg
