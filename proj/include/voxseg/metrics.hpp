// Volumetric contour-similarity measures over exact voxel counts.
#pragma once

#include <cstdint>

#include <json.hpp>

#include "voxseg/core.hpp"

namespace voxseg {

/// si = 2*o/(r+s)   (Dice similarity index)
/// ov = o/(r+s-o)   (Jaccard overlap)
/// of = o/r         (overlap fraction of the reference)
/// ef = (s-o)/r     (extra fraction: segmented excess relative to reference)
/// Counts are kept alongside so the identities stay checkable downstream.
struct SimilarityReport {
    double si = 0.0;
    double of = 0.0;
    double ov = 0.0;
    double ef = 0.0;
    std::int64_t n_ref = 0;
    std::int64_t n_seg = 0;
    std::int64_t n_overlap = 0;
};

inline nlohmann::ordered_json report_to_json(const SimilarityReport& r) {
    nlohmann::ordered_json j;
    j["si"] = r.si;
    j["of"] = r.of;
    j["ov"] = r.ov;
    j["ef"] = r.ef;
    j["n_ref"] = r.n_ref;
    j["n_seg"] = r.n_seg;
    j["n_overlap"] = r.n_overlap;
    return j;
}

inline SimilarityReport similarity(const BinaryMask& ref, const BinaryMask& seg) {
    require_same_dims(ref.dims(), seg.dims(), "similarity");
    SimilarityReport rep;
    const std::size_t n = ref.data().size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool a = ref[i] != 0, b = seg[i] != 0;
        rep.n_ref += a;
        rep.n_seg += b;
        rep.n_overlap += a && b;
    }
    if (rep.n_ref == 0) fail("args", "reference mask is empty (OF/EF undefined)");
    const double r = static_cast<double>(rep.n_ref);
    const double s = static_cast<double>(rep.n_seg);
    const double o = static_cast<double>(rep.n_overlap);
    rep.si = 2.0 * o / (r + s);
    rep.ov = o / (r + s - o);
    rep.of = o / r;
    rep.ef = (s - o) / r;
    return rep;
}

} // namespace voxseg
