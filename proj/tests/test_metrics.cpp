#include <catch_amalgamated.hpp>

#include <cmath>

#include "voxseg/metrics.hpp"

#include "oracle.hpp"

using namespace voxseg;

TEST_CASE("identical masks score perfectly") {
    Xoshiro256pp rng(51);
    const BinaryMask m = oracle::random_mask(Dims{10, 10, 10}, rng, 0.5);
    const SimilarityReport r = similarity(m, m);
    REQUIRE(r.si == 1.0);
    REQUIRE(r.ov == 1.0);
    REQUIRE(r.of == 1.0);
    REQUIRE(r.ef == 0.0);
    REQUIRE(r.n_ref == r.n_seg);
    REQUIRE(r.n_ref == r.n_overlap);
}

TEST_CASE("a half-shifted block scores the textbook values") {
    // 2x2x2 reference, segmentation shifted by one voxel along x:
    // r = s = 8, o = 4.
    BinaryMask ref(Dims{6, 4, 4}), seg(Dims{6, 4, 4});
    for (int z = 1; z <= 2; ++z)
        for (int y = 1; y <= 2; ++y)
            for (int x = 1; x <= 2; ++x) {
                ref(x, y, z) = 1;
                seg(x + 1, y, z) = 1;
            }
    const SimilarityReport r = similarity(ref, seg);
    REQUIRE(r.n_ref == 8);
    REQUIRE(r.n_seg == 8);
    REQUIRE(r.n_overlap == 4);
    REQUIRE(r.si == 0.5);
    REQUIRE(r.ov == Catch::Approx(4.0 / 12.0).epsilon(1e-15));
    REQUIRE(r.of == 0.5);
    REQUIRE(r.ef == 0.5);
}

TEST_CASE("disjoint masks score zero overlap") {
    BinaryMask ref(Dims{8, 4, 4}), seg(Dims{8, 4, 4});
    ref(1, 1, 1) = 1;
    seg(6, 2, 2) = 1;
    const SimilarityReport r = similarity(ref, seg);
    REQUIRE(r.si == 0.0);
    REQUIRE(r.ov == 0.0);
    REQUIRE(r.of == 0.0);
    REQUIRE(r.ef == 1.0);
}

TEST_CASE("dice and jaccard satisfy their algebraic identity") {
    Xoshiro256pp rng(52);
    for (int trial = 0; trial < 100; ++trial) {
        const Dims d{16, 16, 16};
        const BinaryMask ref = oracle::random_mask(d, rng, 0.4);
        const BinaryMask seg = oracle::random_mask(d, rng, 0.4);
        if (count_true(ref) == 0) continue;
        const SimilarityReport r = similarity(ref, seg);
        REQUIRE(r.si == Catch::Approx(2.0 * r.ov / (1.0 + r.ov)).margin(1e-12));
        REQUIRE(r.ov == Catch::Approx(r.si / (2.0 - r.si)).margin(1e-12));
    }
}

TEST_CASE("of + ef equals s/r exactly over the stored counts") {
    Xoshiro256pp rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const Dims d{12, 12, 12};
        const BinaryMask ref = oracle::random_mask(d, rng, 0.5);
        const BinaryMask seg = oracle::random_mask(d, rng, 0.5);
        if (count_true(ref) == 0) continue;
        const SimilarityReport r = similarity(ref, seg);
        // Exact as rationals: o/r + (s-o)/r == s/r. Verify over the counts.
        REQUIRE(r.n_overlap + (r.n_seg - r.n_overlap) == r.n_seg);
        const double sr = static_cast<double>(r.n_seg) / static_cast<double>(r.n_ref);
        REQUIRE(r.of + r.ef == Catch::Approx(sr).margin(1e-12));
    }
}

TEST_CASE("si and ov are symmetric; of and ef are not") {
    Xoshiro256pp rng(54);
    const Dims d{10, 10, 10};
    BinaryMask a = oracle::random_mask(d, rng, 0.6);
    BinaryMask b = oracle::random_mask(d, rng, 0.2);
    a(0, 0, 0) = 1; // neither mask may be empty as a reference
    b(0, 0, 0) = 1;
    b(1, 0, 0) = 1; // and make the sizes differ so of/ef asymmetry shows
    const SimilarityReport ab = similarity(a, b);
    const SimilarityReport ba = similarity(b, a);
    REQUIRE(ab.si == ba.si);
    REQUIRE(ab.ov == ba.ov);
    REQUIRE(ab.n_overlap == ba.n_overlap);
    if (ab.n_ref != ab.n_seg) {
        REQUIRE(ab.of != ba.of);
    }
}

TEST_CASE("an empty reference is rejected") {
    const BinaryMask empty(Dims{4, 4, 4});
    BinaryMask seg(Dims{4, 4, 4});
    seg(1, 1, 1) = 1;
    try {
        similarity(empty, seg);
        FAIL("expected args error");
    } catch (const Error& e) {
        REQUIRE(e.code() == "args");
    }
    // An empty segmentation against a non-empty reference is fine.
    const SimilarityReport r = similarity(seg, empty);
    REQUIRE(r.si == 0.0);
    REQUIRE(r.ef == 0.0);
}

TEST_CASE("mismatched dimensions are rejected") {
    const BinaryMask a(Dims{4, 4, 4});
    const BinaryMask b(Dims{4, 4, 5});
    REQUIRE_THROWS_AS(similarity(a, b), Error);
}

TEST_CASE("the report serializes with the pinned field names") {
    BinaryMask ref(Dims{4, 4, 4}), seg(Dims{4, 4, 4});
    ref(1, 1, 1) = 1;
    ref(2, 1, 1) = 1;
    seg(1, 1, 1) = 1;
    const auto j = report_to_json(similarity(ref, seg));
    for (const char* key : {"si", "of", "ov", "ef", "n_ref", "n_seg", "n_overlap"})
        REQUIRE(j.contains(key));
    REQUIRE(j.size() == 7);
    REQUIRE(j["n_ref"].get<std::int64_t>() == 2);
    REQUIRE(j["n_seg"].get<std::int64_t>() == 1);
    REQUIRE(j["n_overlap"].get<std::int64_t>() == 1);
    REQUIRE(j["si"].get<double>() == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    // Field order is part of the contract.
    REQUIRE(j.dump().rfind("{\"si\":", 0) == 0);
}
