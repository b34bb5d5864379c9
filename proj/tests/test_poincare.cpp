#include <doctest.h>

#include <cmath>

#include "bdmix/bdchain.hpp"
#include "bdmix/poincare.hpp"
#include "bdmix/spectral.hpp"

using namespace bdmix;

TEST_CASE("stitching arithmetic") {
    auto c = stitch(0.5, 2.0, 3.0);
    CHECK(c.c_p == doctest::Approx(14.0));
    CHECK(c.mixing_rate == doctest::Approx(1.0 / 14.0));
    CHECK(stitch(0.5, 0.0, 3.0).provenance == "singleton");
    CHECK(singleton_certificate(0.25).c_p == doctest::Approx(4.0));
    CHECK(constant_b_certificate(1.0, 2.0, 0.5).c_p == doctest::Approx(2.0));
    CHECK_THROWS_AS(stitch(0.0, 1.0, 1.0), Error);
}

TEST_CASE("canonical path constant dominates the exact local constant") {
    // restricted-chain eigen oracle: 1/gap_K = 0.04635509128397955
    auto s = RegimeSpec::from_alpha(110, 0.75);
    auto ch = build_mmn(s, choose_truncation(s));
    auto lb = canonical_path_constant(ch, 103, 109);
    CHECK(lb.c_local >= 0.04635509128397955);
    CHECK(lb.c_local == doctest::Approx(0.05499).epsilon(1e-3));
    std::vector<double> m;
    auto nu = stationary(ch);
    double z = 0;
    for (long q = 103; q <= 109; ++q) z += nu.probs[q];
    for (long q = 103; q <= 109; ++q) m.push_back(nu.probs[q] / z);
    auto rep = verify_local_poincare(ch, lb, m, 300, 7);
    CHECK(rep.pass);
}

TEST_CASE("closed-form super-HW constants") {
    // mpmath oracle
    auto k = super_hw_constants(110, 0.75);
    CHECK(k.L_K == doctest::Approx(0.37515004834927468).epsilon(1e-12));
    CHECK(k.U_K == doctest::Approx(0.53803489131831323).epsilon(1e-12));
    CHECK(k.g1 == doctest::Approx(3.302425453377479).epsilon(1e-12));
    CHECK(k.g2 == doctest::Approx(0.018682556581719879).epsilon(1e-11));
    CHECK(k.g3 == doctest::Approx(0.62343209845880942).epsilon(1e-12));
    auto j = super_hw_constants(2000, 0.6);
    CHECK(j.g1 == doctest::Approx(4.1129468496490752).epsilon(1e-12));
    CHECK(j.g3 == doctest::Approx(0.83499997577252127).epsilon(1e-12));
}

TEST_CASE("roughly uniform sandwich") {
    auto r = roughly_uniform_bounds(RegimeSpec::from_alpha(500, 0.75));
    CHECK(r.pass);
    CHECK(r.L_K <= r.min_scaled);
    CHECK(r.max_scaled <= r.U_K);
}

TEST_CASE("pipelines stay below the gap") {
    auto s = RegimeSpec::from_alpha(110, 0.6);
    auto ch = build_mmn(s, choose_truncation(s));
    auto pc = super_hw_pipeline(s);
    CHECK(pc.provenance == "stitch");
    auto rep = verify_poincare(ch, pc, 100, 3);
    CHECK(rep.pass);
    CHECK(rep.rate_ok);
    auto t = RegimeSpec::from_alpha(100, 0.25);
    auto pt = sub_hw_pipeline(t);
    CHECK(pt.mixing_rate <= spectral_gap(build_mmn(t, choose_truncation(t))).gap);
}

TEST_CASE("weighted Poincare on probes") {
    auto s = RegimeSpec::from_alpha(500, 0.75);
    auto wp = weighted_poincare_super_hw(s);
    CHECK(wp.tau_mass > 0);
    CHECK(verify_weighted_poincare(s, wp, 200, 11).pass);
    CHECK_THROWS_AS(weighted_poincare_super_hw(RegimeSpec::from_alpha(100, 0.75)), Error);
}

TEST_CASE("truncation local bound") {
    auto ch = build_mmn(RegimeSpec::from_lambda(100, 10.0), 120);
    auto lb = truncation_local_bound(1.0, ch, 0, 30);
    CHECK(lb.method == LocalMethod::truncation);
    CHECK(lb.c_local == 1.0);
    CHECK(truncation_local_bound(1.0, ch, 5, 5).c_local == 0.0);
}
