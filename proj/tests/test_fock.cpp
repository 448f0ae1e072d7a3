#include <gaussrt/fock.hpp>

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gaussrt;
using Catch::Matchers::WithinAbs;

TEST_CASE("fock oracle fixed values") {
    CHECK_THAT(fock_overlap(make_vacuum(1), Vec::Zero(2)), WithinAbs(1.0, 1e-10));

    // Geometric series: sum_n nbar^n/(nbar+1)^{n+1} |<0|n>|^2 = 1/(nbar+1).
    CHECK_THAT(fock_overlap(make_thermal(1.0), Vec::Zero(2)), WithinAbs(0.5, 1e-8));

    Vec s(2);
    s << 1.2, -0.8;
    CHECK_THAT(fock_overlap(displace(make_vacuum(1), s), s), WithinAbs(1.0, 1e-8));
}

TEST_CASE("fock oracle reproduces the requested moments") {
    Vec s(2);
    s << 0.9, -0.4;
    GaussianState st = displace(make_squeezed(0.4, 0.3), s);
    FockOracle oracle(st, 60);
    CHECK(oracle.trace_deficiency() < 1e-10);
    CHECK(oracle.moment_deviation() < 1e-6);
}

TEST_CASE("overlap sign convention: w = u - s survives, w = u + s is rejected") {
    Vec s(2), u(2);
    s << 0.8, -0.3;
    u << 0.2, 0.5;
    GaussianState st = displace(make_thermal(0.5), s);
    const double oracle = fock_overlap(st, u);
    CHECK_THAT(coherent_overlap(st, u), WithinAbs(oracle, 1e-6));

    // The rejected candidate: same formula with w = u + s.
    const Vec wplus = u + st.s;
    Mat A = st.V + Mat::Identity(2, 2);
    const double plus =
        2.0 * std::exp(-wplus.dot(A.llt().solve(wplus))) / std::sqrt(A.determinant());
    CHECK(std::abs(plus - oracle) > 1e-3);
}

TEST_CASE("single-mode corpus agreement with the phase-space formula") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> mean(-1.5, 1.5);
    for (int trial = 0; trial < 8; ++trial) {
        Mat V = testutil::random_qcm(rng, 1, 4.0, 0.35);
        GaussianState st{V, Vec::Zero(2), ModePartition::uniform(1)};
        Vec u(2);
        st.s << mean(rng), mean(rng);
        u << mean(rng), mean(rng);
        FockOracle oracle(st, 60);
        auto res = oracle.overlap(u);
        INFO("trial " << trial << " estimate " << res.truncation_estimate);
        CHECK_THAT(coherent_overlap(st, u), WithinAbs(res.value, 1e-6));
    }
}

TEST_CASE("large thermal occupation still within corpus bounds") {
    // ||V|| = 10 edge of the supported corpus.
    GaussianState st = make_thermal(4.5);
    FockOracle oracle(st, 60);
    auto res = oracle.overlap(Vec::Zero(2));
    CHECK_THAT(coherent_overlap(st, Vec::Zero(2)), WithinAbs(res.value, 1e-6));
}

TEST_CASE("two-mode oracle validates the tmsv overlap") {
    GaussianState tmsv = make_tmsv(0.3);
    FockOracle oracle(tmsv, 16);
    CHECK(oracle.moment_deviation() < 1e-6);
    Vec u = Vec::Zero(4);
    auto res = oracle.overlap(u);
    CHECK_THAT(coherent_overlap(tmsv, u), WithinAbs(res.value, 1e-6));

    Vec shift(4);
    shift << 0.4, -0.2, 0.1, 0.3;
    GaussianState moved = displace(tmsv, shift);
    FockOracle oracle2(moved, 16);
    Vec u2(4);
    u2 << 0.1, 0.2, -0.3, 0.0;
    CHECK_THAT(coherent_overlap(moved, u2), WithinAbs(oracle2.overlap(u2).value, 1e-6));
}

TEST_CASE("cutoff insufficiency is an error, not a wrong answer") {
    CHECK_THROWS_AS(FockOracle(make_thermal(30.0), 20), std::runtime_error);
}
