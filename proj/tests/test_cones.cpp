#include <catch2/catch_amalgamated.hpp>

#include <gaussrt/cones.hpp>
#include <gaussrt/states.hpp>

#include <random>

#include "test_util.hpp"

using namespace gaussrt;

namespace {

// Member of every built-in cone: a two-party product of thermal-like blocks
// plus positive noise (mode counts n_a, n_b).
Mat member_sample(std::mt19937_64& rng, int n_a, int n_b, double noise = 0.4) {
    std::uniform_real_distribution<double> temp(0.2, 1.5);
    const int N = n_a + n_b;
    GaussianState a = make_thermal(temp(rng), n_a);
    GaussianState b = make_thermal(temp(rng), n_b);
    auto [V, part] = direct_sum(a.V, ModePartition::uniform(n_a, "A"), b.V,
                                ModePartition::uniform(n_b, "B"));
    (void)part;
    Mat noise_m = testutil::random_psd(rng, 2 * N, noise / std::sqrt(2.0 * N));
    return V + noise_m;
}

GaussianState tmsv_noisy(std::mt19937_64& rng, double r) {
    GaussianState st = make_tmsv(r);
    std::uniform_real_distribution<double> u(0.0, 0.05);
    st.V += u(rng) * Mat::Identity(4, 4);
    return st;
}

double nu_min_pt(const Mat& V, const ModePartition& part) {
    return symplectic_eigenvalues(partial_transpose(V, part, "B")).minCoeff();
}

}  // namespace

TEST_CASE("cone specifications follow the theory table") {
    const auto part11 = ModePartition::bipartition(1, 1);

    FreeConeSpec nc = cone_spec(Theory::nonclassicality, ModePartition::uniform(2));
    REQUIRE(nc.q_dim == 0);
    REQUIRE(nc.g_dim == 0);
    REQUIRE(max_abs(CMat(nc.C - CMat::Identity(4, 4))) == 0.0);

    FreeConeSpec ppt = cone_spec(Theory::ppt, part11);
    // i Omega_A + (-i Omega_B), party-embedded: equals i S_B Omega S_B.
    CMat expected = CMat::Zero(4, 4);
    expected(0, 2) = kI;
    expected(2, 0) = -kI;
    expected(1, 3) = -kI;
    expected(3, 1) = kI;
    REQUIRE(max_abs(CMat(ppt.C - expected)) < 1e-15);

    FreeConeSpec steer = cone_spec(Theory::steering, ModePartition::bipartition(2, 1));
    int nonzero = 0;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c)
            if (std::abs(steer.C(r, c)) > 0.0) ++nonzero;
    REQUIRE(nonzero == 2);  // a single 2x2 i Omega block on the steered mode
    REQUIRE(steer.C(2, 5) == kI);
    REQUIRE(steer.C(5, 2) == -kI);

    FreeConeSpec sep = cone_spec(Theory::separability, part11);
    REQUIRE(sep.q_dim == 6);
    REQUIRE(sep.g_dim == 4);
    REQUIRE(max_abs(sep.C) == 0.0);
    REQUIRE(max_abs(CMat(sep.D - kI * omega(2).cast<std::complex<double>>())) < 1e-15);
    // f is linear, and f = g for this cone.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    Vec q1(6), q2(6);
    for (int i = 0; i < 6; ++i) {
        q1[i] = gauss(rng);
        q2[i] = gauss(rng);
    }
    REQUIRE(max_abs(Mat(sep.f_of(2.5 * q1 + q2) - 2.5 * sep.f_of(q1) - sep.f_of(q2))) < 1e-12);
    REQUIRE(max_abs(Mat(sep.f_of(q1) - sep.g_of(q1))) == 0.0);
    // Party blocks of f land on their own rows only.
    Vec ea = Vec::Zero(6);
    ea[0] = 1.0;
    Mat fa = sep.f_of(ea);
    REQUIRE(fa(0, 0) == 1.0);
    REQUIRE(max_abs(Mat(fa.block(1, 1, 3, 3))) == 0.0);

    FreeConeSpec ssim = cone_spec(Theory::separability_simplified, part11);
    REQUIRE(ssim.q_dim == 3);
    REQUIRE(ssim.g_dim == 2);
    Vec qa = Vec::Ones(3);
    Mat f_full = ssim.f_of(qa);
    REQUIRE(max_abs(Mat(f_full.block(1, 1, 1, 1))) == 0.0);  // B columns stay zero
    REQUIRE(f_full(0, 0) == ssim.g_of(qa)(0, 0));
    REQUIRE(ssim.C(1, 3) == kI);
    REQUIRE(max_abs(CMat(ssim.D - kI * omega(1).cast<std::complex<double>>())) < 1e-15);

    REQUIRE_THROWS_AS(cone_spec(Theory::ppt, ModePartition::uniform(2)), std::invalid_argument);
    REQUIRE_THROWS_AS(cone_spec(Theory::steering, part11, "A", "Z"), std::invalid_argument);
    REQUIRE(theory_from_string("steering") == Theory::steering);
    REQUIRE_THROWS_AS(theory_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("membership oracles classify canonical states") {
    const auto part11 = ModePartition::bipartition(1, 1);
    FreeConeSpec nc = cone_spec(Theory::nonclassicality, ModePartition::uniform(1));
    REQUIRE(membership(make_vacuum(1).V, nc));
    REQUIRE_FALSE(membership(make_squeezed(0.3).V, nc));

    FreeConeSpec sep = cone_spec(Theory::separability, part11);
    REQUIRE_FALSE(membership(make_tmsv(0.5).V, sep));
    auto [prod, part] = direct_sum(make_thermal(1.0).V, ModePartition::uniform(1, "A"),
                                   make_thermal(0.5).V, ModePartition::uniform(1, "B"));
    (void)part;
    REQUIRE(membership(prod, sep));

    // The vacuum sits in every cone (boundary member).
    Mat I4 = Mat::Identity(4, 4);
    for (Theory t : {Theory::ppt, Theory::steering, Theory::separability,
                     Theory::separability_simplified})
        REQUIRE(membership(I4, cone_spec(t, part11)));
}

TEST_CASE("kappa matches closed forms on canonical states") {
    const auto part11 = ModePartition::bipartition(1, 1);

    ResourceReport rc = kappa(make_squeezed(0.3).V, cone_spec(Theory::nonclassicality,
                                                              ModePartition::uniform(1)));
    REQUIRE(std::abs(rc.kappa - std::exp(0.6)) < 1e-12);
    REQUIRE(std::abs(rc.kappa - 1.8221) < 1e-4);
    REQUIRE_FALSE(rc.member);
    REQUIRE(rc.method == "analytic");

    const GaussianState tmsv = make_tmsv(0.5);
    ResourceReport rp = kappa(tmsv.V, cone_spec(Theory::ppt, part11));
    REQUIRE(std::abs(rp.kappa - std::exp(1.0)) < 1e-12);
    REQUIRE(std::abs(nu_min_pt(tmsv.V, part11) - std::exp(-1.0)) < 1e-12);  // oracle
    REQUIRE(std::abs(rp.kappa - 2.7183) < 1e-4);
    REQUIRE(std::abs(rp.upsilon * rp.kappa - 1.0) < 1e-12);

    ResourceReport rt = kappa(tmsv.V, cone_spec(Theory::steering, part11));
    REQUIRE(std::abs(rt.kappa - std::cosh(1.0)) < 1e-12);
    REQUIRE(std::abs(rt.kappa - 1.5431) < 1e-4);
    // Schur-complement oracle: V/V_A = I / cosh(2r).
    Mat VS = schur_complement(tmsv.V, {0, 2});
    REQUIRE(max_abs(Mat(VS - Mat::Identity(2, 2) / std::cosh(1.0))) < 1e-12);

    // Free states: upsilon >= 1 so kappa clips to 1.
    ResourceReport rf = kappa(make_thermal(0.8).V, cone_spec(Theory::nonclassicality,
                                                             ModePartition::uniform(1)));
    REQUIRE(rf.upsilon >= 1.0);
    REQUIRE(rf.kappa == 1.0);
    REQUIRE(rf.member);
}

TEST_CASE("analytic SDP and bisection methods agree") {
    std::mt19937_64 rng(404);
    const Theory theories[] = {Theory::nonclassicality, Theory::ppt, Theory::steering};
    for (int trial = 0; trial < 9; ++trial) {
        const Theory t = theories[trial % 3];
        const int n_a = 1 + static_cast<int>(rng() % 2);
        const int n_b = 1;
        const ModePartition part = t == Theory::nonclassicality
                                       ? ModePartition::uniform(n_a + n_b)
                                       : ModePartition::bipartition(n_a, n_b);
        const Mat V = testutil::random_qcm(rng, n_a + n_b);
        FreeConeSpec spec = cone_spec(t, part);

        KappaOptions analytic, via_sdp, via_bisect;
        analytic.method = QuantMethod::analytic;
        via_sdp.method = QuantMethod::sdp;
        via_bisect.method = QuantMethod::bisect;
        const double ka = kappa(V, spec, analytic).kappa;
        const double ks = kappa(V, spec, via_sdp).kappa;
        const double kb = kappa(V, spec, via_bisect).kappa;
        REQUIRE(std::abs(ka - ks) < 1e-6);
        REQUIRE(std::abs(ka - kb) < 1e-6);
    }
}

TEST_CASE("separability SDP relates to its simplified form") {
    std::mt19937_64 rng(77);
    const auto part11 = ModePartition::bipartition(1, 1);
    FreeConeSpec sep = cone_spec(Theory::separability, part11);
    FreeConeSpec sim = cone_spec(Theory::separability_simplified, part11);
    for (int trial = 0; trial < 30; ++trial) {
        const Mat V = trial % 3 == 0 ? tmsv_noisy(rng, 0.2 + 0.05 * trial).V
                                     : testutil::random_qcm(rng, 2);
        const double ks = kappa(V, sep).kappa;
        const double km = kappa(V, sim).kappa;
        REQUIRE(std::abs(ks - km) < 1e-6);
    }
}

TEST_CASE("upsilon duals certify resources") {
    const auto part11 = ModePartition::bipartition(1, 1);
    const GaussianState tmsv = make_tmsv(0.5);

    // PPT via SDP: strong duality against the analytic kappa.
    FreeConeSpec ppt = cone_spec(Theory::ppt, part11);
    KappaOptions via_sdp;
    via_sdp.method = QuantMethod::sdp;
    UpsilonReport up = upsilon(tmsv.V, ppt, via_sdp);
    REQUIRE(up.status == SdpStatus::optimal);
    REQUIRE(up.slater_ok);
    REQUIRE(std::abs(up.upsilon - std::exp(-1.0)) < 1e-7);
    REQUIRE(std::abs(up.witness_value - std::exp(-1.0)) < 1e-6);
    REQUIRE(std::abs(up.witness_normalization - 1.0) < 1e-7);
    REQUIRE(up.witness_value < 1.0);  // certifies entanglement

    // Steering: upsilon equals the Schur-complement symplectic minimum.
    FreeConeSpec steer = cone_spec(Theory::steering, part11);
    for (double r : {0.1, 0.5, 1.0}) {
        const Mat V = make_tmsv(r).V;
        UpsilonReport ua = upsilon(V, steer);
        REQUIRE(ua.method == "analytic");
        REQUIRE(std::abs(ua.upsilon - 1.0 / std::cosh(2.0 * r)) < 1e-9);
        UpsilonReport us = upsilon(V, steer, via_sdp);
        REQUIRE(std::abs(us.upsilon - 1.0 / std::cosh(2.0 * r)) < 1e-7);
        REQUIRE(std::abs(us.witness_normalization - 1.0) < 1e-7);
    }

    // Nonclassicality witness from the SDP dual.
    FreeConeSpec nc = cone_spec(Theory::nonclassicality, ModePartition::uniform(1));
    UpsilonReport un = upsilon(make_squeezed(0.3).V, nc, via_sdp);
    REQUIRE(std::abs(un.witness_value - std::exp(-0.6)) < 1e-6);
    REQUIRE(std::abs(un.witness_normalization - 1.0) < 1e-7);

    // Analytic witnesses carry exact normalization and value.
    UpsilonReport uan = upsilon(make_squeezed(0.3).V, nc);
    REQUIRE(std::abs(uan.witness_normalization - 1.0) < 1e-12);
    REQUIRE(std::abs(uan.witness_value - uan.upsilon) < 1e-12);
    UpsilonReport uap = upsilon(tmsv.V, ppt);
    REQUIRE(std::abs(uap.witness_normalization - 1.0) < 1e-10);
    REQUIRE(std::abs(uap.witness_value - uap.upsilon) < 1e-10);
    UpsilonReport uat = upsilon(tmsv.V, steer);
    REQUIRE(std::abs(uat.witness_normalization - 1.0) < 1e-10);
    REQUIRE(std::abs(uat.witness_value - uat.upsilon) < 1e-10);

    // Separability dual: witness detects the TMSV.
    FreeConeSpec sep = cone_spec(Theory::separability, part11);
    UpsilonReport usep = upsilon(tmsv.V, sep, via_sdp);
    REQUIRE(usep.status == SdpStatus::optimal);
    REQUIRE(usep.slater_ok);
    REQUIRE(std::abs(usep.witness_normalization - 1.0) < 1e-7);
    REQUIRE(usep.witness_value < 1.0);
    REQUIRE(usep.upsilon < 1.0);
}

TEST_CASE("steerability measure follows the Schur spectrum") {
    const auto part11 = ModePartition::bipartition(1, 1);
    REQUIRE(std::abs(steerability_N(make_tmsv(0.5).V, part11) - std::log(std::cosh(1.0))) <
            1e-12);
    REQUIRE(std::abs(steerability_N(make_tmsv(0.5).V, part11) - 0.4338) < 1e-4);

    auto [prod, ppart] = direct_sum(make_thermal(0.7).V, ModePartition::uniform(1, "A"),
                                    make_thermal(0.2).V, ModePartition::uniform(1, "B"));
    REQUIRE(steerability_N(prod, ppart) == 0.0);

    for (double r : {0.1, 0.5, 1.0}) {
        const Mat V = make_tmsv(r).V;
        const double logk = std::log(kappa(V, cone_spec(Theory::steering, part11)).kappa);
        REQUIRE(std::abs(steerability_N(V, part11) - logk) < 1e-8);
    }

    // Additivity across direct sums: Schur complements block-diagonalize.
    auto [V2, part2] = direct_sum(make_tmsv(0.4).V, ModePartition::bipartition(1, 1),
                                  make_tmsv(0.7).V, ModePartition::bipartition(1, 1));
    const double expected = steerability_N(make_tmsv(0.4).V, part11) +
                            steerability_N(make_tmsv(0.7).V, part11);
    REQUIRE(std::abs(steerability_N(V2, part2) - expected) < 1e-10);
}

TEST_CASE("faithfulness splits members from non-members") {
    std::mt19937_64 rng(909);
    const auto part11 = ModePartition::bipartition(1, 1);
    const std::vector<std::pair<Theory, ModePartition>> cones = {
        {Theory::nonclassicality, ModePartition::uniform(2)},
        {Theory::ppt, part11},
        {Theory::steering, part11},
        {Theory::separability, part11},
    };
    int members = 0, resources = 0;
    while (members < 50) {
        for (const auto& [t, part] : cones) {
            const Mat V = member_sample(rng, 1, 1);
            ResourceReport rep = kappa(V, cone_spec(t, part));
            REQUIRE(std::abs(rep.kappa - 1.0) < 1e-7);
            REQUIRE(rep.member);
            ++members;
        }
    }
    while (resources < 50) {
        const Mat V = tmsv_noisy(rng, 0.2 + 0.01 * resources).V;
        // Oracle: the partial transpose certifies all bipartite theories here;
        // the smallest eigenvalue certifies nonclassicality.
        REQUIRE(nu_min_pt(V, part11) < 1.0 - 1e-6);
        for (const auto& [t, part] : cones) {
            if (t == Theory::nonclassicality &&
                Eigen::SelfAdjointEigenSolver<Mat>(V).eigenvalues().minCoeff() > 1.0 - 1e-3)
                continue;
            if (t == Theory::steering &&
                symplectic_eigenvalues(schur_complement(V, {0, 2})).minCoeff() > 1.0 - 1e-3)
                continue;
            ResourceReport rep = kappa(V, cone_spec(t, part));
            REQUIRE(rep.kappa > 1.0 + 1e-7);
            REQUIRE_FALSE(rep.member);
            ++resources;
        }
    }
}

TEST_CASE("kappa scaling and monotonicity properties") {
    std::mt19937_64 rng(31337);
    const auto part11 = ModePartition::bipartition(1, 1);
    for (int trial = 0; trial < 8; ++trial) {
        const Mat V = trial % 2 == 0 ? tmsv_noisy(rng, 0.6).V : testutil::random_qcm(rng, 2);
        for (Theory t : {Theory::nonclassicality, Theory::ppt, Theory::steering}) {
            const ModePartition part =
                t == Theory::nonclassicality ? ModePartition::uniform(2) : part11;
            FreeConeSpec spec = cone_spec(t, part);
            const double k1 = kappa(V, spec).kappa;
            for (double s : {1.3, 2.0}) {
                const double ks = kappa(Mat(s * V), spec).kappa;
                REQUIRE(ks >= k1 / s - 1e-10);
                if (ks > 1.0 + 1e-9)  // scaled state still resourceful: equality
                    REQUIRE(std::abs(ks - k1 / s) < 1e-9);
            }
            // Adding noise never increases the quantifier.
            const Mat W = V + testutil::random_psd(rng, 4, 0.3);
            REQUIRE(kappa(W, spec).kappa <= k1 + 1e-9);
        }
    }
}

TEST_CASE("separability dominates the entanglement and steering hierarchy") {
    std::mt19937_64 rng(2718);
    const auto part11 = ModePartition::bipartition(1, 1);
    FreeConeSpec sep = cone_spec(Theory::separability, part11);
    FreeConeSpec ppt = cone_spec(Theory::ppt, part11);
    FreeConeSpec steer = cone_spec(Theory::steering, part11);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat V = trial % 2 == 0 ? tmsv_noisy(rng, 0.4).V : testutil::random_qcm(rng, 2);
        const double ks = kappa(V, sep).kappa;
        REQUIRE(ks >= kappa(V, ppt).kappa - 1e-6);
        REQUIRE(ks >= kappa(V, steer).kappa - 1e-6);
    }
}

TEST_CASE("tensorization selects the larger resource") {
    std::mt19937_64 rng(1234);
    const auto part11 = ModePartition::bipartition(1, 1);
    for (int trial = 0; trial < 4; ++trial) {
        const Mat V = testutil::random_qcm(rng, 2);
        const Mat W = trial % 2 == 0 ? make_tmsv(0.5).V : testutil::random_qcm(rng, 2);
        for (Theory t : {Theory::nonclassicality, Theory::ppt, Theory::steering}) {
            const ModePartition part =
                t == Theory::nonclassicality ? ModePartition::uniform(2) : part11;
            auto [VW, psum] = direct_sum(V, part, W, part);
            FreeConeSpec spec = cone_spec(t, part);
            FreeConeSpec spec_sum = cone_spec(t, psum);
            const double expect = std::max(kappa(V, spec).kappa, kappa(W, spec).kappa);
            REQUIRE(std::abs(kappa(VW, spec_sum).kappa - expect) < 1e-6);
        }
    }
    // Separability through the SDP on a 2+2 mode direct sum.
    const Mat V = make_tmsv(0.3).V;
    const Mat W = tmsv_noisy(rng, 0.8).V;
    auto [VW, pSum] = direct_sum(V, part11, W, part11);
    FreeConeSpec sep4 = cone_spec(Theory::separability, pSum);
    FreeConeSpec sep2 = cone_spec(Theory::separability, part11);
    const double expect = std::max(kappa(V, sep2).kappa, kappa(W, sep2).kappa);
    REQUIRE(std::abs(kappa(VW, sep4).kappa - expect) < 1e-6);
}

TEST_CASE("cone midpoints remain members") {
    std::mt19937_64 rng(5150);
    const auto part11 = ModePartition::bipartition(1, 1);
    for (Theory t : {Theory::nonclassicality, Theory::ppt, Theory::steering,
                     Theory::separability}) {
        const ModePartition part =
            t == Theory::nonclassicality ? ModePartition::uniform(2) : part11;
        FreeConeSpec spec = cone_spec(t, part);
        for (int pair = 0; pair < 2; ++pair) {
            const Mat V = member_sample(rng, 1, 1);
            const Mat W = member_sample(rng, 1, 1);
            REQUIRE(membership(V, spec));
            REQUIRE(membership(W, spec));
            REQUIRE(membership(Mat(0.5 * (V + W)), spec));
        }
    }
}

TEST_CASE("upper bound dominates kappa") {
    REQUIRE(kappa_upper_bound(Mat::Identity(2, 2)) == 1.0);
    const Mat Vsq = make_squeezed(0.3).V;
    REQUIRE(std::abs(kappa_upper_bound(Vsq) - std::exp(0.6)) < 1e-12);

    std::mt19937_64 rng(86);
    const auto part11 = ModePartition::bipartition(1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat V = testutil::random_qcm(rng, 2);
        const double bound = kappa_upper_bound(V);
        for (Theory t : {Theory::nonclassicality, Theory::ppt, Theory::steering}) {
            const ModePartition part =
                t == Theory::nonclassicality ? ModePartition::uniform(2) : part11;
            REQUIRE(bound >= kappa(V, cone_spec(t, part)).kappa - 1e-9);
        }
        if (trial < 4)
            REQUIRE(bound >=
                    kappa(V, cone_spec(Theory::separability, part11)).kappa - 1e-7);
    }
}
