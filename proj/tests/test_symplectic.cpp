#include <gaussrt/states.hpp>
#include <gaussrt/symplectic.hpp>

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gaussrt;

namespace {

// Independent oracle: symplectic spectrum as |eig(i Omega V)| with halved
// multiplicity, via the generic complex eigensolver.
Vec oracle_symplectic_spectrum(const Mat& V) {
    const int n = static_cast<int>(V.rows()) / 2;
    CMat M = kI * omega(n).cast<std::complex<double>>() * V.cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<CMat> es(M);
    std::vector<double> mags;
    for (int k = 0; k < 2 * n; ++k) mags.push_back(std::abs(es.eigenvalues()[k]));
    std::sort(mags.begin(), mags.end());
    Vec out(n);
    for (int k = 0; k < n; ++k) out[k] = 0.5 * (mags[2 * k] + mags[2 * k + 1]);
    return out;
}

double oracle_min_eig_v_minus_iomega(const Mat& V) {
    const int n = static_cast<int>(V.rows()) / 2;
    CMat H = V.cast<std::complex<double>>() - kI * omega(n).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("omega block form and algebra") {
    Mat w1 = omega(1);
    CHECK(w1(0, 1) == 1.0);
    CHECK(w1(1, 0) == -1.0);
    CHECK(w1(0, 0) == 0.0);
    CHECK(w1(1, 1) == 0.0);

    Mat w3 = omega(3);
    CHECK(max_abs(Mat(w3 + w3.transpose())) == 0.0);

    Mat w2 = omega(2);
    CHECK(max_abs(Mat(w2 * w2 + Mat::Identity(4, 4))) == 0.0);

    CHECK_THROWS_AS(omega(0), std::invalid_argument);
}

TEST_CASE("validate_qcm against the Hermitian eigensolver oracle") {
    CHECK(validate_qcm(Mat::Identity(2, 2)).valid);

    Mat half = 0.5 * Mat::Identity(2, 2);
    auto rep = validate_qcm(half);
    CHECK_FALSE(rep.valid);
    CHECK_THAT(rep.min_eigenvalue, Catch::Matchers::WithinAbs(-0.5, 1e-12));
    CHECK_THAT(rep.min_eigenvalue,
               Catch::Matchers::WithinAbs(oracle_min_eig_v_minus_iomega(half), 1e-12));

    Mat xp(2, 2);
    xp << 0.25, 0.0, 0.0, 4.0;  // uncertainty product saturated
    CHECK(validate_qcm(xp).valid);
    CHECK_THAT(oracle_min_eig_v_minus_iomega(xp), Catch::Matchers::WithinAbs(0.0, 1e-12));

    Mat asym(2, 2);
    asym << 1.0, 0.1, -0.1, 1.0;
    CHECK_FALSE(validate_qcm(asym).valid);

    CHECK_THROWS_AS(validate_qcm(Mat::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("symplectic eigenvalues: fixed points and the PT-TMSV benchmark") {
    CHECK(max_abs(Mat((symplectic_eigenvalues(Mat::Identity(6, 6)) - Vec::Ones(3)).asDiagonal())) <
          1e-12);

    Vec th = symplectic_eigenvalues(3.0 * Mat::Identity(2, 2));
    REQUIRE(th.size() == 1);
    CHECK_THAT(th[0], Catch::Matchers::WithinAbs(3.0, 1e-12));

    GaussianState tmsv = make_tmsv(0.5);
    Mat pt = partial_transpose(tmsv.V, tmsv.partition, "B");
    Vec nu = symplectic_eigenvalues(pt);
    Vec oracle = oracle_symplectic_spectrum(pt);
    REQUIRE(nu.size() == 2);
    CHECK_THAT(nu[0], Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-10));
    CHECK_THAT(nu[1], Catch::Matchers::WithinAbs(std::exp(1.0), 1e-10));
    CHECK_THAT(nu[0], Catch::Matchers::WithinAbs(oracle[0], 1e-10));
    CHECK_THAT(nu[1], Catch::Matchers::WithinAbs(oracle[1], 1e-10));

    CHECK_THROWS_AS(symplectic_eigenvalues(-Mat::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("nu_min bisection route matches the eigenvalue route") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 1 + static_cast<int>(rng() % 3);
        Mat V = testutil::random_qcm(rng, n);
        CHECK_THAT(nu_min_bisect(V),
                   Catch::Matchers::WithinAbs(symplectic_eigenvalues(V)[0], 1e-8));
    }
}

TEST_CASE("williamson normal form") {
    auto id = williamson(Mat::Identity(4, 4));
    CHECK(max_abs(Mat((id.d - Vec::Ones(2)).asDiagonal())) < 1e-12);

    Mat sq(2, 2);
    sq << std::exp(-0.6), 0.0, 0.0, std::exp(0.6);
    auto w = williamson(sq);
    REQUIRE(w.d.size() == 1);
    CHECK_THAT(w.d[0], Catch::Matchers::WithinAbs(1.0, 1e-10));
    CHECK_THAT(w.d[0], Catch::Matchers::WithinAbs(symplectic_eigenvalues(sq)[0], 1e-10));

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 1 + static_cast<int>(rng() % 4);
        Mat V = testutil::random_qcm(rng, n);
        auto res = williamson(V);
        Mat target = Mat::Zero(2 * n, 2 * n);
        target.diagonal().head(n) = res.d;
        target.diagonal().tail(n) = res.d;
        CHECK(max_abs(Mat(res.S * V * res.S.transpose() - target)) < 1e-9);
        CHECK(max_abs(Mat(res.S * omega(n) * res.S.transpose() - omega(n))) < 1e-9);
        for (int k = 0; k + 1 < n; ++k) CHECK(res.d[k] <= res.d[k + 1] + 1e-12);
        CHECK(max_abs(Mat((res.d - symplectic_eigenvalues(V)).asDiagonal())) < 1e-9);
    }
}

TEST_CASE("williamson handles degenerate spectra") {
    // Two modes with equal symplectic eigenvalue 2 but mixed by a symplectic.
    std::mt19937_64 rng(23);
    Mat S = testutil::random_symplectic(rng, 2, 0.4);
    Mat V = S * (2.0 * Mat::Identity(4, 4)) * S.transpose();
    auto res = williamson(V);
    CHECK_THAT(res.d[0], Catch::Matchers::WithinAbs(2.0, 1e-9));
    CHECK_THAT(res.d[1], Catch::Matchers::WithinAbs(2.0, 1e-9));
}

TEST_CASE("schur_complement values and properties") {
    Mat bd = Mat::Zero(3, 3);
    bd(0, 0) = 5.0;
    bd.block(1, 1, 2, 2) << 2.0, 0.3, 0.3, 1.0;
    Mat q = schur_complement(bd, {0});
    CHECK(max_abs(Mat(q - bd.block(1, 1, 2, 2))) < 1e-14);

    Mat m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    CHECK_THAT(schur_complement(m, {0})(0, 0), Catch::Matchers::WithinAbs(1.5, 1e-14));

    GaussianState tmsv = make_tmsv(0.7);
    std::vector<int> a_idx = xxpp_indices(2, tmsv.partition.modes_of("A"));
    Mat red = schur_complement(tmsv.V, a_idx);
    CHECK(max_abs(Mat(red - Mat::Identity(2, 2) / std::cosh(1.4))) < 1e-12);

    // Homogeneity (lambda M)/(lambda P) = lambda (M/P).
    std::mt19937_64 rng(3);
    Mat M = testutil::random_psd(rng, 5, 0.8) + Mat::Identity(5, 5);
    Mat lhs = schur_complement(Mat(2.5 * M), {0, 2});
    Mat rhs = 2.5 * schur_complement(M, {0, 2});
    CHECK(max_abs(Mat(lhs - rhs)) < 1e-10);

    // Variational property: M/P is the largest X with M >= 0 (+) X.
    Mat mp = schur_complement(M, {0, 2});
    Mat embed = Mat::Zero(5, 5);
    std::vector<int> comp{1, 3, 4};
    for (size_t i = 0; i < comp.size(); ++i)
        for (size_t j = 0; j < comp.size(); ++j) embed(comp[i], comp[j]) = mp(i, j);
    Eigen::SelfAdjointEigenSolver<Mat> feas(Mat(M - embed));
    CHECK(feas.eigenvalues().minCoeff() > -1e-10);
    for (size_t i = 0; i < comp.size(); ++i) embed(comp[i], comp[i]) += 1e-6;
    Eigen::SelfAdjointEigenSolver<Mat> infeas(Mat(M - embed));
    CHECK(infeas.eigenvalues().minCoeff() < 0.0);

    // Monotonicity in the PD order.
    Mat M2 = M + testutil::random_psd(rng, 5, 0.5);
    Mat diff = schur_complement(M2, {0, 2}) - schur_complement(M, {0, 2});
    Eigen::SelfAdjointEigenSolver<Mat> mono(diff);
    CHECK(mono.eigenvalues().minCoeff() > -1e-10);

    Mat sing(2, 2);
    sing << 0.0, 1.0, 1.0, 2.0;
    CHECK_THROWS_AS(schur_complement(sing, {0}), SingularPivot);
}

TEST_CASE("partial transpose") {
    std::mt19937_64 rng(5);
    Mat ga = testutil::random_qcm(rng, 1);
    Mat gb = testutil::random_qcm(rng, 1);
    auto [prod, part] = direct_sum(ga, ModePartition({"A"}), gb, ModePartition({"B"}));
    Mat pt = partial_transpose(prod, part, "B");
    Mat flip = momentum_flip(1);
    auto [expected, part2] = direct_sum(ga, ModePartition({"A"}), Mat(flip * gb * flip),
                                        ModePartition({"B"}));
    CHECK(max_abs(Mat(pt - expected)) < 1e-14);
    CHECK(max_abs(Mat(partial_transpose(pt, part, "B") - prod)) < 1e-14);

    GaussianState tmsv = make_tmsv(0.5);
    Mat tpt = partial_transpose(tmsv.V, tmsv.partition, "B");
    CHECK_THAT(symplectic_eigenvalues(tpt)[0],
               Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-10));
    CHECK_THROWS_AS(partial_transpose(tmsv.V, tmsv.partition, "C"), std::invalid_argument);
}

TEST_CASE("direct sum reorders into global xxpp and merges labels") {
    auto [v4, p4] = direct_sum(Mat::Identity(2, 2), ModePartition({"A"}), Mat::Identity(2, 2),
                               ModePartition({"A"}));
    CHECK(max_abs(Mat(v4 - Mat::Identity(4, 4))) == 0.0);
    CHECK(p4.modes() == 2);
    CHECK(p4.parties().size() == 1);

    std::mt19937_64 rng(9);
    Mat v1 = testutil::random_qcm(rng, 1);
    Mat v2 = testutil::random_qcm(rng, 1);
    auto [vs, ps] = direct_sum(v1, ModePartition({"A"}), v2, ModePartition({"B"}));
    Vec nu = symplectic_eigenvalues(vs);
    std::vector<double> expected{symplectic_eigenvalues(v1)[0], symplectic_eigenvalues(v2)[0]};
    std::sort(expected.begin(), expected.end());
    CHECK_THAT(nu[0], Catch::Matchers::WithinAbs(expected[0], 1e-10));
    CHECK_THAT(nu[1], Catch::Matchers::WithinAbs(expected[1], 1e-10));

    GaussianState t = make_tmsv(0.4);
    auto [two, ptwo] = direct_sum(t.V, t.partition, t.V, t.partition);
    CHECK(ptwo.labels == std::vector<std::string>{"A", "B", "A", "B"});
    CHECK(ptwo.modes_of("A") == std::vector<int>{0, 2});
    CHECK(two.rows() == 8);
}

TEST_CASE("partial trace") {
    GaussianState tmsv = make_tmsv(0.6);
    auto [va, pa] = partial_trace(tmsv.V, tmsv.partition, {"A"});
    CHECK(max_abs(Mat(va - std::cosh(1.2) * Mat::Identity(2, 2))) < 1e-12);
    CHECK(pa.labels == std::vector<std::string>{"A"});

    auto [all, pall] = partial_trace(tmsv.V, tmsv.partition, {"A", "B"});
    CHECK(max_abs(Mat(all - tmsv.V)) == 0.0);

    std::mt19937_64 rng(13);
    Mat ga = testutil::random_qcm(rng, 1);
    Mat gb = testutil::random_qcm(rng, 2);
    auto [prod, part] = direct_sum(ga, ModePartition({"A"}), gb, ModePartition({"B", "B"}));
    auto [back, pb] = partial_trace(prod, part, {"B"});
    CHECK(max_abs(Mat(back - gb)) < 1e-14);

    CHECK_THROWS_AS(partial_trace(tmsv.V, tmsv.partition, {}), std::invalid_argument);
}
