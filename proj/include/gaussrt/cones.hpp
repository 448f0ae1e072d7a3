#pragma once

// Free cones of covariance matrices and the scale-based resource quantifier.
//
// A free cone is the set of V admitting an auxiliary Q with
//   V >= f(Q) + C   and   g(Q) >= D,
// for theory-specific linear maps f, g and constants C, D. The quantifier
//   kappa(V) = min { xi >= 1 : xi V in cone }
// and its reciprocal companion
//   upsilon(V) = max { zeta : V >= f(Q') + zeta C, g(Q') >= zeta D }
// are linked by kappa = max{1, 1/upsilon}. The upsilon dual delivers a
// second-moment witness (W, Y) normalized by <W,C> + <Y,D> = 1 whose value
// <W,V> < 1 certifies the state as resourceful.
//
// Built-in theories: nonclassicality (C = 1), PPT entanglement
// (C = i Omega_A + (-i Omega_B)), steering A->B (C = 0_A + i Omega_B),
// separability (f(Q) = g(Q) = Q_A + Q_B, D = i Omega), and the reduced
// one-sided separability form. The first three admit eigenvalue fast paths,
// which are the default; the SDP route works for every cone.

#include <gaussrt/sdp.hpp>
#include <gaussrt/symplectic.hpp>

#include <optional>

namespace gaussrt {

enum class Theory {
    nonclassicality,
    ppt,
    steering,
    separability,
    separability_simplified,
};

inline const char* to_string(Theory t) {
    switch (t) {
        case Theory::nonclassicality: return "nonclassicality";
        case Theory::ppt: return "ppt";
        case Theory::steering: return "steering";
        case Theory::separability: return "separability";
        default: return "separability_simplified";
    }
}

inline Theory theory_from_string(const std::string& s) {
    for (Theory t : {Theory::nonclassicality, Theory::ppt, Theory::steering, Theory::separability,
                     Theory::separability_simplified})
        if (s == to_string(t)) return t;
    throw std::invalid_argument("unknown theory '" + s + "'");
}

// Basis of real symmetric d x d matrices (scaling of elements irrelevant).
inline std::vector<Mat> symmetric_basis(int d) {
    std::vector<Mat> basis;
    basis.reserve(d * (d + 1) / 2);
    for (int k = 0; k < d; ++k)
        for (int l = k; l < d; ++l) {
            Mat E = Mat::Zero(d, d);
            E(k, l) = 1.0;
            E(l, k) = 1.0;
            basis.push_back(E);
        }
    return basis;
}

struct FreeConeSpec {
    Theory theory = Theory::nonclassicality;
    ModePartition partition;
    std::string party_a;  // empty for nonclassicality
    std::string party_b;

    // Q is parameterized by a real vector q of length q_dim through the
    // bases below; user-defined cones may fill these directly.
    int q_dim = 0;
    std::vector<Mat> f_basis;  // 2N x 2N terms entering V >= f(Q) + C
    std::vector<Mat> g_basis;  // g_dim x g_dim terms entering g(Q) >= D
    int g_dim = 0;             // 0 when the second inequality is absent
    CMat C;                    // 2N x 2N Hermitian
    CMat D;                    // g_dim x g_dim Hermitian

    int dim() const { return static_cast<int>(C.rows()); }
    bool has_analytic() const {
        return theory == Theory::nonclassicality || theory == Theory::ppt ||
               theory == Theory::steering;
    }
    Mat f_of(const Vec& q) const {
        Mat F = Mat::Zero(dim(), dim());
        for (int i = 0; i < q_dim; ++i) F += q[i] * f_basis[i];
        return F;
    }
    Mat g_of(const Vec& q) const {
        Mat G = Mat::Zero(g_dim, g_dim);
        for (int i = 0; i < q_dim; ++i) G += q[i] * g_basis[i];
        return G;
    }
};

namespace detail {

inline Mat embed_rows(const Mat& E, const std::vector<int>& idx, int full_dim) {
    Mat F = Mat::Zero(full_dim, full_dim);
    for (int r = 0; r < E.rows(); ++r)
        for (int c = 0; c < E.cols(); ++c) F(idx[r], idx[c]) = E(r, c);
    return F;
}

inline void require_bipartite(const ModePartition& part, const std::string& a,
                              const std::string& b) {
    if (a == b) throw std::invalid_argument("cone_spec: parties must differ");
    const auto parties = part.parties();
    if (parties.size() != 2 || !part.has_party(a) || !part.has_party(b))
        throw std::invalid_argument(
            "cone_spec: bipartite theory needs a partition with exactly parties '" + a + "' and '" +
            b + "'");
}

}  // namespace detail

inline FreeConeSpec cone_spec(Theory theory, const ModePartition& partition,
                              const std::string& party_a = "A", const std::string& party_b = "B") {
    const int N = partition.modes();
    const int dim = 2 * N;
    FreeConeSpec spec;
    spec.theory = theory;
    spec.partition = partition;

    if (theory == Theory::nonclassicality) {
        spec.C = CMat::Identity(dim, dim);
        return spec;
    }

    detail::require_bipartite(partition, party_a, party_b);
    spec.party_a = party_a;
    spec.party_b = party_b;
    const auto idx_a = xxpp_indices(N, partition.modes_of(party_a));
    const auto idx_b = xxpp_indices(N, partition.modes_of(party_b));
    const int n_a = static_cast<int>(idx_a.size()) / 2;
    const int n_b = static_cast<int>(idx_b.size()) / 2;

    switch (theory) {
        case Theory::ppt: {
            const Mat SB = momentum_flip(N, partition.modes_of(party_b));
            spec.C = kI * (SB * omega(N) * SB).cast<std::complex<double>>();
            break;
        }
        case Theory::steering: {
            spec.C = CMat::Zero(dim, dim);
            Mat om_b = omega(n_b);
            for (int r = 0; r < 2 * n_b; ++r)
                for (int c = 0; c < 2 * n_b; ++c) spec.C(idx_b[r], idx_b[c]) = kI * om_b(r, c);
            break;
        }
        case Theory::separability: {
            for (const Mat& E : symmetric_basis(2 * n_a))
                spec.f_basis.push_back(detail::embed_rows(E, idx_a, dim));
            for (const Mat& E : symmetric_basis(2 * n_b))
                spec.f_basis.push_back(detail::embed_rows(E, idx_b, dim));
            spec.g_basis = spec.f_basis;
            spec.q_dim = static_cast<int>(spec.f_basis.size());
            spec.g_dim = dim;
            spec.C = CMat::Zero(dim, dim);
            // i Omega_A + i Omega_B party-embedded equals the global i Omega:
            // the symplectic form has no cross-party entries in xxpp order.
            spec.D = kI * omega(N).cast<std::complex<double>>();
            break;
        }
        case Theory::separability_simplified: {
            for (const Mat& E : symmetric_basis(2 * n_a))
                spec.f_basis.push_back(detail::embed_rows(E, idx_a, dim));
            spec.g_basis = symmetric_basis(2 * n_a);
            spec.q_dim = static_cast<int>(spec.f_basis.size());
            spec.g_dim = 2 * n_a;
            spec.C = CMat::Zero(dim, dim);
            Mat om_b = omega(n_b);
            for (int r = 0; r < 2 * n_b; ++r)
                for (int c = 0; c < 2 * n_b; ++c) spec.C(idx_b[r], idx_b[c]) = kI * om_b(r, c);
            spec.D = kI * omega(n_a).cast<std::complex<double>>();
            break;
        }
        default:
            throw std::invalid_argument("cone_spec: unhandled theory");
    }
    return spec;
}

inline double hs_pair(const CMat& X, const CMat& Y) { return std::real((X * Y).trace()); }

// Strictly feasible dual point (W*, Y*) used to vouch for the reported
// duality gap; identity-plus-form constructions normalized to
// <W*,C> + <Y*,D> = 1 with the f/g adjoint constraint satisfied exactly.
inline std::pair<CMat, CMat> slater_point(const FreeConeSpec& spec) {
    const int dim = spec.dim();
    const int N = dim / 2;
    const CMat iom = kI * omega(N).cast<std::complex<double>>();
    switch (spec.theory) {
        case Theory::nonclassicality:
            return {CMat::Identity(dim, dim) / dim, CMat()};
        case Theory::ppt: {
            const Mat SB = momentum_flip(N, spec.partition.modes_of(spec.party_b));
            CMat om_t = kI * (SB * omega(N) * SB).cast<std::complex<double>>();
            return {CMat::Identity(dim, dim) / N + om_t / (2.0 * N), CMat()};
        }
        case Theory::steering: {
            const auto idx_b = xxpp_indices(N, spec.partition.modes_of(spec.party_b));
            const int n_b = static_cast<int>(idx_b.size()) / 2;
            CMat W = CMat::Identity(dim, dim);
            Mat om_b = omega(n_b);
            for (int r = 0; r < 2 * n_b; ++r) {
                for (int c = 0; c < 2 * n_b; ++c)
                    W(idx_b[r], idx_b[c]) = kI * om_b(r, c) / (2.0 * n_b);
                W(idx_b[r], idx_b[r]) += 1.0 / n_b;
            }
            return {W, CMat()};
        }
        case Theory::separability:
            return {CMat::Identity(dim, dim) / N, CMat::Identity(dim, dim) / N + iom / (2.0 * N)};
        case Theory::separability_simplified: {
            const auto idx_a = xxpp_indices(N, spec.partition.modes_of(spec.party_a));
            const int n_a = static_cast<int>(idx_a.size()) / 2;
            CMat W = CMat::Identity(dim, dim) / N + iom / (2.0 * N);
            CMat Y = CMat::Identity(2 * n_a, 2 * n_a) / N +
                     kI * omega(n_a).cast<std::complex<double>>() / (2.0 * N);
            return {W, Y};
        }
    }
    throw std::logic_error("slater_point: unhandled theory");
}

inline bool slater_check(const FreeConeSpec& spec) {
    std::pair<CMat, CMat> pt;
    try {
        pt = slater_point(spec);
    } catch (const std::exception&) {
        return false;
    }
    const auto& [W, Y] = pt;
    Eigen::SelfAdjointEigenSolver<CMat> ew(W);
    if (ew.eigenvalues().minCoeff() <= 1e-9) return false;
    if (spec.g_dim > 0) {
        Eigen::SelfAdjointEigenSolver<CMat> ey(Y);
        if (ey.eigenvalues().minCoeff() <= 1e-9) return false;
    }
    double norm = hs_pair(W, spec.C);
    if (spec.g_dim > 0) norm += hs_pair(Y, spec.D);
    if (std::abs(norm - 1.0) > 1e-10) return false;
    for (int i = 0; i < spec.q_dim; ++i) {
        const double lhs = hs_pair(spec.f_basis[i].cast<std::complex<double>>(), W);
        const double rhs =
            spec.g_dim > 0 ? hs_pair(spec.g_basis[i].cast<std::complex<double>>(), Y) : 0.0;
        if (std::abs(lhs - rhs) > 1e-10) return false;
    }
    return true;
}

// kappa(V) <= max{1, ||V^{-1}|| ||W0||} in spectral norms, for any cone
// member W0 (identity by default: the vacuum belongs to every built-in cone).
inline double kappa_upper_bound(const Mat& V, const Mat& W0) {
    Eigen::SelfAdjointEigenSolver<Mat> ev(V);
    Eigen::SelfAdjointEigenSolver<Mat> ew(W0);
    const double lmin = ev.eigenvalues().minCoeff();
    if (lmin <= 0.0) throw std::invalid_argument("kappa_upper_bound: V not positive definite");
    const double wmax = ew.eigenvalues().cwiseAbs().maxCoeff();
    return std::max(1.0, wmax / lmin);
}

inline double kappa_upper_bound(const Mat& V) {
    return kappa_upper_bound(V, Mat::Identity(V.rows(), V.cols()));
}

enum class QuantMethod { automatic, analytic, sdp, bisect };

struct KappaOptions {
    QuantMethod method = QuantMethod::automatic;
    double member_tol = 1e-7;
    SdpOptions sdp;
};

struct UpsilonReport {
    double upsilon = 0.0;
    CMat W;  // dual witness for the first inequality
    CMat Y;  // dual witness for the second inequality (empty if absent)
    double witness_normalization = 0.0;  // <W,C> + <Y,D>, expected 1
    double witness_value = 0.0;          // <W,V>, below 1 certifies a resource
    double gap = 0.0;
    int iterations = 0;
    bool slater_ok = false;
    SdpStatus status = SdpStatus::optimal;
    std::string method;
    std::string message;
};

struct ResourceReport {
    double kappa = 1.0;
    double upsilon = 1.0;
    bool member = false;
    double xi = 1.0;  // optimal scale of the primal program
    Mat Q_model;      // f(Q) at the optimum (empty when the cone has no Q)
    CMat W;
    CMat Y;
    double witness_normalization = 0.0;
    double witness_value = 0.0;
    double gap = 0.0;
    int iterations = 0;
    bool slater_ok = false;
    std::string method;
    std::string message;
};

namespace detail {

struct AnalyticDual {
    double upsilon;
    CMat W;
};

inline AnalyticDual analytic_nonclassicality(const Mat& V) {
    Eigen::SelfAdjointEigenSolver<Mat> es(V);
    Vec v = es.eigenvectors().col(0);
    return {es.eigenvalues()(0), (v * v.transpose()).cast<std::complex<double>>()};
}

// Rank-one witness on the smallest symplectic eigenvalue of X = S^{-1} D S^{-T}:
// the kernel of X/nu_min - i Omega is spanned by S^T (e_x - i e_p)/sqrt(2)
// on that mode, and <W, i Omega> = 1 holds by the symplectic relation.
inline CMat nu_min_witness(const WilliamsonResult& wr) {
    const int n = static_cast<int>(wr.d.size());
    CVec z0 = CVec::Zero(2 * n);
    z0(0) = 1.0 / std::sqrt(2.0);
    z0(n) = -kI / std::sqrt(2.0);
    CVec v = wr.S.transpose().cast<std::complex<double>>() * z0;
    return v * v.adjoint();
}

inline AnalyticDual analytic_ppt(const Mat& V, const FreeConeSpec& spec) {
    const int N = spec.partition.modes();
    const Mat Vt = partial_transpose(V, spec.partition, spec.party_b);
    WilliamsonResult wr = williamson(Vt);
    const Mat SB = momentum_flip(N, spec.partition.modes_of(spec.party_b));
    const CMat SBc = SB.cast<std::complex<double>>();
    return {wr.d(0), SBc * nu_min_witness(wr) * SBc};
}

inline AnalyticDual analytic_steering(const Mat& V, const FreeConeSpec& spec) {
    const int N = spec.partition.modes();
    const auto idx_a = xxpp_indices(N, spec.partition.modes_of(spec.party_a));
    const auto idx_b = xxpp_indices(N, spec.partition.modes_of(spec.party_b));
    const Mat VS = schur_complement(V, idx_a);
    WilliamsonResult wr = williamson(VS);
    // Lift through K = [-V_A^{-1} V_AB ; I_B]: K^T V K is the Schur
    // complement and K^T C K restricts to i Omega_B, so normalization and
    // value carry over from the B-side witness unchanged.
    const Mat VA = submatrix(V, idx_a, idx_a);
    const Mat VAB = submatrix(V, idx_a, idx_b);
    Mat K = Mat::Zero(2 * N, static_cast<int>(idx_b.size()));
    Mat top = -VA.llt().solve(VAB);
    for (size_t r = 0; r < idx_a.size(); ++r) K.row(idx_a[r]) = top.row(static_cast<int>(r));
    for (size_t r = 0; r < idx_b.size(); ++r) K(idx_b[r], static_cast<int>(r)) = 1.0;
    const CMat Kc = K.cast<std::complex<double>>();
    return {wr.d(0), Kc * nu_min_witness(wr) * Kc.adjoint()};
}

inline AnalyticDual analytic_dual(const Mat& V, const FreeConeSpec& spec) {
    switch (spec.theory) {
        case Theory::nonclassicality: return analytic_nonclassicality(V);
        case Theory::ppt: return analytic_ppt(V, spec);
        case Theory::steering: return analytic_steering(V, spec);
        default:
            throw std::invalid_argument(std::string("no analytic path for theory ") +
                                        to_string(spec.theory));
    }
}

inline SdpProblem upsilon_problem(const Mat& V, const FreeConeSpec& spec) {
    SdpProblem p(1 + spec.q_dim);
    Vec c = Vec::Zero(1 + spec.q_dim);
    c[0] = -1.0;  // maximize zeta
    p.set_objective(c);
    int b1 = p.add_block(V.cast<std::complex<double>>());
    p.set_coeff(b1, 0, -spec.C);
    for (int i = 0; i < spec.q_dim; ++i)
        p.set_coeff(b1, 1 + i, (-spec.f_basis[i]).cast<std::complex<double>>());
    if (spec.g_dim > 0) {
        int b2 = p.add_block(CMat::Zero(spec.g_dim, spec.g_dim));
        p.set_coeff(b2, 0, -spec.D);
        for (int i = 0; i < spec.q_dim; ++i)
            p.set_coeff(b2, 1 + i, spec.g_basis[i].cast<std::complex<double>>());
    }
    return p;
}

inline SdpProblem kappa_problem(const Mat& V, const FreeConeSpec& spec) {
    SdpProblem p(1 + spec.q_dim);
    Vec c = Vec::Zero(1 + spec.q_dim);
    c[0] = 1.0;  // minimize xi
    p.set_objective(c);
    int b1 = p.add_block(-spec.C);
    p.set_coeff(b1, 0, V.cast<std::complex<double>>());
    for (int i = 0; i < spec.q_dim; ++i)
        p.set_coeff(b1, 1 + i, (-spec.f_basis[i]).cast<std::complex<double>>());
    if (spec.g_dim > 0) {
        int b2 = p.add_block(-spec.D);
        for (int i = 0; i < spec.q_dim; ++i)
            p.set_coeff(b2, 1 + i, spec.g_basis[i].cast<std::complex<double>>());
    }
    p.add_scalar_lower_bound(0, 1.0);
    return p;
}

// Feasibility margin of { t V >= f(Q) + C, g(Q) >= D }: the largest slack m
// with both sides >= m I; nonnegative (up to tolerance) iff t V is a member.
inline double cone_margin(const Mat& V, const FreeConeSpec& spec, double t,
                          const SdpOptions& opt) {
    if (spec.q_dim == 0) {
        Eigen::SelfAdjointEigenSolver<CMat> es(t * V.cast<std::complex<double>>() - spec.C);
        return es.eigenvalues().minCoeff();
    }
    SdpProblem p(1 + spec.q_dim);
    Vec c = Vec::Zero(1 + spec.q_dim);
    c[0] = -1.0;  // maximize the margin
    p.set_objective(c);
    int b1 = p.add_block(t * V.cast<std::complex<double>>() - spec.C);
    p.set_coeff(b1, 0, -CMat::Identity(spec.dim(), spec.dim()));
    for (int i = 0; i < spec.q_dim; ++i)
        p.set_coeff(b1, 1 + i, (-spec.f_basis[i]).cast<std::complex<double>>());
    if (spec.g_dim > 0) {
        int b2 = p.add_block(-spec.D);
        p.set_coeff(b2, 0, -CMat::Identity(spec.g_dim, spec.g_dim));
        for (int i = 0; i < spec.q_dim; ++i)
            p.set_coeff(b2, 1 + i, spec.g_basis[i].cast<std::complex<double>>());
    }
    SdpSolution sol = solve(p, opt);
    if (sol.status != SdpStatus::optimal)
        throw std::runtime_error(std::string("cone margin solver failed: ") +
                                 to_string(sol.status) + " (" + sol.message + ")");
    return sol.x[0];
}

}  // namespace detail

inline UpsilonReport upsilon(const Mat& V, const FreeConeSpec& spec, const KappaOptions& opt = {}) {
    if (V.rows() != spec.dim())
        throw std::invalid_argument("upsilon: dimension mismatch between V and cone spec");
    QuantMethod method = opt.method;
    if (method == QuantMethod::automatic || method == QuantMethod::bisect)
        method = spec.has_analytic() ? QuantMethod::analytic : QuantMethod::sdp;

    UpsilonReport rep;
    if (method == QuantMethod::analytic) {
        detail::AnalyticDual ad = detail::analytic_dual(V, spec);
        rep.upsilon = ad.upsilon;
        rep.W = ad.W;
        rep.slater_ok = true;
        rep.method = "analytic";
    } else {
        SdpSolution sol = solve(detail::upsilon_problem(V, spec), opt.sdp);
        rep.status = sol.status;
        rep.gap = sol.gap;
        rep.iterations = sol.iterations;
        rep.method = "sdp";
        rep.message = sol.message;
        if (sol.status != SdpStatus::optimal) return rep;  // flagged, values absent
        rep.upsilon = sol.x[0];
        rep.W = sol.dual[0];
        if (spec.g_dim > 0) rep.Y = sol.dual[1];
        rep.slater_ok = slater_check(spec);
        if (!rep.slater_ok) rep.message = "duality gap reported without Slater verification";
    }
    rep.witness_normalization = hs_pair(rep.W, spec.C);
    if (spec.g_dim > 0 && rep.Y.size() > 0) rep.witness_normalization += hs_pair(rep.Y, spec.D);
    rep.witness_value = hs_pair(rep.W, V.cast<std::complex<double>>());
    return rep;
}

inline ResourceReport kappa(const Mat& V, const FreeConeSpec& spec, const KappaOptions& opt = {}) {
    if (V.rows() != spec.dim())
        throw std::invalid_argument("kappa: dimension mismatch between V and cone spec");
    QcmReport qr = validate_qcm(V);
    if (!qr.valid) throw std::invalid_argument("kappa: V is not a valid QCM: " + qr.reason);

    QuantMethod method = opt.method;
    if (method == QuantMethod::automatic)
        method = spec.has_analytic() ? QuantMethod::analytic : QuantMethod::sdp;
    if (method == QuantMethod::analytic && !spec.has_analytic())
        throw std::invalid_argument(std::string("no analytic path for theory ") +
                                    to_string(spec.theory));

    ResourceReport rep;
    switch (method) {
        case QuantMethod::analytic: {
            UpsilonReport ur = upsilon(V, spec, opt);
            rep.kappa = std::max(1.0, 1.0 / ur.upsilon);
            rep.method = "analytic";
            rep.upsilon = ur.upsilon;
            rep.W = ur.W;
            rep.Y = ur.Y;
            rep.witness_normalization = ur.witness_normalization;
            rep.witness_value = ur.witness_value;
            rep.slater_ok = ur.slater_ok;
            break;
        }
        case QuantMethod::sdp:
        case QuantMethod::bisect: {
            if (method == QuantMethod::sdp) {
                SdpSolution sol = solve(detail::kappa_problem(V, spec), opt.sdp);
                if (sol.status != SdpStatus::optimal)
                    throw std::runtime_error(std::string("kappa solver: ") +
                                             to_string(sol.status) + " after " +
                                             std::to_string(sol.iterations) + " iterations (" +
                                             sol.message + ")");
                rep.kappa = sol.x[0];
                rep.gap = sol.gap;
                rep.iterations = sol.iterations;
                rep.method = "sdp";
                if (spec.q_dim > 0) rep.Q_model = spec.f_of(sol.x.tail(spec.q_dim));
            } else {
                const double hi = kappa_upper_bound(V);
                const double eps = 1e-10 * (1.0 + max_abs(V) + max_abs(spec.C));
                rep.kappa = feasibility_bisect(
                    [&](double t) { return detail::cone_margin(V, spec, t, opt.sdp) >= -eps; },
                    1.0, hi, 1e-9);
                rep.method = "bisect";
            }
            KappaOptions uopt = opt;
            uopt.method = spec.has_analytic() ? QuantMethod::analytic : QuantMethod::sdp;
            UpsilonReport ur = upsilon(V, spec, uopt);
            if (ur.status != SdpStatus::optimal)
                throw std::runtime_error(std::string("upsilon solver: ") + to_string(ur.status) +
                                         " (" + ur.message + ")");
            rep.upsilon = ur.upsilon;
            rep.W = ur.W;
            rep.Y = ur.Y;
            rep.witness_normalization = ur.witness_normalization;
            rep.witness_value = ur.witness_value;
            rep.slater_ok = ur.slater_ok;
            rep.gap = std::max(rep.gap, ur.gap);
            rep.iterations += ur.iterations;
            rep.message = ur.message;
            break;
        }
        default:
            throw std::logic_error("kappa: unhandled method");
    }
    rep.xi = rep.kappa;
    rep.member = rep.kappa <= 1.0 + opt.member_tol;
    return rep;
}

inline bool membership(const Mat& V, const FreeConeSpec& spec, double tol = 1e-7) {
    KappaOptions opt;
    opt.member_tol = tol;
    return kappa(V, spec, opt).member;
}

// Steerability of B by measurements on A:
//   N = -sum_k log min{1, nu_k(V / V_A)};
// equals log kappa_steering when B holds a single mode.
inline double steerability_N(const Mat& V, const ModePartition& partition,
                             const std::string& party_a = "A", const std::string& party_b = "B") {
    detail::require_bipartite(partition, party_a, party_b);
    const auto idx_a = xxpp_indices(partition.modes(), partition.modes_of(party_a));
    const Mat VS = schur_complement(V, idx_a);
    const Vec nu = symplectic_eigenvalues(VS);
    double total = 0.0;
    for (int k = 0; k < nu.size(); ++k) total -= std::log(std::min(1.0, nu(k)));
    return total;
}

}  // namespace gaussrt
