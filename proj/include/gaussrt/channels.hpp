#pragma once

// Gaussian channels at covariance-matrix level. A channel is either a Choi
// covariance matrix (input modes first) contracted onto inputs through a
// Schur complement, or one of the direct map kinds (loss, symplectic
// conjugation, ancilla attachment, classical displacement noise) whose CM
// action is known in closed form. Direct kinds materialize a finite-squeezing
// Choi form on demand; identity-like channels have no exact finite Choi
// matrix, so the r-parameterized form carries an O(e^{-2r}) error.

#include <gaussrt/cones.hpp>
#include <gaussrt/states.hpp>

#include <limits>

namespace gaussrt {

enum class ChannelKind { choi, loss, local_symplectic, add_ancilla, displacement_noise };

inline const char* to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::choi: return "choi";
        case ChannelKind::loss: return "loss";
        case ChannelKind::local_symplectic: return "local_symplectic";
        case ChannelKind::add_ancilla: return "add_ancilla";
        default: return "displacement_noise";
    }
}

// Classical noise kernel of a random-displacement channel; V maps to V + K.
struct NoiseKernel {
    Mat K;

    explicit NoiseKernel(Mat k, double tol = 1e-10) : K(std::move(k)) {
        if (K.rows() != K.cols() || K.rows() % 2 != 0)
            throw std::invalid_argument("NoiseKernel: kernel must be 2n x 2n");
        const double scale = std::max(1.0, max_abs(K));
        if (max_abs(Mat(K - K.transpose())) > tol * scale)
            throw std::invalid_argument("NoiseKernel: kernel not symmetric");
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (K + K.transpose())));
        if (es.eigenvalues().minCoeff() < -tol * scale)
            throw std::invalid_argument("NoiseKernel: indefinite kernel, min eigenvalue " +
                                        fmt_sci(es.eigenvalues().minCoeff()));
    }
};

struct GaussianChannel {
    ChannelKind kind = ChannelKind::choi;
    int n_in = 0;
    int n_out = 0;
    // Default mode labels; the state overload of apply_channel keeps the
    // input state's own labels whenever the mode count allows it.
    ModePartition in_partition;
    ModePartition out_partition;

    Mat gamma;              // choi: CM on n_in + n_out modes, inputs first
    bool physical = true;   // gamma >= i Omega (vs merely gamma >= 0)
    double eta = 1.0;       // loss transmissivity
    double env_nbar = 0.0;  // loss environment occupation
    Mat S;                  // local_symplectic matrix
    Mat W;                  // add_ancilla covariance
    ModePartition w_partition;
    Mat K;                  // displacement_noise kernel
};

inline GaussianChannel make_channel_choi(const Mat& gamma, int n_in, int n_out,
                                         bool allow_unphysical = false) {
    if (n_in < 1 || n_out < 1 || gamma.rows() != 2 * (n_in + n_out) ||
        gamma.cols() != gamma.rows())
        throw std::invalid_argument("make_channel_choi: dimension mismatch");
    GaussianChannel ch;
    ch.kind = ChannelKind::choi;
    ch.n_in = n_in;
    ch.n_out = n_out;
    ch.in_partition = ModePartition::uniform(n_in);
    ch.out_partition = ModePartition::uniform(n_out);
    ch.gamma = gamma;
    QcmReport rep = validate_qcm(gamma);
    ch.physical = rep.valid;
    if (!rep.valid) {
        if (!allow_unphysical)
            throw std::invalid_argument("make_channel_choi: Choi matrix is not a QCM (" +
                                        rep.reason + "); pass allow_unphysical to keep it");
        // Maps with gamma >= 0 still transform QCMs monotonically even
        // though they are not completely positive.
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (gamma + gamma.transpose())));
        if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, max_abs(gamma)))
            throw std::invalid_argument(
                "make_channel_choi: Choi matrix is not even positive semidefinite");
    }
    return ch;
}

inline GaussianChannel make_loss(double eta, double nbar = 0.0, int n = 1,
                                 const ModePartition* part = nullptr) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("make_loss: transmissivity must lie in [0, 1]");
    if (nbar < 0.0) throw std::invalid_argument("make_loss: nbar must be >= 0");
    GaussianChannel ch;
    ch.kind = ChannelKind::loss;
    ch.n_in = ch.n_out = part ? part->modes() : n;
    ch.in_partition = ch.out_partition = part ? *part : ModePartition::uniform(n);
    ch.eta = eta;
    ch.env_nbar = nbar;
    return ch;
}

inline GaussianChannel make_local_symplectic(const Mat& S, const ModePartition* part = nullptr) {
    if (S.rows() != S.cols() || S.rows() % 2 != 0)
        throw std::invalid_argument("make_local_symplectic: S must be 2n x 2n");
    const int n = static_cast<int>(S.rows()) / 2;
    const Mat om = omega(n);
    if (max_abs(Mat(S * om * S.transpose() - om)) > 1e-9)
        throw std::invalid_argument("make_local_symplectic: S is not symplectic within 1e-9");
    GaussianChannel ch;
    ch.kind = ChannelKind::local_symplectic;
    ch.n_in = ch.n_out = n;
    ch.in_partition = ch.out_partition = part ? *part : ModePartition::uniform(n);
    if (part && part->modes() != n)
        throw std::invalid_argument("make_local_symplectic: partition mode count mismatch");
    ch.S = S;
    return ch;
}

// Rotation mixing modes i and j identically in x and p:
//   x_i' = cos(theta) x_i - sin(theta) x_j,  x_j' = sin(theta) x_i + cos(theta) x_j.
// At theta = pi/4, mode-by-mode mixing of a product V (+) W yields the block
// form [[V+W, V-W], [V-W, V+W]] / 2.
inline Mat beam_splitter_symplectic(double theta, int mode_i, int mode_j, int n) {
    if (mode_i == mode_j || mode_i < 0 || mode_j < 0 || mode_i >= n || mode_j >= n)
        throw std::invalid_argument("beam_splitter_symplectic: bad mode pair");
    const double c = std::cos(theta), s = std::sin(theta);
    Mat S = Mat::Identity(2 * n, 2 * n);
    for (int off : {0, n}) {  // same rotation on the x and p quadrature pairs
        S(off + mode_i, off + mode_i) = c;
        S(off + mode_i, off + mode_j) = -s;
        S(off + mode_j, off + mode_i) = s;
        S(off + mode_j, off + mode_j) = c;
    }
    return S;
}

inline GaussianChannel make_beam_splitter(double theta, int mode_i = 0, int mode_j = 1,
                                          int n = 2, const ModePartition* part = nullptr) {
    return make_local_symplectic(beam_splitter_symplectic(theta, mode_i, mode_j, n), part);
}

inline GaussianChannel make_add_ancilla(const Mat& W, const ModePartition& w_partition,
                                        const ModePartition& in_partition) {
    QcmReport rep = validate_qcm(W);
    if (!rep.valid)
        throw std::invalid_argument("make_add_ancilla: ancilla is not a QCM: " + rep.reason);
    if (W.rows() != 2 * w_partition.modes())
        throw std::invalid_argument("make_add_ancilla: ancilla partition mismatch");
    GaussianChannel ch;
    ch.kind = ChannelKind::add_ancilla;
    ch.n_in = in_partition.modes();
    ch.n_out = ch.n_in + w_partition.modes();
    ch.in_partition = in_partition;
    std::vector<std::string> labels = in_partition.labels;
    labels.insert(labels.end(), w_partition.labels.begin(), w_partition.labels.end());
    ch.out_partition = ModePartition(std::move(labels));
    ch.W = W;
    ch.w_partition = w_partition;
    return ch;
}

inline GaussianChannel make_random_displacement(const NoiseKernel& kernel,
                                                const ModePartition* part = nullptr) {
    GaussianChannel ch;
    ch.kind = ChannelKind::displacement_noise;
    ch.n_in = ch.n_out = static_cast<int>(kernel.K.rows()) / 2;
    ch.in_partition = ch.out_partition = part ? *part : ModePartition::uniform(ch.n_in);
    if (part && part->modes() != ch.n_in)
        throw std::invalid_argument("make_random_displacement: partition mode count mismatch");
    ch.K = kernel.K;
    return ch;
}

inline Mat random_displacement(const Mat& V, const NoiseKernel& kernel) {
    if (V.rows() != kernel.K.rows())
        throw std::invalid_argument("random_displacement: dimension mismatch");
    return V + kernel.K;
}

inline Mat apply_channel(const GaussianChannel& ch, const Mat& V) {
    if (V.rows() != 2 * ch.n_in || V.cols() != 2 * ch.n_in)
        throw std::invalid_argument("apply_channel: input has wrong dimension");
    switch (ch.kind) {
        case ChannelKind::loss:
            return ch.eta * V +
                   (1.0 - ch.eta) * (2.0 * ch.env_nbar + 1.0) * Mat::Identity(V.rows(), V.cols());
        case ChannelKind::local_symplectic:
            return ch.S * V * ch.S.transpose();
        case ChannelKind::add_ancilla:
            return direct_sum(V, ModePartition::uniform(ch.n_in, "i"), ch.W,
                              ModePartition::uniform(ch.w_partition.modes(), "j"))
                .first;
        case ChannelKind::displacement_noise:
            return V + ch.K;
        case ChannelKind::choi: {
            const int N = ch.n_in + ch.n_out;
            std::vector<int> in_modes(ch.n_in);
            for (int i = 0; i < ch.n_in; ++i) in_modes[i] = i;
            const auto idx_in = xxpp_indices(N, in_modes);
            const Mat flip = momentum_flip(ch.n_in);
            const Mat sv = flip * V * flip;
            Mat M = ch.gamma;
            for (int r = 0; r < 2 * ch.n_in; ++r)
                for (int c = 0; c < 2 * ch.n_in; ++c) M(idx_in[r], idx_in[c]) += sv(r, c);
            // Pivot on the input block; a near-singular pivot marks a
            // boundary channel and surfaces as SingularPivot.
            return schur_complement(M, idx_in);
        }
    }
    throw std::logic_error("apply_channel: unhandled kind");
}

inline GaussianState apply_channel(const GaussianChannel& ch, const GaussianState& st) {
    Mat V = apply_channel(ch, st.V);
    const int n = ch.n_in;
    Vec s;
    ModePartition part =
        st.partition.modes() == ch.n_in ? st.partition : ch.in_partition;
    switch (ch.kind) {
        case ChannelKind::loss:
            s = std::sqrt(ch.eta) * st.s;
            break;
        case ChannelKind::local_symplectic:
            s = ch.S * st.s;
            break;
        case ChannelKind::displacement_noise:
            s = st.s;  // the mean of the displacement distribution is zero
            break;
        case ChannelKind::add_ancilla: {
            const int m = ch.w_partition.modes();
            s = Vec::Zero(2 * (n + m));
            s.head(n) = st.s.head(n);
            s.segment(n + m, n) = st.s.tail(n);
            std::vector<std::string> labels = part.labels;
            labels.insert(labels.end(), ch.w_partition.labels.begin(),
                          ch.w_partition.labels.end());
            part = ModePartition(std::move(labels));
            break;
        }
        case ChannelKind::choi:
            // A Choi covariance matrix pins down the map on second moments
            // only; it carries no displacement data.
            throw std::invalid_argument(
                "apply_channel: mean transport is undefined for raw Choi channels; "
                "use the covariance overload");
    }
    return GaussianState{std::move(V), std::move(s), std::move(part)};
}

namespace detail {

// Pairwise two-mode squeezing between input copy i and output copy i; the
// r -> infinity limit is the identity channel's Choi matrix.
inline Mat choi_seed(int n, double r) {
    const int N = 2 * n;
    const double c = std::cosh(2.0 * r), s = std::sinh(2.0 * r);
    Mat G = c * Mat::Identity(2 * N, 2 * N);
    for (int i = 0; i < n; ++i) {
        G(i, n + i) = G(n + i, i) = s;
        G(N + i, N + n + i) = G(N + n + i, N + i) = -s;
    }
    return G;
}

}  // namespace detail

// Finite-squeezing Choi covariance matrix of a direct-map channel. The
// contracted output differs from the exact map by O(e^{-2r}) times the input
// scale (exactly zero on fixed points such as the vacuum under pure loss).
// r = 5 gives ~1e-4 absolute error on moderate inputs, plenty for
// certification; pass r ~ 9 when the contraction itself must be tight,
// beyond which cosh(2r)*eps rounding takes over.
inline GaussianChannel choi_form(const GaussianChannel& ch, double r = 5.0) {
    if (ch.kind == ChannelKind::choi) return ch;
    const int n = ch.n_in;
    const int N = 2 * n;
    Mat G = detail::choi_seed(n, r);
    // Global xxpp row of quadrature a (0..2n) of output copy k = a mod n.
    auto out_row = [&](int a) { return a < n ? n + a : N + n + (a - n); };
    GaussianChannel out;
    out.kind = ChannelKind::choi;
    out.n_in = ch.n_in;
    out.n_out = ch.n_out;
    out.in_partition = ch.in_partition;
    out.out_partition = ch.out_partition;
    switch (ch.kind) {
        case ChannelKind::loss: {
            Vec d = Vec::Ones(2 * N);
            for (int i = 0; i < n; ++i) d[n + i] = d[N + n + i] = std::sqrt(ch.eta);
            G = d.asDiagonal() * G * d.asDiagonal();
            const double m = (1.0 - ch.eta) * (2.0 * ch.env_nbar + 1.0);
            for (int i = 0; i < n; ++i) {
                G(n + i, n + i) += m;
                G(N + n + i, N + n + i) += m;
            }
            break;
        }
        case ChannelKind::local_symplectic: {
            Mat T = Mat::Identity(2 * N, 2 * N);
            for (int a = 0; a < 2 * n; ++a)
                for (int b = 0; b < 2 * n; ++b) T(out_row(a), out_row(b)) = ch.S(a, b);
            G = T * G * T.transpose();
            break;
        }
        case ChannelKind::add_ancilla:
            G = direct_sum(G, ModePartition::uniform(N, "c"), ch.W,
                           ModePartition::uniform(ch.w_partition.modes(), "d"))
                    .first;
            break;
        case ChannelKind::displacement_noise:
            for (int a = 0; a < 2 * n; ++a)
                for (int b = 0; b < 2 * n; ++b) G(out_row(a), out_row(b)) += ch.K(a, b);
            break;
        case ChannelKind::choi:
            break;  // handled above
    }
    out.gamma = std::move(G);
    return out;
}

struct CertifyOptions {
    double tol = 1e-7;  // accept per-probe margins >= -tol
    // Squeezing parameter for materialized Choi forms. The finite-r form is
    // the exact Choi matrix of (channel o mode-local free pre-channel), so
    // free channels certify at any r; violations smaller than ~e^{-2r} can
    // slip through, while the margin SDP conditioning grows as e^{4r}.
    // r = 2.5 resolves violations above ~7e-3 and keeps the SDP solid.
    double choi_r = 2.5;
    // Cone the probes must belong to. When absent and the channel preserves
    // the mode count, the output cone doubles as the input cone; otherwise
    // the probe pre-check is skipped.
    const FreeConeSpec* input_cone = nullptr;
    SdpOptions sdp;
};

struct FreeCertificate {
    bool passed = true;
    int violating_probe = -1;
    double min_margin = std::numeric_limits<double>::infinity();
    std::vector<double> margins;
    std::string message;
};

// Falsification-based freeness test: for each free probe V_A it asks, by SDP
// feasibility, for a cone element W_B with
//   Gamma >= (-Sigma V_A Sigma) (+) W_B,   W_B >= i Omega_B,
// which holds for every free probe exactly when the channel maps the free
// cone into itself. PASS means no violation was found on the supplied
// probes, not a universal proof; FAIL exhibits a violating probe.
inline FreeCertificate certify_free(const GaussianChannel& ch, const FreeConeSpec& cone,
                                    const std::vector<Mat>& probes,
                                    const CertifyOptions& opt = {}) {
    const GaussianChannel g = choi_form(ch, opt.choi_r);
    const int n_in = g.n_in, n_out = g.n_out, N = n_in + n_out;
    if (cone.dim() != 2 * n_out)
        throw std::invalid_argument("certify_free: cone lives on the wrong mode count");

    const FreeConeSpec* in_cone = opt.input_cone;
    if (!in_cone && n_in == n_out) in_cone = &cone;
    if (in_cone && in_cone->dim() != 2 * n_in)
        throw std::invalid_argument("certify_free: input cone dimension mismatch");

    std::vector<int> in_modes(n_in), out_modes(n_out);
    for (int i = 0; i < n_in; ++i) in_modes[i] = i;
    for (int i = 0; i < n_out; ++i) out_modes[i] = n_in + i;
    const auto idx_in = xxpp_indices(N, in_modes);
    const auto idx_out = xxpp_indices(N, out_modes);
    const Mat flip = momentum_flip(n_in);
    const std::vector<Mat> wb_basis = symmetric_basis(2 * n_out);
    const int nw = static_cast<int>(wb_basis.size());
    const CMat i_omega_b = kI * omega(n_out).cast<std::complex<double>>();

    FreeCertificate cert;
    cert.message = "falsification over " + std::to_string(probes.size()) +
                   " probes, not a universal certificate";
    cert.margins.reserve(probes.size());

    for (size_t p = 0; p < probes.size(); ++p) {
        const Mat& probe = probes[p];
        if (probe.rows() != 2 * n_in)
            throw std::invalid_argument("certify_free: probe dimension mismatch");
        if (in_cone && !membership(probe, *in_cone))
            throw std::invalid_argument("certify_free: probe " + std::to_string(p) +
                                        " is not a member of the input cone");

        // Variables: margin t, cone parameters q, W_B coordinates w.
        const int m = 1 + cone.q_dim + nw;
        SdpProblem prob(m);
        Vec c = Vec::Zero(m);
        c[0] = -1.0;  // maximize the margin
        prob.set_objective(c);

        Mat base = g.gamma;
        const Mat sv = flip * probe * flip;
        for (int r = 0; r < 2 * n_in; ++r)
            for (int col = 0; col < 2 * n_in; ++col) base(idx_in[r], idx_in[col]) += sv(r, col);
        int b1 = prob.add_block(base.cast<std::complex<double>>());
        prob.set_coeff(b1, 0, -CMat::Identity(2 * N, 2 * N));
        for (int k = 0; k < nw; ++k)
            prob.set_coeff(
                b1, 1 + cone.q_dim + k,
                (-detail::embed_rows(wb_basis[k], idx_out, 2 * N)).cast<std::complex<double>>());

        int b2 = prob.add_block(-cone.C);
        prob.set_coeff(b2, 0, -CMat::Identity(cone.dim(), cone.dim()));
        for (int i = 0; i < cone.q_dim; ++i)
            prob.set_coeff(b2, 1 + i, (-cone.f_basis[i]).cast<std::complex<double>>());
        for (int k = 0; k < nw; ++k)
            prob.set_coeff(b2, 1 + cone.q_dim + k, wb_basis[k].cast<std::complex<double>>());

        if (cone.g_dim > 0) {
            int b3 = prob.add_block(-cone.D);
            prob.set_coeff(b3, 0, -CMat::Identity(cone.g_dim, cone.g_dim));
            for (int i = 0; i < cone.q_dim; ++i)
                prob.set_coeff(b3, 1 + i, cone.g_basis[i].cast<std::complex<double>>());
        }

        // W_B must itself be a QCM; for some cones the membership LMI alone
        // does not force this.
        int b4 = prob.add_block(-i_omega_b);
        prob.set_coeff(b4, 0, -CMat::Identity(2 * n_out, 2 * n_out));
        for (int k = 0; k < nw; ++k)
            prob.set_coeff(b4, 1 + cone.q_dim + k, wb_basis[k].cast<std::complex<double>>());

        SdpSolution sol = solve(prob, opt.sdp);
        if (sol.status != SdpStatus::optimal)
            throw std::runtime_error(std::string("certify_free: margin solver failed: ") +
                                     to_string(sol.status) + " (" + sol.message + ")");
        const double margin = sol.x[0];
        cert.margins.push_back(margin);
        cert.min_margin = std::min(cert.min_margin, margin);
        if (margin < -opt.tol && cert.passed) {
            cert.passed = false;
            cert.violating_probe = static_cast<int>(p);
        }
    }
    return cert;
}

}  // namespace gaussrt
