#pragma once

// Symplectic linear algebra over real 2N x 2N covariance matrices.
// Ordering convention throughout: xxpp (all positions, then all momenta);
// mode k owns global rows {k, N + k}. Vacuum = identity.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gaussrt {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

inline constexpr std::complex<double> kI{0.0, 1.0};

struct SingularPivot : std::runtime_error {
    double smallest_singular_value;
    explicit SingularPivot(double sv)
        : std::runtime_error("singular Schur pivot block, smallest singular value " +
                             std::to_string(sv)),
          smallest_singular_value(sv) {}
};

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Party labels, one per mode.
struct ModePartition {
    std::vector<std::string> labels;

    ModePartition() = default;
    explicit ModePartition(std::vector<std::string> l) : labels(std::move(l)) {
        for (const auto& s : labels)
            if (s.empty()) throw std::invalid_argument("empty party label");
    }

    int modes() const { return static_cast<int>(labels.size()); }

    // Unique party names in order of first appearance.
    std::vector<std::string> parties() const {
        std::vector<std::string> out;
        for (const auto& l : labels)
            if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
        return out;
    }

    std::vector<int> modes_of(const std::string& party) const {
        std::vector<int> out;
        for (int k = 0; k < modes(); ++k)
            if (labels[k] == party) out.push_back(k);
        if (out.empty()) throw std::invalid_argument("unknown party '" + party + "'");
        return out;
    }

    bool has_party(const std::string& party) const {
        return std::find(labels.begin(), labels.end(), party) != labels.end();
    }

    static ModePartition uniform(int n, const std::string& label = "A") {
        return ModePartition(std::vector<std::string>(static_cast<size_t>(n), label));
    }

    static ModePartition bipartition(int n_a, int n_b, const std::string& a = "A",
                                     const std::string& b = "B") {
        std::vector<std::string> l(static_cast<size_t>(n_a), a);
        l.insert(l.end(), static_cast<size_t>(n_b), b);
        return ModePartition(std::move(l));
    }

    bool operator==(const ModePartition& o) const { return labels == o.labels; }
};

// Global xxpp row indices of the given modes: x rows first, then p rows.
inline std::vector<int> xxpp_indices(int n_total, const std::vector<int>& modes) {
    std::vector<int> idx;
    idx.reserve(2 * modes.size());
    for (int m : modes) {
        if (m < 0 || m >= n_total) throw std::invalid_argument("mode index out of range");
        idx.push_back(m);
    }
    for (int m : modes) idx.push_back(n_total + m);
    return idx;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> submatrix(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M, const std::vector<int>& rows,
    const std::vector<int>& cols) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) out(i, j) = M(rows[i], cols[j]);
    return out;
}

// Symplectic form, block form [[0, I], [-I, 0]].
inline Mat omega(int n) {
    if (n < 1) throw std::invalid_argument("omega: mode count must be >= 1");
    Mat w = Mat::Zero(2 * n, 2 * n);
    w.topRightCorner(n, n) = Mat::Identity(n, n);
    w.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return w;
}

// Momentum flip Sigma = diag(I, -I), optionally restricted to a mode subset.
inline Mat momentum_flip(int n) {
    Vec d = Vec::Ones(2 * n);
    d.tail(n).setConstant(-1.0);
    return d.asDiagonal();
}

inline Mat momentum_flip(int n, const std::vector<int>& modes) {
    Vec d = Vec::Ones(2 * n);
    for (int m : modes) {
        if (m < 0 || m >= n) throw std::invalid_argument("mode index out of range");
        d[n + m] = -1.0;
    }
    return d.asDiagonal();
}

struct QcmReport {
    bool valid = false;
    double min_eigenvalue = 0.0;  // lambda_min(V - i Omega)
    double symmetry_error = 0.0;
    std::string reason;
};

// V is a quantum covariance matrix iff symmetric and V >= i Omega,
// checked via the Hermitian eigenvalues of V - i Omega >= -tol.
inline QcmReport validate_qcm(const Mat& V, double tol = 1e-9) {
    if (V.rows() != V.cols()) throw std::invalid_argument("validate_qcm: matrix not square");
    if (V.rows() % 2 != 0) throw std::invalid_argument("validate_qcm: odd dimension");
    const int n = static_cast<int>(V.rows()) / 2;
    QcmReport rep;
    rep.symmetry_error = max_abs(Mat(V - V.transpose()));
    if (rep.symmetry_error > std::max(tol, 1e-12 * std::max(1.0, max_abs(V)))) {
        rep.reason = "not symmetric (deviation " + std::to_string(rep.symmetry_error) + ")";
        rep.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    CMat H = V.cast<std::complex<double>>() - kI * omega(n).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    rep.min_eigenvalue = es.eigenvalues().minCoeff();
    if (rep.min_eigenvalue < -tol) {
        rep.reason = "V - i Omega has eigenvalue " + std::to_string(rep.min_eigenvalue);
        return rep;
    }
    rep.valid = true;
    return rep;
}

namespace detail {

// Symmetric eigendecomposition powers: V^{alpha} for V > 0.
inline Mat sym_power(const Mat& V, double alpha, double* min_eig = nullptr) {
    Eigen::SelfAdjointEigenSolver<Mat> es(V);
    if (min_eig) *min_eig = es.eigenvalues().minCoeff();
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("matrix not positive definite, min eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
    Vec powered = es.eigenvalues().array().pow(alpha);
    return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

// Ascending symplectic spectrum {nu_k}: the absolute eigenvalues of i Omega V
// with multiplicity halved, computed via the Hermitian similar matrix
// i V^{1/2} Omega V^{1/2}.
inline Vec symplectic_eigenvalues(const Mat& V) {
    if (V.rows() != V.cols() || V.rows() % 2 != 0)
        throw std::invalid_argument("symplectic_eigenvalues: bad dimension");
    const int n = static_cast<int>(V.rows()) / 2;
    Mat root = detail::sym_power(V, 0.5);
    CMat K = kI * (root * omega(n) * root).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<CMat> es(K);
    // Spectrum is symmetric about zero; the top n entries are the +nu branch.
    return es.eigenvalues().tail(n);
}

// nu_min via the variational characterization max{ lambda >= 0 : V >= i lambda Omega },
// found by bisection on the Hermitian minimum eigenvalue. Independent of the
// eigenvalue route above; the two agree within 1e-8 on valid inputs.
inline double nu_min_bisect(const Mat& V, double rel_tol = 1e-10) {
    const int n = static_cast<int>(V.rows()) / 2;
    const CMat Vc = V.cast<std::complex<double>>();
    const CMat iOm = kI * omega(n).cast<std::complex<double>>();
    auto min_eig = [&](double lam) {
        Eigen::SelfAdjointEigenSolver<CMat> es(CMat(Vc - lam * iOm));
        return es.eigenvalues().minCoeff();
    };
    if (min_eig(0.0) <= 0.0)
        throw std::invalid_argument("nu_min_bisect: matrix not positive definite");
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (min_eig(hi) >= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 64) throw std::runtime_error("nu_min_bisect: no upper bracket");
    }
    while (hi - lo > rel_tol * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        (min_eig(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct WilliamsonResult {
    Mat S;   // symplectic: S Omega S^T = Omega
    Vec d;   // ascending symplectic eigenvalues; S V S^T = diag(d) (+) diag(d)
};

// Williamson normal form. Route: A := V^{-1/2} Omega V^{-1/2} is real
// antisymmetric; the Hermitian eigenpairs (mu_k, z_k) of iA with mu_k > 0 give
// orthonormal a_k = sqrt(2) Re z_k, b_k = sqrt(2) Im z_k (orthonormality holds
// for degenerate mu too, since same-branch eigenvectors satisfy z_j^T z_k = 0).
// With Q := [b | a] and D := diag(1/mu) ascending,
// S := (D (+) D)^{1/2} Q^T V^{-1/2} satisfies both residual identities exactly.
inline WilliamsonResult williamson(const Mat& V, double residual_tol = 1e-9) {
    if (V.rows() != V.cols() || V.rows() % 2 != 0)
        throw std::invalid_argument("williamson: bad dimension");
    const int n = static_cast<int>(V.rows()) / 2;
    Mat inv_root = detail::sym_power(V, -0.5);
    Mat A = inv_root * omega(n) * inv_root;
    A = 0.5 * (A - A.transpose());  // enforce antisymmetry against roundoff
    Eigen::SelfAdjointEigenSolver<CMat> es(CMat(kI * A.cast<std::complex<double>>()));

    // Positive branch, sorted mu descending so nu = 1/mu ascends.
    std::vector<std::pair<double, int>> pos;
    for (int k = 0; k < 2 * n; ++k)
        if (es.eigenvalues()[k] > 0.0) pos.emplace_back(es.eigenvalues()[k], k);
    if (static_cast<int>(pos.size()) != n)
        throw std::runtime_error("williamson: spectral pairing failed");
    std::sort(pos.begin(), pos.end(), [](auto& l, auto& r) { return l.first > r.first; });

    Mat Q(2 * n, 2 * n);
    Vec d(n);
    const double rt2 = std::sqrt(2.0);
    for (int k = 0; k < n; ++k) {
        CVec z = es.eigenvectors().col(pos[k].second);
        Q.col(k) = rt2 * z.imag();       // b_k
        Q.col(n + k) = rt2 * z.real();   // a_k
        d[k] = 1.0 / pos[k].first;
    }
    Vec droot(2 * n);
    droot << d.array().sqrt().matrix(), d.array().sqrt().matrix();
    Mat S = droot.asDiagonal() * Q.transpose() * inv_root;

    Mat target = Mat::Zero(2 * n, 2 * n);
    target.diagonal().head(n) = d;
    target.diagonal().tail(n) = d;
    const double r1 = max_abs(Mat(S * V * S.transpose() - target));
    const double r2 = max_abs(Mat(S * omega(n) * S.transpose() - omega(n)));
    if (r1 > residual_tol * std::max(1.0, max_abs(V)) || r2 > residual_tol)
        throw std::runtime_error("williamson: residuals too large (SVS^T: " +
                                 std::to_string(r1) + ", symplectic: " + std::to_string(r2) +
                                 ")");
    return {std::move(S), std::move(d)};
}

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> schur_complement_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M,
    const std::vector<int>& pivot) {
    using M_t = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const int dim = static_cast<int>(M.rows());
    std::vector<char> in_pivot(dim, 0);
    for (int i : pivot) {
        if (i < 0 || i >= dim) throw std::invalid_argument("schur_complement: bad index");
        if (in_pivot[i]) throw std::invalid_argument("schur_complement: duplicate index");
        in_pivot[i] = 1;
    }
    std::vector<int> comp;
    for (int i = 0; i < dim; ++i)
        if (!in_pivot[i]) comp.push_back(i);
    if (pivot.empty() || comp.empty())
        throw std::invalid_argument("schur_complement: trivial split");

    M_t P = submatrix<Scalar>(M, pivot, pivot);
    M_t X = submatrix<Scalar>(M, pivot, comp);
    M_t Y = submatrix<Scalar>(M, comp, pivot);
    M_t Q = submatrix<Scalar>(M, comp, comp);

    // Hermitian pivot: eigenvalue magnitudes are its singular values.
    Eigen::SelfAdjointEigenSolver<M_t> es(P);
    const double smin = es.eigenvalues().cwiseAbs().minCoeff();
    const double smax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (smin <= 1e-13 * std::max(1.0, smax)) throw SingularPivot(smin);
    M_t Pinv = es.eigenvectors() *
               es.eigenvalues().cwiseInverse().template cast<Scalar>().asDiagonal() *
               es.eigenvectors().adjoint();
    return Q - Y * Pinv * X;
}

}  // namespace detail

// M/P on the complementary index set (original order), pivoting on pivot_idx.
inline Mat schur_complement(const Mat& M, const std::vector<int>& pivot_idx) {
    return detail::schur_complement_impl<double>(M, pivot_idx);
}
inline CMat schur_complement(const CMat& M, const std::vector<int>& pivot_idx) {
    return detail::schur_complement_impl<std::complex<double>>(M, pivot_idx);
}

// Sigma_party V Sigma_party: momenta of one party flipped.
inline Mat partial_transpose(const Mat& V, const ModePartition& partition,
                             const std::string& party) {
    const int n = partition.modes();
    if (V.rows() != 2 * n) throw std::invalid_argument("partial_transpose: dimension mismatch");
    Mat flip = momentum_flip(n, partition.modes_of(party));
    return flip * V * flip;
}

// Direct sum with global xxpp reordering; equal party names merge.
inline std::pair<Mat, ModePartition> direct_sum(const Mat& V1, const ModePartition& p1,
                                                const Mat& V2, const ModePartition& p2) {
    const int n1 = p1.modes(), n2 = p2.modes(), n = n1 + n2;
    if (V1.rows() != 2 * n1 || V2.rows() != 2 * n2)
        throw std::invalid_argument("direct_sum: dimension mismatch");
    // Old global row -> new global row.
    auto map1 = [&](int r) { return r < n1 ? r : n + (r - n1); };
    auto map2 = [&](int r) { return r < n2 ? n1 + r : n + n1 + (r - n2); };
    Mat V = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < 2 * n1; ++i)
        for (int j = 0; j < 2 * n1; ++j) V(map1(i), map1(j)) = V1(i, j);
    for (int i = 0; i < 2 * n2; ++i)
        for (int j = 0; j < 2 * n2; ++j) V(map2(i), map2(j)) = V2(i, j);
    std::vector<std::string> labels = p1.labels;
    labels.insert(labels.end(), p2.labels.begin(), p2.labels.end());
    return {std::move(V), ModePartition(std::move(labels))};
}

// Principal submatrix on the kept parties' modes, still in xxpp ordering.
inline std::pair<Mat, ModePartition> partial_trace(const Mat& V, const ModePartition& partition,
                                                   const std::vector<std::string>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
    const int n = partition.modes();
    if (V.rows() != 2 * n) throw std::invalid_argument("partial_trace: dimension mismatch");
    std::vector<int> kept_modes;
    std::vector<std::string> labels;
    for (int k = 0; k < n; ++k)
        if (std::find(keep.begin(), keep.end(), partition.labels[k]) != keep.end()) {
            kept_modes.push_back(k);
            labels.push_back(partition.labels[k]);
        }
    if (kept_modes.empty()) throw std::invalid_argument("partial_trace: no such parties");
    std::vector<int> idx = xxpp_indices(n, kept_modes);
    return {submatrix<double>(V, idx, idx), ModePartition(std::move(labels))};
}

}  // namespace gaussrt
