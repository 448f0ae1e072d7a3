#pragma once

// Standard Gaussian states as (V, s) pairs and the phase-space formulas used
// as ground truth in tests. Conventions: vacuum V = I, [x,p] = i, so a
// thermal state has V = (2 nbar + 1) I. Displacement vector s is the mean of
// (x_1..x_n, p_1..p_n).

#include <gaussrt/symplectic.hpp>

namespace gaussrt {

struct GaussianState {
    Mat V;
    Vec s;
    ModePartition partition;

    int modes() const { return partition.modes(); }
};

namespace detail {

inline GaussianState finish_state(Mat V, Vec s, ModePartition p) {
    GaussianState st{std::move(V), std::move(s), std::move(p)};
    if (st.V.rows() != 2 * st.modes() || st.s.size() != 2 * st.modes())
        throw std::invalid_argument("state dimension mismatch");
    return st;
}

}  // namespace detail

inline GaussianState make_vacuum(int n, const ModePartition* part = nullptr) {
    ModePartition p = part ? *part : ModePartition::uniform(n);
    return detail::finish_state(Mat::Identity(2 * n, 2 * n), Vec::Zero(2 * n), std::move(p));
}

inline GaussianState make_coherent(const Vec& u, const ModePartition* part = nullptr) {
    if (u.size() % 2 != 0) throw std::invalid_argument("coherent: odd displacement length");
    const int n = static_cast<int>(u.size()) / 2;
    ModePartition p = part ? *part : ModePartition::uniform(n);
    return detail::finish_state(Mat::Identity(2 * n, 2 * n), u, std::move(p));
}

inline GaussianState make_thermal(double nbar, int n = 1, const ModePartition* part = nullptr) {
    if (nbar < 0) throw std::invalid_argument("thermal: nbar must be >= 0");
    ModePartition p = part ? *part : ModePartition::uniform(n);
    return detail::finish_state((2.0 * nbar + 1.0) * Mat::Identity(2 * n, 2 * n),
                                Vec::Zero(2 * n), std::move(p));
}

// Single mode squeezed vacuum: variances e^{-2r} along x at phi = 0; phi
// rotates the squeezing axis (rotation conjugation in phase space).
inline GaussianState make_squeezed(double r, double phi = 0.0) {
    Mat V(2, 2);
    V << std::exp(-2.0 * r), 0.0, 0.0, std::exp(2.0 * r);
    if (phi != 0.0) {
        Mat R(2, 2);
        R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
        V = R * V * R.transpose();
    }
    return detail::finish_state(std::move(V), Vec::Zero(2), ModePartition::uniform(1));
}

// Two-mode squeezed vacuum, partition (A|B). Sign convention: positive x-x
// correlations, negative p-p, giving nu_min of the partial transpose e^{-2r}.
inline GaussianState make_tmsv(double r, const std::string& a = "A",
                               const std::string& b = "B") {
    const double c = std::cosh(2.0 * r), s = std::sinh(2.0 * r);
    Mat V = Mat::Zero(4, 4);
    V(0, 0) = V(1, 1) = V(2, 2) = V(3, 3) = c;
    V(0, 1) = V(1, 0) = s;    // x_A x_B
    V(2, 3) = V(3, 2) = -s;   // p_A p_B
    return detail::finish_state(std::move(V), Vec::Zero(4), ModePartition({a, b}));
}

inline GaussianState displace(GaussianState st, const Vec& d) {
    if (d.size() != st.s.size()) throw std::invalid_argument("displace: dimension mismatch");
    st.s += d;
    return st;
}

inline GaussianState tensor_product(const GaussianState& a, const GaussianState& b) {
    auto [V, part] = direct_sum(a.V, a.partition, b.V, b.partition);
    const int n = part.modes(), na = a.modes();
    Vec s(2 * n);
    s.head(na) = a.s.head(na);
    s.segment(na, b.modes()) = b.s.head(b.modes());
    s.segment(n, na) = a.s.tail(na);
    s.tail(b.modes()) = b.s.tail(b.modes());
    return {std::move(V), std::move(s), std::move(part)};
}

// chi(xi) = exp(-1/4 xi^T Omega^T V Omega xi + i s^T Omega xi).
inline std::complex<double> characteristic_function(const GaussianState& st, const Vec& xi) {
    if (xi.size() != 2 * st.modes())
        throw std::invalid_argument("characteristic_function: dimension mismatch");
    const Mat Om = omega(st.modes());
    const Vec oxi = Om * xi;
    const double quad = -0.25 * oxi.dot(st.V * oxi);
    const double phase = st.s.dot(oxi);
    return std::exp(std::complex<double>(quad, phase));
}

// <u| rho |u> for the coherent state with mean u:
//   2^n exp(-w^T (V+I)^{-1} w) / sqrt(det(V+I)),  w = u - s.
// The sign of w and the 2^n normalization are frozen against the truncated
// Fock oracle (see tests); with V = (2 nbar + 1) I this gives 1/(nbar+1)^n.
inline double coherent_overlap(const GaussianState& st, const Vec& u) {
    if (u.size() != 2 * st.modes())
        throw std::invalid_argument("coherent_overlap: dimension mismatch");
    const int n = st.modes();
    const Vec w = u - st.s;
    Mat A = st.V + Mat::Identity(2 * n, 2 * n);
    Eigen::LLT<Mat> llt(A);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("coherent_overlap: V + I not positive definite");
    const double quad = w.dot(llt.solve(w));
    double logdet = 0.0;
    for (int i = 0; i < 2 * n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return std::exp(n * std::log(2.0) - quad - 0.5 * logdet);
}

}  // namespace gaussrt
