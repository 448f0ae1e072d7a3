#pragma once

// Truncated Fock-basis oracle for Gaussian expectation values, independent of
// the phase-space formulas it cross-checks. Route (thermal decomposition):
// Williamson V = S^{-1} (D+D) S^{-T}, then
//   rho = Dhat U rho_th(D) U^dag Dhat^dag
// with U = exp(-i/2 rhat^T H rhat), H = -Omega log(S^{-1}) built from truncated
// ladder operators, and Dhat the displacement exponential. Everything is
// operator mechanics; no Gaussian integrals. The constructor recomputes the
// mean and covariance from the truncated rho, so a convention slip in the
// exponentials shows up as a large moment_deviation instead of a silent bias.

#include <gaussrt/states.hpp>

#include <unsupported/Eigen/MatrixFunctions>

namespace gaussrt {

struct FockOverlap {
    double value = 0.0;
    double truncation_estimate = 0.0;
};

class FockOracle {
  public:
    explicit FockOracle(const GaussianState& st, int cutoff = 60, double trace_tol = 1e-4)
        : n_(st.modes()), cutoff_(cutoff) {
        if (n_ < 1 || n_ > 2) throw std::invalid_argument("FockOracle: 1 or 2 modes only");
        if (cutoff_ < 4) throw std::invalid_argument("FockOracle: cutoff too small");
        const int per = cutoff_ + 1;
        dim_ = (n_ == 1) ? per : per * per;

        CMat a1 = CMat::Zero(per, per);
        for (int k = 1; k <= cutoff_; ++k) a1(k - 1, k) = std::sqrt(double(k));
        if (n_ == 1) {
            a_.push_back(a1);
        } else {
            a_.push_back(kron(a1, CMat::Identity(per, per)));
            a_.push_back(kron(CMat::Identity(per, per), a1));
        }
        const double rt2 = std::sqrt(2.0);
        r_.resize(2 * n_);
        for (int k = 0; k < n_; ++k) {
            r_[k] = (a_[k] + a_[k].adjoint()) / rt2;             // x_k
            r_[n_ + k] = kI * (a_[k].adjoint() - a_[k]) / rt2;   // p_k
        }

        WilliamsonResult w = williamson(st.V);
        const Mat Om = omega(n_);
        Mat T = -Om * w.S.transpose() * Om;  // S^{-1} via symplectic identity
        CMat Xc = CMat(T.cast<std::complex<double>>()).log();
        if (Xc.imag().cwiseAbs().maxCoeff() > 1e-8)
            throw std::runtime_error("FockOracle: symplectic matrix has no real logarithm");
        Mat X = Xc.real();
        Mat H = -Om * X;
        H = 0.5 * (H + H.transpose());
        if (max_abs(Mat(Om * H - X)) > 1e-7)
            throw std::runtime_error("FockOracle: generator is not Hamiltonian");

        CMat Hhat = CMat::Zero(dim_, dim_);
        for (int j = 0; j < 2 * n_; ++j)
            for (int k = 0; k < 2 * n_; ++k)
                if (H(j, k) != 0.0) Hhat += 0.5 * H(j, k) * r_[j] * r_[k];
        Hhat = 0.5 * (Hhat + CMat(Hhat.adjoint()));
        CMat U = CMat(-kI * Hhat).exp();

        CVec th = CVec::Zero(dim_);
        for (int i = 0; i < dim_; ++i) {
            double p = 1.0;
            int rem = i;
            for (int k = n_ - 1; k >= 0; --k) {
                const int nk = rem % (cutoff_ + 1);
                rem /= (cutoff_ + 1);
                const double nbar = 0.5 * (w.d[k] - 1.0);
                p *= std::pow(nbar / (nbar + 1.0), nk) / (nbar + 1.0);
            }
            th[i] = p;
        }
        rho_ = U * th.asDiagonal() * U.adjoint();
        if (st.s.cwiseAbs().maxCoeff() > 0.0) {
            CMat D = displacement(st.s);
            rho_ = D * rho_ * D.adjoint();
        }

        trace_deficiency_ = std::abs(1.0 - rho_.trace().real());
        moment_deviation_ = 0.0;
        Vec mean(2 * n_);
        for (int i = 0; i < 2 * n_; ++i) mean[i] = (rho_ * r_[i]).trace().real();
        moment_deviation_ = (mean - st.s).cwiseAbs().maxCoeff();
        for (int i = 0; i < 2 * n_; ++i)
            for (int j = i; j < 2 * n_; ++j) {
                const double cij =
                    (rho_ * (r_[i] * r_[j] + r_[j] * r_[i])).trace().real() -
                    2.0 * mean[i] * mean[j];
                moment_deviation_ = std::max(moment_deviation_, std::abs(cij - st.V(i, j)));
            }
        if (trace_deficiency_ > trace_tol)
            throw std::runtime_error("FockOracle: cutoff insufficient, trace deficiency " +
                                     std::to_string(trace_deficiency_));
    }

    // <u| rho |u>, with |u> the coherent state of mean u built by the same
    // displacement exponential as the state itself.
    FockOverlap overlap(const Vec& u) const {
        if (u.size() != 2 * n_) throw std::invalid_argument("FockOracle: bad probe size");
        CVec e0 = CVec::Zero(dim_);
        e0[0] = 1.0;
        CVec eu = displacement(u) * e0;
        FockOverlap out;
        out.value = (eu.adjoint() * rho_ * eu)(0, 0).real();
        out.truncation_estimate =
            trace_deficiency_ + std::abs(1.0 - eu.squaredNorm());
        return out;
    }

    double trace_deficiency() const { return trace_deficiency_; }
    double moment_deviation() const { return moment_deviation_; }
    const CMat& rho() const { return rho_; }

  private:
    static CMat kron(const CMat& A, const CMat& B) {
        CMat out(A.rows() * B.rows(), A.cols() * B.cols());
        for (int i = 0; i < A.rows(); ++i)
            for (int j = 0; j < A.cols(); ++j)
                out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        return out;
    }

    CMat displacement(const Vec& mean) const {
        const double rt2 = std::sqrt(2.0);
        CMat B = CMat::Zero(dim_, dim_);
        for (int k = 0; k < n_; ++k) {
            const std::complex<double> beta(mean[k] / rt2, mean[n_ + k] / rt2);
            B += beta * a_[k].adjoint() - std::conj(beta) * a_[k];
        }
        return B.exp();
    }

    int n_, cutoff_, dim_;
    std::vector<CMat> a_;
    std::vector<CMat> r_;
    CMat rho_;
    double trace_deficiency_ = 0.0, moment_deviation_ = 0.0;
};

inline double fock_overlap(const GaussianState& st, const Vec& u, int cutoff = 60) {
    return FockOracle(st, cutoff).overlap(u).value;
}

}  // namespace gaussrt
