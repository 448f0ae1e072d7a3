#pragma once

// Dense primal-dual interior-point solver for small Hermitian LMI problems:
//
//   minimize  c^T x   subject to   F_j(x) := F_j0 + sum_i x_i F_ji >= 0.
//
// Dual:  maximize -sum_j <F_j0, Z_j>  s.t.  sum_j <F_ji, Z_j> = c_i, Z_j >= 0,
// with the Hilbert-Schmidt pairing <X, Y> = tr(XY).
//
// Complex Hermitian blocks are solved through the real embedding
// E(H) = [[Re H, -Im H], [Im H, Re H]]; the de-embedded dual 2*Phi(Z_emb)
// restores <F_i, Z> = c_i under the complex pairing. Genuinely real blocks
// stay unembedded. Path following uses Nesterov-Todd scaling with adaptive
// centering; no randomized steps, so solutions are bitwise reproducible.

#include <gaussrt/symplectic.hpp>

#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace gaussrt {

inline std::string fmt_sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(3) << v;
    return os.str();
}

inline Mat embed_hermitian(const CMat& H) {
    const double dev = max_abs(CMat(H - H.adjoint()));
    if (dev > 1e-10 * std::max(1.0, max_abs(H)))
        throw std::invalid_argument("embed_hermitian: input not Hermitian, deviation " +
                                    fmt_sci(dev));
    const int d = static_cast<int>(H.rows());
    Mat E(2 * d, 2 * d);
    E.topLeftCorner(d, d) = H.real();
    E.bottomRightCorner(d, d) = H.real();
    E.topRightCorner(d, d) = -H.imag();
    E.bottomLeftCorner(d, d) = H.imag();
    return 0.5 * (E + E.transpose());
}

enum class SdpStatus { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::infeasible: return "infeasible";
        case SdpStatus::unbounded: return "unbounded";
        default: return "numerical_failure";
    }
}

// Per-iterate snapshot for diagnostics. complementarity = sum_j <S_j, Z_j>,
// which equals the duality gap once both residuals vanish; it stays
// nonnegative on every iterate because the line search keeps S, Z definite.
struct SdpTracePoint {
    int iter;
    double primal_objective;
    double dual_objective;
    double mu;
    double primal_infeasibility;
    double dual_infeasibility;
    double complementarity;
};

struct SdpOptions {
    double gap_tol = 1e-8;
    double feas_tol = 1e-9;
    int max_iter = 200;
    double step_frac = 0.98;
    bool verbose = false;
    std::function<void(const SdpTracePoint&)> trace;
};

struct SdpSolution {
    SdpStatus status = SdpStatus::numerical_failure;
    Vec x;
    std::vector<CMat> dual;  // one PSD matrix per block, complex pairing normalized
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;  // relative
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    int iterations = 0;
    std::string message;
};

class SdpProblem {
  public:
    explicit SdpProblem(int num_vars) : m_(num_vars), c_(Vec::Zero(num_vars)) {
        if (num_vars < 1) throw std::invalid_argument("SdpProblem: need at least one variable");
    }

    void set_objective(const Vec& c) {
        if (c.size() != m_) throw std::invalid_argument("objective size mismatch");
        c_ = c;
    }

    int add_block(const CMat& constant) {
        check_hermitian(constant);
        blocks_.push_back(Block{constant, {}});
        return static_cast<int>(blocks_.size()) - 1;
    }

    void set_coeff(int block, int var, const CMat& F) {
        if (block < 0 || block >= static_cast<int>(blocks_.size()))
            throw std::invalid_argument("bad block index");
        if (var < 0 || var >= m_) throw std::invalid_argument("bad variable index");
        if (F.rows() != blocks_[block].constant.rows())
            throw std::invalid_argument("coefficient dimension mismatch");
        check_hermitian(F);
        blocks_[block].coeff.emplace_back(var, F);
    }

    // Sugar for the scalar constraint x_var >= bound.
    void add_scalar_lower_bound(int var, double bound) {
        int b = add_block(CMat::Constant(1, 1, -bound));
        set_coeff(b, var, CMat::Constant(1, 1, 1.0));
    }

    int num_vars() const { return m_; }
    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    const Vec& objective() const { return c_; }

    void dump(std::ostream& os) const;
    static SdpProblem load(std::istream& is);

    struct Block {
        CMat constant;
        std::vector<std::pair<int, CMat>> coeff;
    };
    const std::vector<Block>& blocks() const { return blocks_; }

  private:
    static void check_hermitian(const CMat& F) {
        const double dev = max_abs(CMat(F - F.adjoint()));
        if (dev > 1e-12 * std::max(1.0, max_abs(F)))
            throw std::invalid_argument("constraint matrix not Hermitian, deviation " +
                                        fmt_sci(dev));
    }

    int m_;
    Vec c_;
    std::vector<Block> blocks_;
};

namespace detail {

struct RealBlock {
    Mat F0;
    std::vector<std::pair<int, Mat>> Fi;
    bool embedded = false;
    int orig_dim = 0;
};

inline bool nearly_real(const CMat& M) { return M.imag().cwiseAbs().maxCoeff() < 1e-14; }

// Eigenvalues clamped away from zero so scaling survives endgame iterates
// whose matrices graze the cone boundary. Deterministic, so reproducible.
inline Vec clamped_spectrum(const Vec& lambda) {
    const double floor = std::max(lambda.cwiseAbs().maxCoeff() * 1e-14, 1e-280);
    return lambda.cwiseMax(floor);
}

// Largest alpha with S + alpha * dS >= 0, for S > 0.
inline double max_step(const Mat& S, const Mat& dS) {
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    Vec ls = clamped_spectrum(es.eigenvalues());
    Mat root = ls.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    Mat B = root * dS * root.transpose();
    B = 0.5 * (B + B.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> esb(B);
    const double lmin = esb.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

inline Mat psd_inverse(const Mat& A) {
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    Vec l = clamped_spectrum(es.eigenvalues());
    Mat inv = es.eigenvectors() * l.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (inv + inv.transpose());
}

struct NtScaling {
    Mat Winv;  // W^{-1}, with W Z W = S
};

inline NtScaling nt_scaling(const Mat& S, const Mat& Z) {
    Eigen::SelfAdjointEigenSolver<Mat> es_s(S);
    Vec ls = clamped_spectrum(es_s.eigenvalues());
    Mat S_half = es_s.eigenvectors() * ls.cwiseSqrt().asDiagonal() * es_s.eigenvectors().transpose();
    Mat S_mhalf =
        es_s.eigenvectors() * ls.cwiseSqrt().cwiseInverse().asDiagonal() * es_s.eigenvectors().transpose();
    Mat T = S_half * Z * S_half;
    T = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es_t(T);
    Vec lt = clamped_spectrum(es_t.eigenvalues());
    Mat T_half = es_t.eigenvectors() * lt.cwiseSqrt().asDiagonal() * es_t.eigenvectors().transpose();
    NtScaling out;
    out.Winv = S_mhalf * T_half * S_mhalf;
    out.Winv = 0.5 * (out.Winv + out.Winv.transpose());
    return out;
}

}  // namespace detail

inline SdpSolution solve(const SdpProblem& prob, const SdpOptions& opt = {}) {
    using detail::RealBlock;
    const int m = prob.num_vars();
    const Vec& c = prob.objective();
    if (prob.num_blocks() == 0) throw std::invalid_argument("solve: no constraint blocks");

    std::vector<RealBlock> blk;
    for (const auto& b : prob.blocks()) {
        RealBlock rb;
        rb.orig_dim = static_cast<int>(b.constant.rows());
        rb.embedded = !detail::nearly_real(b.constant);
        for (const auto& [i, F] : b.coeff)
            if (!detail::nearly_real(F)) rb.embedded = true;
        if (rb.embedded) {
            rb.F0 = embed_hermitian(b.constant);
            for (const auto& [i, F] : b.coeff) rb.Fi.emplace_back(i, embed_hermitian(F));
        } else {
            rb.F0 = 0.5 * (b.constant.real() + b.constant.real().transpose());
            for (const auto& [i, F] : b.coeff)
                rb.Fi.emplace_back(i, Mat(0.5 * (F.real() + F.real().transpose())));
        }
        blk.push_back(std::move(rb));
    }
    const int nb = static_cast<int>(blk.size());

    std::vector<char> covered(m, 0);
    for (const auto& b : blk)
        for (const auto& [i, F] : b.Fi) covered[i] = 1;
    for (int i = 0; i < m; ++i)
        if (!covered[i])
            throw std::invalid_argument("solve: variable " + std::to_string(i) +
                                        " appears in no constraint block");

    double total_dim = 0.0;
    for (const auto& b : blk) total_dim += b.F0.rows();

    // Interior start: identity multiples scaled by the data norms.
    Vec x = Vec::Zero(m);
    std::vector<Mat> S(nb), Z(nb);
    for (int j = 0; j < nb; ++j) {
        const Mat& G = blk[j].F0;
        Eigen::SelfAdjointEigenSolver<Mat> es(G);
        const double lmin = es.eigenvalues().minCoeff();
        const double scale = std::max(1.0, max_abs(G));
        const double shift = std::max(0.1 * scale, -1.5 * lmin + 0.1 * scale);
        S[j] = G + shift * Mat::Identity(G.rows(), G.cols());
        Z[j] = std::max(1.0, c.cwiseAbs().maxCoeff()) * Mat::Identity(G.rows(), G.cols());
    }

    double mu0 = 0.0;
    for (int j = 0; j < nb; ++j) mu0 += (S[j].cwiseProduct(Z[j])).sum();
    mu0 /= total_dim;
    // Barrier floor: residual reduction may need a couple more iterations
    // after the complementarity bottoms out; keep the iterates off the
    // boundary instead of letting the scaling degenerate.
    const double mu_floor = 1e-13 * (1.0 + mu0);

    SdpSolution sol;
    sol.x = x;
    auto finish = [&](SdpStatus st, const std::string& msg, int iter) {
        sol.status = st;
        sol.message = msg;
        sol.iterations = iter;
        sol.x = x;
        sol.dual.clear();
        for (int j = 0; j < nb; ++j) {
            if (blk[j].embedded) {
                const int d = blk[j].orig_dim;
                CMat Zc =
                    (Z[j].topLeftCorner(d, d) + Z[j].bottomRightCorner(d, d)).cast<std::complex<double>>() +
                    kI * (Z[j].bottomLeftCorner(d, d) - Z[j].topRightCorner(d, d))
                             .cast<std::complex<double>>();
                sol.dual.push_back(0.5 * (Zc + CMat(Zc.adjoint())));
            } else {
                sol.dual.push_back(Z[j].cast<std::complex<double>>());
            }
        }
        return sol;
    };

    // Least-norm dual repair ("polish"): the dual residual is linear in Z
    // and the Gram system of the coefficient blocks is fixed and well
    // conditioned, unlike the Newton systems whose conditioning grows as the
    // complementarity shrinks. Near the optimum a single Gram solve restores
    // dual feasibility to machine precision.
    Mat gram = Mat::Zero(m, m);
    for (int j = 0; j < nb; ++j)
        for (size_t a = 0; a < blk[j].Fi.size(); ++a)
            for (size_t b = a; b < blk[j].Fi.size(); ++b) {
                const double v =
                    (blk[j].Fi[a].second.cwiseProduct(blk[j].Fi[b].second)).sum();
                gram(blk[j].Fi[a].first, blk[j].Fi[b].first) += v;
                if (a != b) gram(blk[j].Fi[b].first, blk[j].Fi[a].first) += v;
            }
    Eigen::LDLT<Mat> gram_ldlt(gram);
    const bool polish_ok = gram_ldlt.info() == Eigen::Success;

    int stall = 0;
    int recentre_cooldown = 0;
    for (int iter = 1; iter <= opt.max_iter + 1; ++iter) {
        if (recentre_cooldown > 0) --recentre_cooldown;
        std::vector<Mat> G(nb), R(nb);
        Vec r(m);
        double mu = 0, pobj = 0, dobj = 0, pinf = 0, dinf = 0, gap = 0;
        auto compute_stats = [&] {
            for (int j = 0; j < nb; ++j) {
                G[j] = blk[j].F0;
                for (const auto& [i, F] : blk[j].Fi) G[j] += x[i] * F;
                R[j] = G[j] - S[j];
            }
            r = c;
            for (int j = 0; j < nb; ++j)
                for (const auto& [i, F] : blk[j].Fi) r[i] -= (F.cwiseProduct(Z[j])).sum();

            mu = 0.0;
            for (int j = 0; j < nb; ++j) mu += (S[j].cwiseProduct(Z[j])).sum();
            mu /= total_dim;

            pobj = c.dot(x);
            dobj = 0.0;
            for (int j = 0; j < nb; ++j) dobj -= (blk[j].F0.cwiseProduct(Z[j])).sum();

            pinf = 0.0;
            for (int j = 0; j < nb; ++j)
                pinf = std::max(pinf, max_abs(R[j]) / (1.0 + max_abs(blk[j].F0)));
            dinf = r.cwiseAbs().maxCoeff() / (1.0 + c.cwiseAbs().maxCoeff());
            gap = std::abs(pobj - dobj) / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));

            sol.primal_objective = pobj;
            sol.dual_objective = dobj;
            sol.gap = gap;
            sol.primal_infeasibility = pinf;
            sol.dual_infeasibility = dinf;
        };
        compute_stats();

        // Terminal polish only: attempt the repair when dual feasibility is
        // the sole failing criterion, keep it only if the full convergence
        // test then passes (the cone tolerance is consumer grade because an
        // accepted polish returns immediately), and revert otherwise so the
        // iteration path is never perturbed.
        if (polish_ok && pinf <= opt.feas_tol && gap <= opt.gap_tol && dinf > opt.feas_tol &&
            dinf <= 1e4 * opt.feas_tol) {
            std::vector<Mat> Zp = Z;
            auto repair = [&] {
                Vec rp = c;
                for (int j = 0; j < nb; ++j)
                    for (const auto& [i, F] : blk[j].Fi) rp[i] -= (F.cwiseProduct(Zp[j])).sum();
                Vec y = gram_ldlt.solve(rp);
                y += gram_ldlt.solve(Vec(rp - gram * y));
                for (int j = 0; j < nb; ++j) {
                    for (const auto& [i, F] : blk[j].Fi) Zp[j] += y[i] * F;
                    Zp[j] = 0.5 * (Zp[j] + Zp[j].transpose());
                }
            };
            // Repair, then clamp any small negative eigenvalues the
            // correction introduced and repair again. Ending on a clamp
            // keeps the polished iterate exactly conic, so <S,Z> cannot go
            // negative; the residual a final clamp leaves behind is
            // arbitrated by the acceptance test below.
            bool inside = true;
            for (int rep = 0; rep < 3; ++rep) {
                repair();
                double worst = 0.0;
                bool clamped = false;
                for (int j = 0; j < nb; ++j) {
                    Eigen::SelfAdjointEigenSolver<Mat> es(Zp[j]);
                    const double lmin = es.eigenvalues().minCoeff();
                    worst = std::min(worst, lmin / (1.0 + max_abs(Zp[j])));
                    if (lmin < 0.0) {
                        Zp[j] = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                                es.eigenvectors().transpose();
                        clamped = true;
                    }
                }
                if (worst < -5e-9) {
                    inside = false;
                    break;
                }
                if (!clamped) break;
            }
            if (inside) {
                const double dinf_old = dinf;
                std::vector<Mat> Zsave = Z;
                Z = std::move(Zp);
                compute_stats();
                if (pinf <= opt.feas_tol && dinf <= opt.feas_tol && gap <= opt.gap_tol &&
                    mu >= 0.0) {
                    if (opt.verbose)
                        std::cerr << "    dual polish: dinf " << dinf_old << " -> " << dinf
                                  << "\n";
                } else {
                    Z = std::move(Zsave);
                    compute_stats();
                }
            }
        }

        if (opt.verbose)
            std::cerr << "iter " << iter << " pobj " << pobj << " dobj " << dobj << " gap " << gap
                      << " pinf " << pinf << " dinf " << dinf << " mu " << mu << "\n";
        if (opt.trace) opt.trace({iter, pobj, dobj, mu, pinf, dinf, total_dim * mu});

        if (pinf <= opt.feas_tol && dinf <= opt.feas_tol && gap <= opt.gap_tol)
            return finish(SdpStatus::optimal, "converged", iter - 1);
        if (dobj > 1e12 && pinf > opt.feas_tol)
            return finish(SdpStatus::infeasible,
                          "dual objective diverging: primal infeasible (Farkas direction in dual)",
                          iter - 1);
        if (pobj < -1e12 && pinf <= 1e-6)
            return finish(SdpStatus::unbounded, "primal objective diverging", iter - 1);
        if (iter > opt.max_iter) break;

        // Nesterov-Todd scaling per block.
        std::vector<Mat> Winv(nb), Zinv(nb), Sinv(nb);
        for (int j = 0; j < nb; ++j) {
            Winv[j] = detail::nt_scaling(S[j], Z[j]).Winv;
            Zinv[j] = detail::psd_inverse(Z[j]);
            Sinv[j] = detail::psd_inverse(S[j]);
        }

        // Schur system M dx = g(sigma) - r, M_ki = sum_j <F_jk, Winv F_ji Winv>.
        std::vector<std::vector<Mat>> P(nb);
        Mat M = Mat::Zero(m, m);
        for (int j = 0; j < nb; ++j) {
            P[j].resize(blk[j].Fi.size());
            for (size_t a = 0; a < blk[j].Fi.size(); ++a) {
                P[j][a] = Winv[j] * blk[j].Fi[a].second * Winv[j];
                P[j][a] = 0.5 * (P[j][a] + P[j][a].transpose());
            }
            for (size_t a = 0; a < blk[j].Fi.size(); ++a)
                for (size_t b2 = a; b2 < blk[j].Fi.size(); ++b2) {
                    const double v = (blk[j].Fi[a].second.cwiseProduct(P[j][b2])).sum();
                    M(blk[j].Fi[a].first, blk[j].Fi[b2].first) += v;
                    if (blk[j].Fi[a].first != blk[j].Fi[b2].first)
                        M(blk[j].Fi[b2].first, blk[j].Fi[a].first) += v;
                }
        }
        Mat M_factor = M;
        Eigen::LDLT<Mat> mldlt(M_factor);
        if (mldlt.info() != Eigen::Success) {
            M_factor += 1e-12 * std::max(1.0, M.trace() / m) * Mat::Identity(m, m);
            mldlt.compute(M_factor);
            if (mldlt.info() != Eigen::Success)
                return finish(SdpStatus::numerical_failure, "Schur system factorization failed",
                              iter - 1);
        }
        // Iterative refinement: the Schur system's conditioning grows like
        // 1/mu, and unrefined directions stop the endgame short of the
        // feasibility tolerances.
        auto schur_solve = [&](const Vec& rhs) {
            Vec dx = mldlt.solve(rhs);
            for (int rep = 0; rep < 2; ++rep) dx += mldlt.solve(Vec(rhs - M * dx));
            return dx;
        };

        auto newton = [&](double sigma_mu, const std::vector<Mat>& K, std::vector<Mat>& N, Vec& dx,
                          std::vector<Mat>& dZ, std::vector<Mat>& dS) {
            Vec h = -r;
            for (int j = 0; j < nb; ++j) {
                N[j] = Winv[j] * (sigma_mu * Zinv[j] - S[j] - R[j]) * Winv[j];
                if (!K.empty()) N[j] -= K[j];
                N[j] = 0.5 * (N[j] + N[j].transpose());
                for (const auto& [i, F] : blk[j].Fi) h[i] += (F.cwiseProduct(N[j])).sum();
            }
            dx = schur_solve(h);
            for (int j = 0; j < nb; ++j) {
                dZ[j] = N[j];
                dS[j] = R[j];
                for (size_t a = 0; a < blk[j].Fi.size(); ++a) {
                    dZ[j] -= dx[blk[j].Fi[a].first] * P[j][a];
                    dS[j] += dx[blk[j].Fi[a].first] * blk[j].Fi[a].second;
                }
                dZ[j] = 0.5 * (dZ[j] + dZ[j].transpose());
                dS[j] = 0.5 * (dS[j] + dS[j].transpose());
            }
        };

        std::vector<Mat> N(nb), dZ(nb), dS(nb), dZc(nb), dSc(nb), Kc(nb);
        Vec dx(m), dxc(m);

        // Predictor (affine direction) chooses the centering weight.
        newton(0.0, {}, N, dx, dZ, dS);
        double alpha_aff = 1.0;
        for (int j = 0; j < nb; ++j) {
            alpha_aff = std::min(alpha_aff, detail::max_step(S[j], dS[j]));
            alpha_aff = std::min(alpha_aff, detail::max_step(Z[j], dZ[j]));
        }
        double mu_aff = 0.0;
        for (int j = 0; j < nb; ++j)
            mu_aff += ((S[j] + alpha_aff * dS[j]).cwiseProduct(Z[j] + alpha_aff * dZ[j])).sum();
        mu_aff /= total_dim;
        double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-10, 1.0);

        // Second-order correction. A full step lands on complementarity
        // sigma*mu + <dS,dZ>/dim exactly, so subtracting a symmetric K with
        // <S,K> = <dS,dZ> from the centering target cancels the quadratic
        // miss; the affine direction supplies the estimate, damped by the
        // squared affine step so a pinned predictor cannot destabilize it.
        auto cross_term = [&](const std::vector<Mat>& dSe, const std::vector<Mat>& dZe,
                              double scale) {
            for (int j = 0; j < nb; ++j) {
                Mat T = scale * (Sinv[j] * dSe[j] * dZe[j]);
                Kc[j] = 0.5 * (T + T.transpose());
            }
        };
        cross_term(dS, dZ, alpha_aff * alpha_aff);

        auto boundary_steps = [&](double& ap_max, double& ad_max) {
            ap_max = std::numeric_limits<double>::infinity();
            ad_max = ap_max;
            for (int j = 0; j < nb; ++j) {
                ap_max = std::min(ap_max, detail::max_step(S[j], dSc[j]));
                ad_max = std::min(ad_max, detail::max_step(Z[j], dZc[j]));
            }
        };
        double ap_max = 0.0, ad_max = 0.0;

        // Corrector for one centering weight: second-order corrected solve
        // plus multiple centrality re-corrections (the current direction's
        // own step-scaled cross term, same factorization). A re-correction
        // is kept only when it lengthens the worst step.
        std::vector<Mat> dZt(nb), dSt(nb), Nt(nb);
        Vec dxt(m);
        auto corrector = [&](double sigma_try) {
            const double target = std::max(sigma_try * mu, mu_floor);
            cross_term(dS, dZ, alpha_aff * alpha_aff);
            newton(target, Kc, N, dxc, dZc, dSc);
            boundary_steps(ap_max, ad_max);
            for (int pass = 0; pass < 3 && std::min(ap_max, ad_max) < 0.9; ++pass) {
                cross_term(dSc, dZc,
                           std::min(1.0, opt.step_frac * ap_max) *
                               std::min(1.0, opt.step_frac * ad_max));
                newton(target, Kc, Nt, dxt, dZt, dSt);
                double tp = std::numeric_limits<double>::infinity(), td = tp;
                for (int j = 0; j < nb; ++j) {
                    tp = std::min(tp, detail::max_step(S[j], dSt[j]));
                    td = std::min(td, detail::max_step(Z[j], dZt[j]));
                }
                if (std::min(tp, td) <= std::min(ap_max, ad_max)) break;
                dxc = dxt;
                dZc = dZt;
                dSc = dSt;
                ap_max = tp;
                ad_max = td;
            }
            return std::min(ap_max, ad_max);
        };

        // Centering backtrack: an aggressive Mehrotra weight can aim past
        // the boundary (pinned step); gentler weights descend slower but
        // keep the iterate in the cone's interior.
        double quality = corrector(sigma);
        for (double gentler : {0.3, 0.6, 0.9}) {
            if (quality >= 0.05) break;
            if (gentler <= sigma) continue;
            quality = corrector(gentler);
        }

        // Gap descent phase. On dual-degenerate instances the Newton steps
        // can pin against the cone boundary while a finite gap remains.
        // With the primal machine feasible and the dual exactly repairable
        // through a weighted Gram system, the leftover gap <S,Z> is
        // minimized directly by affine scaling: dual sweeps move Z along
        // D = -Z (S - sum_i y_i F_i) Z, which keeps A(Z) = c, descends
        // (<S,D> = -|Z^1/2 (S - sum y F) Z^1/2|^2), and vanishes on Z's
        // null face, so it never fights the boundary; primal sweeps move x
        // along the Dikin direction when the dual alone bottoms out above
        // the target, which happens when the leftover gap is primal
        // suboptimality rather than dual. Terminal only: the phase is
        // accepted solely when it reaches the convergence target and
        // reverted otherwise, so the Newton trajectory is never left
        // mid-descent on the cone boundary.
        auto gap_descent = [&]() -> bool {
            if (!polish_ok || recentre_cooldown != 0 || pinf > opt.feas_tol ||
                dinf > 1e2 * opt.feas_tol)
                return false;

            Vec xd = x;
            std::vector<Mat> Sd = S, Zd = Z;

            // Every inner system here is a weighted Gram system B^T B y = r
            // with B's columns the stacked sandwiches vec(G F_i G). Near the
            // boundary cond(B) reaches 1e10 or more, so forming B^T B and
            // factoring it squares that and returns noise; all solves go
            // through the thin SVD of B itself instead, which keeps the
            // unsquared condition number and handles the rank-deficient
            // faces by pseudo-inverse truncation.
            std::vector<int> roff(nb + 1, 0);
            for (int j = 0; j < nb; ++j) roff[j + 1] = roff[j] + int(blk[j].F0.size());
            const int rtot = roff[nb];
            auto stack_sandwich = [&](const std::vector<Mat>& G) {
                Mat B = Mat::Zero(rtot, m);
                for (int j = 0; j < nb; ++j)
                    for (const auto& [i, F] : blk[j].Fi) {
                        const Mat gfg = G[j] * F * G[j];
                        B.col(i).segment(roff[j], gfg.size()) =
                            Eigen::Map<const Vec>(gfg.data(), gfg.size());
                    }
                return B;
            };
            auto stack_target = [&](const std::vector<Mat>& G, const std::vector<Mat>& X) {
                Vec v(rtot);
                for (int j = 0; j < nb; ++j) {
                    const Mat gxg = G[j] * X[j] * G[j];
                    v.segment(roff[j], gxg.size()) =
                        Eigen::Map<const Vec>(gxg.data(), gxg.size());
                }
                return v;
            };
            auto normal_solve = [](const Eigen::BDCSVD<Mat>& svd, const Vec& r) {
                const auto& sv = svd.singularValues();
                const double cut = sv.size() > 0 ? sv[0] * 1e-13 : 0.0;
                Vec t = svd.matrixV().transpose() * r;
                for (int i = 0; i < t.size(); ++i)
                    t[i] = sv[i] > cut ? t[i] / (sv[i] * sv[i]) : 0.0;
                return Vec(svd.matrixV() * t);
            };

            // Weighted feasibility geometry, refreshed whenever Sd moves.
            // Corrections shaped Swi (.) Swi avoid the directions where S
            // is large and Z nearly singular; a plain least-norm correction
            // spends most of its motion exactly there, denting the cone.
            std::vector<Mat> Swi(nb);
            Eigen::BDCSVD<Mat> svd_s;
            auto refresh_weights = [&]() -> bool {
                std::vector<Mat> Swih(nb);
                for (int j = 0; j < nb; ++j) {
                    Eigen::SelfAdjointEigenSolver<Mat> es(Sd[j]);
                    if (es.info() != Eigen::Success) return false;
                    const double wf = std::max(es.eigenvalues().maxCoeff(), 1.0) * 1e-5;
                    const Vec w = es.eigenvalues().cwiseMax(wf);
                    Swi[j] = es.eigenvectors() * w.cwiseInverse().asDiagonal() *
                             es.eigenvectors().transpose();
                    Swih[j] = es.eigenvectors() *
                              w.cwiseSqrt().cwiseInverse().asDiagonal() *
                              es.eigenvectors().transpose();
                }
                svd_s.compute(stack_sandwich(Swih), Eigen::ComputeThinV);
                return svd_s.info() == Eigen::Success;
            };
            if (!refresh_weights()) {
                recentre_cooldown = 5;
                return false;
            }
            auto reproject = [&](std::vector<Mat>& W) {
                Vec rl = c;
                for (int j = 0; j < nb; ++j)
                    for (const auto& [i, F] : blk[j].Fi) rl[i] -= (F.cwiseProduct(W[j])).sum();
                const Vec y = normal_solve(svd_s, rl);
                for (int j = 0; j < nb; ++j) {
                    Mat corr = Mat::Zero(W[j].rows(), W[j].cols());
                    for (const auto& [i, F] : blk[j].Fi) corr += y[i] * F;
                    W[j] += Swi[j] * corr * Swi[j];
                    W[j] = 0.5 * (W[j] + W[j].transpose());
                }
            };
            // Clamp negative eigenvalues and restore feasibility until the
            // iterate is conic; the weighted projection keeps each clamp's
            // feasibility repair from digging a new dent.
            auto settle = [&](std::vector<Mat>& W) -> bool {
                for (int rep = 0; rep < 4; ++rep) {
                    double worst = 0.0;
                    for (int j = 0; j < nb; ++j) {
                        Eigen::SelfAdjointEigenSolver<Mat> es(W[j]);
                        const double lmin = es.eigenvalues().minCoeff();
                        worst = std::min(worst, lmin / (1.0 + max_abs(W[j])));
                        if (lmin < 0.0)
                            W[j] = es.eigenvectors() *
                                   es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                                   es.eigenvectors().transpose();
                    }
                    if (worst >= -1e-13) return true;
                    reproject(W);
                }
                return false;
            };
            auto compl_of = [&]() {
                double sum = 0.0;
                for (int j = 0; j < nb; ++j) sum += (Sd[j].cwiseProduct(Zd[j])).sum();
                return sum;
            };
            auto target_of = [&]() {
                return 0.9 * opt.gap_tol * (1.0 + std::abs(c.dot(xd)));
            };

            reproject(Zd);
            double compl_cur = compl_of();
            if (!settle(Zd) || compl_cur > 3.0 * total_dim * mu) {
                if (opt.verbose)
                    std::cerr << "    gap descent aborted at entry: compl " << compl_cur
                              << " vs " << total_dim * mu << "\n";
                recentre_cooldown = 5;
                return false;
            }
            compl_cur = compl_of();

            double gap_needed = target_of();
            std::vector<Mat> D(nb);
            // Eigenvalue floor plus reprojection: regrows rank so the
            // affine-scaling direction, which cannot leave the current face
            // of Z on its own, sees every direction again. Used both
            // periodically and to retry at a premature stationary point.
            auto regrow = [&](std::vector<Mat>& W, double scale) {
                for (int j = 0; j < nb; ++j) {
                    Eigen::SelfAdjointEigenSolver<Mat> es(W[j]);
                    const double fl =
                        scale * compl_cur / (total_dim * std::max(1.0, max_abs(Sd[j])));
                    W[j] = es.eigenvectors() * es.eigenvalues().cwiseMax(fl).asDiagonal() *
                           es.eigenvectors().transpose();
                }
                reproject(W);
            };
            // Progress per phase is spiky (regrows unlock bursts), so the
            // budget is generous and the bail criterion is a sustained lull,
            // not one quiet phase.
            int lull = 0;
            for (int phase = 0; phase < 32 && compl_cur > gap_needed; ++phase) {
                const double at_phase_start = compl_cur;
                // Dual sweep: affine scaling in Z at fixed primal.
                double mark = compl_cur;
                bool regrown = false;
                for (int cycle = 0; cycle < 120 && compl_cur > gap_needed; ++cycle) {
                    // Least-squares residual of S against the constraint
                    // span in the Z^1/2-weighted metric. D = -Z M Z with M
                    // the residual, so the step keeps the dual constraints
                    // to the accuracy of the LS solve and the decrease
                    // <rhs, r> is a sum of squares, never a cancellation.
                    std::vector<Mat> Zh(nb);
                    for (int j = 0; j < nb; ++j) {
                        Eigen::SelfAdjointEigenSolver<Mat> es(Zd[j]);
                        Zh[j] = es.eigenvectors() *
                                es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                es.eigenvectors().transpose();
                    }
                    const Mat Bz = stack_sandwich(Zh);
                    const Vec rhs = stack_target(Zh, Sd);
                    Eigen::BDCSVD<Mat> svd_z(Bz, Eigen::ComputeThinU | Eigen::ComputeThinV);
                    if (svd_z.info() != Eigen::Success) break;
                    const Vec r = rhs - Bz * Vec(svd_z.solve(rhs));
                    const double dec = rhs.dot(r);
                    for (int j = 0; j < nb; ++j) {
                        D[j] = -Zh[j] *
                               Eigen::Map<const Mat>(r.data() + roff[j], Zh[j].rows(),
                                                     Zh[j].cols()) *
                               Zh[j];
                        D[j] = 0.5 * (D[j] + D[j].transpose());
                    }
                    // Stationary on the current face: the direction vanishes
                    // on Z's null space, so a crushed iterate can look
                    // optimal while it is merely stuck. Regrow rank once and
                    // retry before concluding the sweep is done.
                    if (!(dec > 0.0)) {
                        if (regrown) break;
                        regrown = true;
                        regrow(Zd, 0.02);
                        compl_cur = compl_of();
                        continue;
                    }
                    double t_bound = std::numeric_limits<double>::infinity();
                    for (int j = 0; j < nb; ++j)
                        t_bound = std::min(t_bound, detail::max_step(Zd[j], D[j]));
                    // Do not overshoot past the target complementarity.
                    double t = (compl_cur - 0.5 * gap_needed) / dec;
                    if (std::isfinite(t_bound)) t = std::min(t, 0.72 * t_bound);
                    if (!(t > 0.0)) {
                        if (regrown) break;
                        regrown = true;
                        regrow(Zd, 0.02);
                        compl_cur = compl_of();
                        continue;
                    }
                    for (int j = 0; j < nb; ++j) Zd[j] += t * D[j];
                    compl_cur -= t * dec;
                    regrown = false;
                    if ((cycle & 3) == 3) {
                        // Mild periodic floor so a boundary step cannot pin
                        // the iterate onto a wrong face for good.
                        regrow(Zd, 0.005);
                        compl_cur = compl_of();
                        if (compl_cur > 0.995 * mark) break;
                        mark = compl_cur;
                    }
                }
                if (opt.verbose)
                    std::cerr << "    gap descent phase " << phase << ": dual sweep -> "
                              << compl_cur << "\n";
                if (compl_cur <= gap_needed) break;

                // Primal sweep: descent steps on c.x while the line search
                // keeps S in the cone; primal feasibility stays exact
                // because S moves by exactly sum_i dx_i F_i. The direction
                // uses the NT-scaled normal matrix: unlike the floored
                // projection weights, it keeps the full boundary repulsion,
                // so the step slides along the cone instead of into it.
                for (int cycle = 0; cycle < 10 && compl_cur > gap_needed; ++cycle) {
                    std::vector<Mat> Hh(nb);
                    for (int j = 0; j < nb; ++j) {
                        Eigen::SelfAdjointEigenSolver<Mat> es(
                            detail::nt_scaling(Sd[j], Zd[j]).Winv);
                        Hh[j] = es.eigenvectors() *
                                es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                es.eigenvectors().transpose();
                    }
                    Eigen::BDCSVD<Mat> svd_p(stack_sandwich(Hh), Eigen::ComputeThinV);
                    if (svd_p.info() != Eigen::Success) break;
                    const Vec dx = -normal_solve(svd_p, c);
                    const double dec = -c.dot(dx);
                    if (!(dec > 0.0)) break;
                    double t_bound = std::numeric_limits<double>::infinity();
                    std::vector<Mat> dS(nb);
                    for (int j = 0; j < nb; ++j) {
                        dS[j] = Mat::Zero(Sd[j].rows(), Sd[j].cols());
                        for (const auto& [i, F] : blk[j].Fi) dS[j] += dx[i] * F;
                        t_bound = std::min(t_bound, detail::max_step(Sd[j], dS[j]));
                    }
                    double t = (compl_cur - 0.5 * gap_needed) / dec;
                    if (std::isfinite(t_bound)) t = std::min(t, 0.72 * t_bound);
                    if (!(t > 0.0)) break;
                    xd += t * dx;
                    for (int j = 0; j < nb; ++j) Sd[j] += t * dS[j];
                    compl_cur -= t * dec;
                    if (!refresh_weights()) break;
                    gap_needed = target_of();
                }
                reproject(Zd);
                compl_cur = compl_of();
                gap_needed = target_of();
                if (opt.verbose)
                    std::cerr << "    gap descent phase " << phase << ": primal sweep -> "
                              << compl_cur << " pobj " << c.dot(xd) << "\n";
                if (compl_cur > 0.995 * at_phase_start) {
                    if (++lull >= 3) break;
                } else {
                    lull = 0;
                }
            }

            // Re-anchor the primal block exactly on x, then make the final
            // feasibility and cone checks.
            for (int j = 0; j < nb; ++j) {
                Sd[j] = blk[j].F0;
                for (const auto& [i, F] : blk[j].Fi) Sd[j] += xd[i] * F;
                Sd[j] = 0.5 * (Sd[j] + Sd[j].transpose());
            }
            reproject(Zd);
            bool conic = settle(Zd);
            compl_cur = compl_of();
            gap_needed = target_of();
            if (!conic || compl_cur > gap_needed) {
                if (opt.verbose)
                    std::cerr << "    gap descent aborted: conic " << conic << " compl "
                              << compl_cur << " needed " << gap_needed << "\n";
                recentre_cooldown = 5;
                return false;
            }
            x = xd;
            S = std::move(Sd);
            Z = std::move(Zd);
            stall = 0;
            if (opt.verbose)
                std::cerr << "    gap descent: mu " << mu << " -> " << compl_cur / total_dim
                          << "\n";
            return true;
        };

        bool restored = false;
        if (quality < 0.05) {
            // Pinned step: the dual direction exits the cone through Z's
            // near-zero eigenvalues, which an additive Newton step cannot
            // shrink multiplicatively; descend the gap directly instead.
            if (gap_descent()) continue;
            // Fall back to restoring centrality through a lifted barrier
            // target so the next corrector can take a real step.
            restored = true;
            const double lift = std::max(2.0 * mu, mu_floor);
            newton(lift, {}, N, dxc, dZc, dSc);
            boundary_steps(ap_max, ad_max);
            cross_term(dSc, dZc,
                       std::min(1.0, opt.step_frac * ap_max) *
                           std::min(1.0, opt.step_frac * ad_max));
            newton(lift, Kc, N, dxc, dZc, dSc);
            boundary_steps(ap_max, ad_max);
        }
        double ap = std::min(1.0, opt.step_frac * ap_max);
        double ad = std::min(1.0, opt.step_frac * ad_max);

        // Once feasibility is achieved the complementarity is the only open
        // criterion, so a step may not raise it past its intent: correctors
        // must essentially not regress, restoration may lift a bounded
        // amount. The realized value along the step is an exact quadratic in
        // a common shrink factor; backtrack until it honors the cap.
        if (pinf <= opt.feas_tol && dinf <= 1e2 * opt.feas_tol) {
            double lin = 0.0, quad = 0.0;
            for (int j = 0; j < nb; ++j) {
                lin += ad * (S[j].cwiseProduct(dZc[j])).sum() +
                       ap * (dSc[j].cwiseProduct(Z[j])).sum();
                quad += ap * ad * (dSc[j].cwiseProduct(dZc[j])).sum();
            }
            const double now = total_dim * mu;
            const double cap = restored ? 3.0 * now : 1.005 * now;
            if (now + lin + quad > cap) {
                // Largest t in [0,1] keeping the quadratic below the cap;
                // c < 0 guarantees the stable positive-root form.
                const double c0 = now - cap;
                const double disc = lin * lin - 4.0 * quad * c0;
                const double denom = lin + std::sqrt(std::max(0.0, disc));
                double t = denom > 0.0 ? -2.0 * c0 / denom : 0.0;
                t = std::clamp(0.99 * t, 0.0, 1.0);
                ap *= t;
                ad *= t;
                // A collapsed cap means every Newton direction regresses the
                // gap; direct descent is the remaining way to make progress.
                if (std::min(ap, ad) < 1e-4 && gap_descent()) continue;
            }
        }

        if (opt.verbose)
            std::cerr << "    sigma " << sigma << " alpha_aff " << alpha_aff << " ap " << ap
                      << " ad " << ad << " ap_max " << ap_max << " ad_max " << ad_max << "\n";

        if (ap < 1e-10 && ad < 1e-10) {
            if (++stall >= 3) {
                // Last resort before giving up; the cooldown exists to stop
                // per-iteration thrash, not to veto a final attempt.
                recentre_cooldown = 0;
                if (gap_descent()) continue;
                return finish(SdpStatus::numerical_failure,
                              "step lengths collapsed (pinf " + fmt_sci(pinf) + ", dinf " +
                                  fmt_sci(dinf) + ", gap " + fmt_sci(gap) + ")",
                              iter);
            }
        } else {
            stall = 0;
        }

        x += ap * dxc;
        for (int j = 0; j < nb; ++j) {
            S[j] += ap * dSc[j];
            Z[j] += ad * dZc[j];
            S[j] = 0.5 * (S[j] + S[j].transpose());
            Z[j] = 0.5 * (Z[j] + Z[j].transpose());
        }
    }
    return finish(SdpStatus::numerical_failure,
                  "iteration limit reached (gap " + fmt_sci(sol.gap) + ")", opt.max_iter);
}

// Smallest feasible parameter in [lo, hi] for a monotone feasibility predicate
// (infeasible below, feasible above). Bisection halves the bracket each step.
inline double feasibility_bisect(const std::function<bool(double)>& feasible, double lo,
                                 double hi, double rel_tol = 1e-9) {
    if (!(lo <= hi)) throw std::invalid_argument("feasibility_bisect: empty bracket");
    if (feasible(lo)) return lo;
    if (!feasible(hi))
        throw std::invalid_argument("feasibility_bisect: upper bracket end infeasible");
    while (hi - lo > rel_tol * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

inline void SdpProblem::dump(std::ostream& os) const {
    os.precision(17);
    os << "gaussrt-lmi 1\n";
    os << "vars " << m_ << "\n";
    os << "objective\n";
    for (int i = 0; i < m_; ++i) os << c_[i] << (i + 1 < m_ ? ' ' : '\n');
    os << "blocks " << blocks_.size() << "\n";
    for (const auto& b : blocks_) {
        const bool real = detail::nearly_real(b.constant) &&
                          std::all_of(b.coeff.begin(), b.coeff.end(),
                                      [](const auto& p) { return detail::nearly_real(p.second); });
        const int d = static_cast<int>(b.constant.rows());
        os << "block " << d << ' ' << (real ? "real" : "complex") << ' ' << b.coeff.size() << "\n";
        auto put = [&](const CMat& F) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    os << F(i, j).real();
                    if (!real) os << ' ' << F(i, j).imag();
                    os << ((i == d - 1 && j == d - 1) ? '\n' : ' ');
                }
        };
        os << "constant\n";
        put(b.constant);
        for (const auto& [i, F] : b.coeff) {
            os << "coeff " << i << "\n";
            put(F);
        }
    }
    os << "end\n";
}

inline SdpProblem SdpProblem::load(std::istream& is) {
    auto expect = [&](const std::string& tok) {
        std::string s;
        if (!(is >> s) || s != tok)
            throw std::runtime_error("lmi parse error: expected '" + tok + "', got '" + s + "'");
    };
    expect("gaussrt-lmi");
    int version, m;
    is >> version;
    if (version != 1) throw std::runtime_error("lmi parse error: unsupported version");
    expect("vars");
    is >> m;
    SdpProblem p(m);
    expect("objective");
    Vec c(m);
    for (int i = 0; i < m; ++i) is >> c[i];
    p.set_objective(c);
    expect("blocks");
    int nb;
    is >> nb;
    for (int b = 0; b < nb; ++b) {
        expect("block");
        int d, ncoeff;
        std::string kind;
        is >> d >> kind >> ncoeff;
        const bool real = kind == "real";
        if (!real && kind != "complex") throw std::runtime_error("lmi parse error: block kind");
        auto get = [&]() {
            CMat F(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double re, im = 0.0;
                    is >> re;
                    if (!real) is >> im;
                    F(i, j) = {re, im};
                }
            if (!is) throw std::runtime_error("lmi parse error: matrix entries");
            return F;
        };
        expect("constant");
        int id = p.add_block(get());
        for (int k = 0; k < ncoeff; ++k) {
            expect("coeff");
            int var;
            is >> var;
            p.set_coeff(id, var, get());
        }
    }
    expect("end");
    return p;
}

}  // namespace gaussrt
