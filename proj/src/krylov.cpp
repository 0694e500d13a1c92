#include "holsim/krylov.hpp"

#include <cmath>
#include <string>

#include "holsim/errors.hpp"

namespace holsim {

namespace {

// exp(-i dt T) e_1 for the real symmetric tridiagonal T spanned by
// (alpha[0..m-1], beta[0..m-2]).
Eigen::VectorXcd expm_tridiag_e1(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                                 int m, double dt) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = alpha(i);
    for (int i = 0; i + 1 < m; ++i) {
        t(i, i + 1) = beta(i);
        t(i + 1, i) = beta(i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd& lambda = es.eigenvalues();
    const Eigen::MatrixXd& q = es.eigenvectors();
    Eigen::VectorXcd phases(m);
    for (int i = 0; i < m; ++i) {
        phases(i) = std::exp(Complex{0.0, -lambda(i) * dt});
    }
    return q.cast<Complex>() * phases.cwiseProduct(q.row(0).transpose().cast<Complex>());
}

Eigen::VectorXcd expv_step(const OperatorMatrix& h, const Eigen::VectorXcd& v, double dt,
                           const KrylovOptions& opt, int depth) {
    const double norm_v = v.norm();
    if (dt == 0.0 || norm_v == 0.0) return v;

    const auto dim = static_cast<int>(h.dim());
    const int max_m = std::min(opt.max_subspace, dim);

    Eigen::MatrixXcd basis(v.size(), max_m + 1);
    basis.col(0) = v / norm_v;
    Eigen::VectorXd alpha(max_m), beta(max_m);

    int m = 0;
    bool converged = false;
    bool breakdown = false;
    double err_est = 0.0;
    Eigen::VectorXcd small_sol;

    while (m < max_m) {
        Eigen::VectorXcd w = h.apply(basis.col(m));
        if (m > 0) w -= beta(m - 1) * basis.col(m - 1);
        alpha(m) = basis.col(m).dot(w).real();
        w -= alpha(m) * basis.col(m);
        // full reorthogonalization keeps the subspace clean at these dims
        for (int k = 0; k <= m; ++k) {
            w -= basis.col(k).dot(w) * basis.col(k);
        }
        beta(m) = w.norm();
        ++m;

        if (beta(m - 1) <= 1e-14 * std::max(1.0, h.max_abs())) {
            // invariant subspace: the tridiagonal result is exact
            small_sol = expm_tridiag_e1(alpha, beta, m, dt);
            converged = true;
            breakdown = true;
            break;
        }
        basis.col(m) = w / beta(m - 1);

        small_sol = expm_tridiag_e1(alpha, beta, m, dt);
        err_est = beta(m - 1) * std::abs(small_sol(m - 1));
        if (err_est <= opt.tolerance) {
            converged = true;
            break;
        }
    }

    if (!converged && m >= dim) {
        // subspace spans the whole space, result is exact
        converged = true;
    }
    if (!converged) {
        if (depth >= opt.max_splits) {
            throw IntegratorError(
                "krylov propagator failed to converge: dim=" + std::to_string(dim) +
                ", dt=" + std::to_string(dt) + ", subspace=" + std::to_string(m) +
                ", error estimate=" + std::to_string(err_est) +
                ", tolerance=" + std::to_string(opt.tolerance) + "; split budget exhausted");
        }
        Eigen::VectorXcd half = expv_step(h, v, dt / 2.0, opt, depth + 1);
        return expv_step(h, half, dt / 2.0, opt, depth + 1);
    }

    (void)breakdown;
    return norm_v * (basis.leftCols(m) * small_sol);
}

}  // namespace

Eigen::VectorXcd krylov_expv(const OperatorMatrix& hamiltonian, const Eigen::VectorXcd& v,
                             double dt, const KrylovOptions& options) {
    if (hamiltonian.dim() != static_cast<std::size_t>(v.size())) {
        throw ValidationError("krylov_expv: dimension mismatch between operator and vector");
    }
    if (!hamiltonian.hermitian()) {
        throw ValidationError("krylov_expv requires a Hermitian operator");
    }
    return expv_step(hamiltonian, v, dt, options, 0);
}

}  // namespace holsim
