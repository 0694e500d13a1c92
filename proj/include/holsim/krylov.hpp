// krylov.hpp — Lanczos approximation of exp(-i H dt) v for Hermitian H.

#pragma once

#include <Eigen/Dense>

#include "holsim/model.hpp"

namespace holsim {

struct KrylovOptions {
    double tolerance = 1e-12;  // per-step action error target, relative to ||v||
    int max_subspace = 96;     // Lanczos vectors per (sub)step
    int max_splits = 30;       // recursive dt halvings before giving up
};

/// Applies exp(-i H dt) to v. Builds a Lanczos subspace with full
/// reorthogonalization; if the a-posteriori error estimate does not reach the
/// tolerance within max_subspace vectors, the step is split in half and the
/// two halves applied recursively. Throws IntegratorError when the split
/// budget is exhausted.
Eigen::VectorXcd krylov_expv(const OperatorMatrix& hamiltonian, const Eigen::VectorXcd& v,
                             double dt, const KrylovOptions& options = {});

}  // namespace holsim
