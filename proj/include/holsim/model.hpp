// model.hpp — site networks, truncated bosonic baths, and Hamiltonian builders.
//
// Conventions: hbar = 1, all energies and rates are angular frequencies, times
// their inverses. The particle lives in the single-excitation manifold, so the
// system space is the N-dimensional site basis and hopping terms are |i><j|.

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "holsim/errors.hpp"
#include "holsim/rng.hpp"

namespace holsim {

using Complex = std::complex<double>;
using SparseMatrixXcd = Eigen::SparseMatrix<Complex>;

/// Coherent coupling t between sites i and j (one entry per unordered pair).
struct Coupling {
    int i = 0;
    int j = 0;
    double amplitude = 0.0;
};

/// Irreversible capture at one site; captured weight is reported as 1 - tr(rho).
struct Sink {
    int site = 0;
    double rate = 0.0;
};

struct SiteNetwork {
    std::vector<double> on_site_energies;
    std::vector<Coupling> couplings;
    std::optional<Sink> sink;

    int n_sites() const { return static_cast<int>(on_site_energies.size()); }

    /// Throws ValidationError on index-range violations, self-couplings,
    /// duplicate unordered pairs, or a bad sink.
    void validate() const;
};

struct BathMode {
    double frequency = 0.0;  // nu_k > 0
    int fock_cutoff = 1;     // n_max_k >= 1
};

struct BathSpec {
    std::vector<BathMode> modes;
    Eigen::MatrixXd couplings;  // g_{i,k}, n_sites x n_modes

    int n_modes() const { return static_cast<int>(modes.size()); }
    std::vector<int> fock_cutoffs() const;

    void validate(int n_sites) const;
};

/// Indexed product basis |site> (x) |n_0, ..., n_{K-1}> with per-mode Fock
/// truncation. Site-major layout: flat = site * bath_dim + bath_index, with
/// mode 0 the slowest-varying occupation digit.
class ProductBasis {
public:
    static constexpr std::size_t kDefaultDimLimit = std::size_t{1} << 20;

    ProductBasis(int n_sites, std::vector<int> fock_cutoffs,
                 std::size_t dim_limit = kDefaultDimLimit);

    int n_sites() const { return n_sites_; }
    int n_modes() const { return static_cast<int>(cutoffs_.size()); }
    const std::vector<int>& fock_cutoffs() const { return cutoffs_; }
    std::size_t bath_dim() const { return bath_dim_; }
    std::size_t total_dim() const { return total_dim_; }

    std::size_t encode(int site, std::span<const int> occupation) const;
    void decode(std::size_t index, int& site, std::vector<int>& occupation) const;

    std::size_t bath_index(std::span<const int> occupation) const;
    void bath_occupation(std::size_t bath_index, std::vector<int>& occupation) const;

private:
    int n_sites_;
    std::vector<int> cutoffs_;
    std::vector<std::size_t> strides_;  // per mode, mode K-1 has stride 1
    std::size_t bath_dim_ = 1;
    std::size_t total_dim_ = 0;
};

/// Square complex operator, sparse storage. The hermitian flag is verified at
/// construction: ||A - A^dag||_max <= 1e-12 * ||A||_max.
class OperatorMatrix {
public:
    static constexpr double kHermitianTol = 1e-12;

    OperatorMatrix() = default;

    static OperatorMatrix from_triplets(std::size_t dim,
                                        const std::vector<Eigen::Triplet<Complex>>& entries,
                                        bool hermitian);
    static OperatorMatrix from_sparse(SparseMatrixXcd matrix, bool hermitian);
    static OperatorMatrix from_dense(const Eigen::MatrixXcd& matrix, bool hermitian);

    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    bool hermitian() const { return hermitian_; }
    const SparseMatrixXcd& sparse() const { return matrix_; }
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix_ * v; }

    /// Largest entry magnitude (max norm).
    double max_abs() const;

private:
    SparseMatrixXcd matrix_;
    bool hermitian_ = false;
};

/// H_p: E_i on the diagonal, t_ij symmetric off-diagonals. N x N, Hermitian.
OperatorMatrix build_system_hamiltonian(const SiteNetwork& net);

/// H_vib: diagonal sum_k nu_k n_k over the joint basis, site-independent.
OperatorMatrix build_bath_hamiltonian(const BathSpec& bath, const ProductBasis& basis);

/// H_int: sum_{i,k} g_{i,k} P_i (x) (a_k + a_k^dag), ladder elements sqrt(n+1)
/// truncated at the per-mode cutoff. Hermitian.
OperatorMatrix build_interaction_hamiltonian(const SiteNetwork& net, const BathSpec& bath,
                                             const ProductBasis& basis);

/// H = H_p (x) 1 + 1 (x) H_vib + H_int on the joint space.
OperatorMatrix build_total_hamiltonian(const SiteNetwork& net, const BathSpec& bath,
                                       const ProductBasis& basis);

/// Lifts an N x N system operator to the joint space as A (x) 1_bath.
OperatorMatrix embed_system_operator(const OperatorMatrix& system_op, const ProductBasis& basis);

enum class Topology { Chain, Ring, Complete, Explicit };

const char* topology_name(Topology t);
std::optional<Topology> topology_from_name(const std::string& name);

/// Edge list of a topology in canonical draw order.
std::vector<std::pair<int, int>> topology_edges(int n_sites, Topology topology,
                                                const std::vector<std::pair<int, int>>& explicit_edges = {});

/// Draws on-site energies (site order) then coupling amplitudes (canonical
/// edge order) from the given distributions. Same seed + parameters produce
/// an identical network.
SiteNetwork generate_disordered_network(int n_sites, Topology topology,
                                        const Distribution& energy,
                                        const Distribution& coupling,
                                        std::uint64_t seed,
                                        const std::vector<std::pair<int, int>>& explicit_edges = {});

}  // namespace holsim
