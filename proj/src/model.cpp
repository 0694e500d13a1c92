#include "holsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace holsim {

namespace {

std::string pair_str(int i, int j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

void SiteNetwork::validate() const {
    const int n = n_sites();
    if (n < 1) {
        throw ValidationError("network must have at least one site");
    }
    for (double e : on_site_energies) {
        if (!std::isfinite(e)) {
            throw ValidationError("on-site energies must be finite");
        }
    }
    std::set<std::pair<int, int>> seen;
    for (const Coupling& c : couplings) {
        if (c.i < 0 || c.i >= n || c.j < 0 || c.j >= n) {
            throw ValidationError("coupling " + pair_str(c.i, c.j) + " has a site index outside [0, " +
                                  std::to_string(n) + ")");
        }
        if (c.i == c.j) {
            throw ValidationError("self-coupling at site " + std::to_string(c.i) + " is not allowed");
        }
        if (!std::isfinite(c.amplitude)) {
            throw ValidationError("coupling " + pair_str(c.i, c.j) + " has a non-finite amplitude");
        }
        auto key = std::minmax(c.i, c.j);
        if (!seen.insert(key).second) {
            throw ValidationError("duplicate coupling pair " + pair_str(key.first, key.second));
        }
    }
    if (sink) {
        if (sink->site < 0 || sink->site >= n) {
            throw ValidationError("sink site " + std::to_string(sink->site) + " outside [0, " +
                                  std::to_string(n) + ")");
        }
        if (!(sink->rate >= 0.0) || !std::isfinite(sink->rate)) {
            throw ValidationError("sink rate must be nonnegative and finite");
        }
    }
}

std::vector<int> BathSpec::fock_cutoffs() const {
    std::vector<int> out;
    out.reserve(modes.size());
    for (const BathMode& m : modes) out.push_back(m.fock_cutoff);
    return out;
}

void BathSpec::validate(int n_sites) const {
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (!(modes[k].frequency > 0.0) || !std::isfinite(modes[k].frequency)) {
            throw ValidationError("bath mode " + std::to_string(k) +
                                  " frequency must be strictly positive");
        }
        if (modes[k].fock_cutoff < 1) {
            throw ValidationError("bath mode " + std::to_string(k) + " Fock cutoff must be >= 1");
        }
    }
    if (couplings.rows() != n_sites || couplings.cols() != static_cast<Eigen::Index>(modes.size())) {
        throw ValidationError("bath coupling matrix is " + std::to_string(couplings.rows()) + "x" +
                              std::to_string(couplings.cols()) + ", expected " +
                              std::to_string(n_sites) + "x" + std::to_string(modes.size()));
    }
    if (!couplings.allFinite()) {
        throw ValidationError("bath couplings must be finite");
    }
}

ProductBasis::ProductBasis(int n_sites, std::vector<int> fock_cutoffs, std::size_t dim_limit)
    : n_sites_(n_sites), cutoffs_(std::move(fock_cutoffs)) {
    if (n_sites_ < 1) {
        throw ValidationError("product basis needs at least one site");
    }
    for (std::size_t k = 0; k < cutoffs_.size(); ++k) {
        if (cutoffs_[k] < 1) {
            throw ValidationError("Fock cutoff for mode " + std::to_string(k) + " must be >= 1");
        }
    }
    // Dimension check runs before anything sized by total_dim is allocated.
    const std::size_t max_dim = std::numeric_limits<std::size_t>::max();
    bath_dim_ = 1;
    for (int c : cutoffs_) {
        const std::size_t radix = static_cast<std::size_t>(c) + 1;
        if (bath_dim_ > max_dim / radix) {
            throw ResourceError("product basis dimension overflows");
        }
        bath_dim_ *= radix;
    }
    if (bath_dim_ > max_dim / static_cast<std::size_t>(n_sites_)) {
        throw ResourceError("product basis dimension overflows");
    }
    total_dim_ = static_cast<std::size_t>(n_sites_) * bath_dim_;
    if (total_dim_ > dim_limit) {
        throw ResourceError("product basis dimension " + std::to_string(total_dim_) +
                            " exceeds the limit " + std::to_string(dim_limit));
    }
    strides_.assign(cutoffs_.size(), 1);
    for (int k = static_cast<int>(cutoffs_.size()) - 2; k >= 0; --k) {
        strides_[k] = strides_[k + 1] * (static_cast<std::size_t>(cutoffs_[k + 1]) + 1);
    }
}

std::size_t ProductBasis::bath_index(std::span<const int> occupation) const {
    if (occupation.size() != cutoffs_.size()) {
        throw ValidationError("occupation vector has wrong mode count");
    }
    std::size_t idx = 0;
    for (std::size_t k = 0; k < cutoffs_.size(); ++k) {
        if (occupation[k] < 0 || occupation[k] > cutoffs_[k]) {
            throw ValidationError("occupation " + std::to_string(occupation[k]) +
                                  " outside [0, " + std::to_string(cutoffs_[k]) + "] for mode " +
                                  std::to_string(k));
        }
        idx += static_cast<std::size_t>(occupation[k]) * strides_[k];
    }
    return idx;
}

void ProductBasis::bath_occupation(std::size_t bath_index, std::vector<int>& occupation) const {
    if (bath_index >= bath_dim_) {
        throw ValidationError("bath index out of range");
    }
    occupation.resize(cutoffs_.size());
    for (std::size_t k = 0; k < cutoffs_.size(); ++k) {
        occupation[k] = static_cast<int>(bath_index / strides_[k]);
        bath_index %= strides_[k];
    }
}

std::size_t ProductBasis::encode(int site, std::span<const int> occupation) const {
    if (site < 0 || site >= n_sites_) {
        throw ValidationError("site index out of range");
    }
    return static_cast<std::size_t>(site) * bath_dim_ + bath_index(occupation);
}

void ProductBasis::decode(std::size_t index, int& site, std::vector<int>& occupation) const {
    if (index >= total_dim_) {
        throw ValidationError("basis index out of range");
    }
    site = static_cast<int>(index / bath_dim_);
    bath_occupation(index % bath_dim_, occupation);
}

OperatorMatrix OperatorMatrix::from_triplets(std::size_t dim,
                                             const std::vector<Eigen::Triplet<Complex>>& entries,
                                             bool hermitian) {
    SparseMatrixXcd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setFromTriplets(entries.begin(), entries.end());
    return from_sparse(std::move(m), hermitian);
}

OperatorMatrix OperatorMatrix::from_sparse(SparseMatrixXcd matrix, bool hermitian) {
    if (matrix.rows() != matrix.cols()) {
        throw ValidationError("operator matrix must be square");
    }
    OperatorMatrix out;
    matrix.prune([](Eigen::Index, Eigen::Index, const Complex& v) { return v != Complex{0.0, 0.0}; });
    matrix.makeCompressed();
    out.matrix_ = std::move(matrix);
    out.hermitian_ = hermitian;
    if (hermitian) {
        const SparseMatrixXcd diff = out.matrix_ - SparseMatrixXcd(out.matrix_.adjoint());
        double max_diff = 0.0;
        for (int k = 0; k < diff.outerSize(); ++k) {
            for (SparseMatrixXcd::InnerIterator it(diff, k); it; ++it) {
                max_diff = std::max(max_diff, std::abs(it.value()));
            }
        }
        if (max_diff > kHermitianTol * out.max_abs()) {
            throw ValidationError("operator flagged Hermitian violates the Hermiticity tolerance");
        }
    }
    return out;
}

OperatorMatrix OperatorMatrix::from_dense(const Eigen::MatrixXcd& matrix, bool hermitian) {
    return from_sparse(matrix.sparseView(), hermitian);
}

double OperatorMatrix::max_abs() const {
    double m = 0.0;
    for (int k = 0; k < matrix_.outerSize(); ++k) {
        for (SparseMatrixXcd::InnerIterator it(matrix_, k); it; ++it) {
            m = std::max(m, std::abs(it.value()));
        }
    }
    return m;
}

OperatorMatrix build_system_hamiltonian(const SiteNetwork& net) {
    net.validate();
    const int n = net.n_sites();
    std::vector<Eigen::Triplet<Complex>> entries;
    entries.reserve(static_cast<std::size_t>(n) + 2 * net.couplings.size());
    for (int i = 0; i < n; ++i) {
        entries.emplace_back(i, i, Complex{net.on_site_energies[i], 0.0});
    }
    for (const Coupling& c : net.couplings) {
        entries.emplace_back(c.i, c.j, Complex{c.amplitude, 0.0});
        entries.emplace_back(c.j, c.i, Complex{c.amplitude, 0.0});
    }
    return OperatorMatrix::from_triplets(static_cast<std::size_t>(n), entries, true);
}

OperatorMatrix build_bath_hamiltonian(const BathSpec& bath, const ProductBasis& basis) {
    bath.validate(basis.n_sites());
    if (bath.fock_cutoffs() != basis.fock_cutoffs()) {
        throw ValidationError("bath Fock cutoffs do not match the product basis");
    }
    const std::size_t dim = basis.total_dim();
    std::vector<Eigen::Triplet<Complex>> entries;
    entries.reserve(dim);
    std::vector<int> occ;
    for (std::size_t b = 0; b < basis.bath_dim(); ++b) {
        basis.bath_occupation(b, occ);
        double energy = 0.0;
        for (int k = 0; k < bath.n_modes(); ++k) {
            energy += bath.modes[k].frequency * occ[k];
        }
        if (energy == 0.0) continue;
        for (int site = 0; site < basis.n_sites(); ++site) {
            const auto idx = static_cast<Eigen::Index>(static_cast<std::size_t>(site) * basis.bath_dim() + b);
            entries.emplace_back(idx, idx, Complex{energy, 0.0});
        }
    }
    return OperatorMatrix::from_triplets(dim, entries, true);
}

OperatorMatrix build_interaction_hamiltonian(const SiteNetwork& net, const BathSpec& bath,
                                             const ProductBasis& basis) {
    net.validate();
    bath.validate(basis.n_sites());
    if (net.n_sites() != basis.n_sites()) {
        throw ValidationError("network size does not match the product basis");
    }
    if (bath.fock_cutoffs() != basis.fock_cutoffs()) {
        throw ValidationError("bath Fock cutoffs do not match the product basis");
    }
    const std::size_t dim = basis.total_dim();
    std::vector<Eigen::Triplet<Complex>> entries;
    std::vector<int> occ;
    // P_i (x) (a_k + a_k^dag): raising element sqrt(n_k + 1) between bath
    // states differing by one quantum in mode k, on the site-i block.
    for (std::size_t b = 0; b < basis.bath_dim(); ++b) {
        basis.bath_occupation(b, occ);
        for (int k = 0; k < bath.n_modes(); ++k) {
            if (occ[k] >= basis.fock_cutoffs()[k]) continue;
            occ[k] += 1;
            const std::size_t b_up = basis.bath_index(occ);
            occ[k] -= 1;
            const double ladder = std::sqrt(static_cast<double>(occ[k]) + 1.0);
            for (int site = 0; site < basis.n_sites(); ++site) {
                const double g = bath.couplings(site, k);
                if (g == 0.0) continue;
                const auto row = static_cast<Eigen::Index>(static_cast<std::size_t>(site) * basis.bath_dim() + b_up);
                const auto col = static_cast<Eigen::Index>(static_cast<std::size_t>(site) * basis.bath_dim() + b);
                entries.emplace_back(row, col, Complex{g * ladder, 0.0});
                entries.emplace_back(col, row, Complex{g * ladder, 0.0});
            }
        }
    }
    return OperatorMatrix::from_triplets(dim, entries, true);
}

OperatorMatrix embed_system_operator(const OperatorMatrix& system_op, const ProductBasis& basis) {
    if (system_op.dim() != static_cast<std::size_t>(basis.n_sites())) {
        throw ValidationError("system operator dimension does not match the basis site count");
    }
    const std::size_t bath_dim = basis.bath_dim();
    std::vector<Eigen::Triplet<Complex>> entries;
    const SparseMatrixXcd& sys = system_op.sparse();
    entries.reserve(static_cast<std::size_t>(sys.nonZeros()) * bath_dim);
    for (int col = 0; col < sys.outerSize(); ++col) {
        for (SparseMatrixXcd::InnerIterator it(sys, col); it; ++it) {
            for (std::size_t b = 0; b < bath_dim; ++b) {
                entries.emplace_back(
                    static_cast<Eigen::Index>(static_cast<std::size_t>(it.row()) * bath_dim + b),
                    static_cast<Eigen::Index>(static_cast<std::size_t>(it.col()) * bath_dim + b),
                    it.value());
            }
        }
    }
    return OperatorMatrix::from_triplets(basis.total_dim(), entries, system_op.hermitian());
}

OperatorMatrix build_total_hamiltonian(const SiteNetwork& net, const BathSpec& bath,
                                       const ProductBasis& basis) {
    const OperatorMatrix h_sys = embed_system_operator(build_system_hamiltonian(net), basis);
    const OperatorMatrix h_vib = build_bath_hamiltonian(bath, basis);
    const OperatorMatrix h_int = build_interaction_hamiltonian(net, bath, basis);
    SparseMatrixXcd total = h_sys.sparse() + h_vib.sparse() + h_int.sparse();
    return OperatorMatrix::from_sparse(std::move(total), true);
}

const char* topology_name(Topology t) {
    switch (t) {
        case Topology::Chain: return "chain";
        case Topology::Ring: return "ring";
        case Topology::Complete: return "complete";
        case Topology::Explicit: return "explicit";
    }
    return "unknown";
}

std::optional<Topology> topology_from_name(const std::string& name) {
    if (name == "chain") return Topology::Chain;
    if (name == "ring") return Topology::Ring;
    if (name == "complete") return Topology::Complete;
    if (name == "explicit") return Topology::Explicit;
    return std::nullopt;
}

std::vector<std::pair<int, int>> topology_edges(int n_sites, Topology topology,
                                                const std::vector<std::pair<int, int>>& explicit_edges) {
    std::vector<std::pair<int, int>> edges;
    switch (topology) {
        case Topology::Chain:
            for (int i = 0; i + 1 < n_sites; ++i) edges.emplace_back(i, i + 1);
            break;
        case Topology::Ring:
            for (int i = 0; i + 1 < n_sites; ++i) edges.emplace_back(i, i + 1);
            if (n_sites > 2) edges.emplace_back(n_sites - 1, 0);
            break;
        case Topology::Complete:
            for (int i = 0; i < n_sites; ++i)
                for (int j = i + 1; j < n_sites; ++j) edges.emplace_back(i, j);
            break;
        case Topology::Explicit:
            edges = explicit_edges;
            break;
    }
    return edges;
}

SiteNetwork generate_disordered_network(int n_sites, Topology topology,
                                        const Distribution& energy,
                                        const Distribution& coupling,
                                        std::uint64_t seed,
                                        const std::vector<std::pair<int, int>>& explicit_edges) {
    if (n_sites < 1) {
        throw ValidationError("network must have at least one site");
    }
    energy.validate();
    coupling.validate();
    Rng rng(seed);
    SiteNetwork net;
    net.on_site_energies.reserve(static_cast<std::size_t>(n_sites));
    for (int i = 0; i < n_sites; ++i) {
        net.on_site_energies.push_back(energy.sample(rng));
    }
    for (const auto& [i, j] : topology_edges(n_sites, topology, explicit_edges)) {
        net.couplings.push_back({i, j, coupling.sample(rng)});
    }
    net.validate();
    return net;
}

}  // namespace holsim
