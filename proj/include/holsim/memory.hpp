// memory.hpp — classical-storage accounting for dense state vectors: bits for
// an n-qubit register, for a site (x) Fock product space, and the largest
// register a byte budget admits. All arithmetic is exact u64 with explicit
// overflow guards so boundary cases are bit-exact.

#pragma once

#include <cstdint>
#include <string>

#include "holsim/model.hpp"

namespace holsim {

struct MemoryModel {
    std::uint64_t bits_per_amplitude_component = 32;  // one real or imaginary part
    static constexpr std::uint64_t kComponentsPerAmplitude = 2;

    void validate() const;
    std::uint64_t bits_per_amplitude() const {
        return bits_per_amplitude_component * kComponentsPerAmplitude;
    }
};

/// B = 2^n * 2 * bits_per_component (= 2^{n+6} with defaults).
std::uint64_t qubit_state_bits(int n_qubits, const MemoryModel& model = {});

/// Bits for one dense vector over the joint site (x) Fock basis.
std::uint64_t product_basis_bits(const ProductBasis& basis, const MemoryModel& model = {});

/// Largest n with qubit_state_bits(n) <= budget_bits. The budget must cover
/// at least one amplitude.
int max_qubits(std::uint64_t budget_bits, const MemoryModel& model = {});

/// "16 GiB", "1.5 MiB", "640 B" — binary units, trailing zeros trimmed.
std::string format_bytes_human(std::uint64_t bytes);

/// Whole bytes needed to hold the given bit count (rounds up).
std::uint64_t bits_to_bytes(std::uint64_t bits);

}  // namespace holsim
