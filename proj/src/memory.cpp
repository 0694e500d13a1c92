#include "holsim/memory.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "holsim/errors.hpp"

namespace holsim {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw ResourceError(std::string(what) + " exceeds the 64-bit bit-count range");
    }
    return out;
}

}  // namespace

void MemoryModel::validate() const {
    if (bits_per_amplitude_component == 0) {
        throw ValidationError("memory model: bits_per_amplitude_component must be > 0");
    }
}

std::uint64_t qubit_state_bits(int n_qubits, const MemoryModel& model) {
    model.validate();
    if (n_qubits < 0) {
        throw ValidationError("qubit_state_bits: n must be >= 0, got " + std::to_string(n_qubits));
    }
    if (n_qubits >= 64) {
        throw ResourceError("qubit_state_bits: 2^" + std::to_string(n_qubits) +
                            " amplitudes exceeds the 64-bit bit-count range");
    }
    const std::uint64_t amplitudes = std::uint64_t{1} << n_qubits;
    return checked_mul(amplitudes, model.bits_per_amplitude(), "qubit state size");
}

std::uint64_t product_basis_bits(const ProductBasis& basis, const MemoryModel& model) {
    model.validate();
    return checked_mul(static_cast<std::uint64_t>(basis.total_dim()), model.bits_per_amplitude(),
                       "product-basis state size");
}

int max_qubits(std::uint64_t budget_bits, const MemoryModel& model) {
    model.validate();
    const std::uint64_t one_amplitude = model.bits_per_amplitude();
    if (budget_bits < one_amplitude) {
        throw ValidationError("max_qubits: budget " + std::to_string(budget_bits) +
                              " bits is below one amplitude (" + std::to_string(one_amplitude) +
                              " bits)");
    }
    int n = 0;
    // qubit_state_bits doubles with each qubit; walk up until the next size
    // would pass the budget or overflow u64.
    while (n < 63) {
        std::uint64_t next = 0;
        if (__builtin_mul_overflow(std::uint64_t{1} << (n + 1), one_amplitude, &next) ||
            next > budget_bits) {
            break;
        }
        ++n;
    }
    return n;
}

std::uint64_t bits_to_bytes(std::uint64_t bits) { return bits / 8 + (bits % 8 != 0 ? 1 : 0); }

std::string format_bytes_human(std::uint64_t bytes) {
    static constexpr std::array<const char*, 7> units = {"B", "KiB", "MiB", "GiB", "TiB", "PiB", "EiB"};
    int unit = 0;
    std::uint64_t scale = 1;
    while (unit + 1 < static_cast<int>(units.size()) && bytes / 1024 >= scale) {
        scale *= 1024;
        ++unit;
    }
    const double value = static_cast<double>(bytes) / static_cast<double>(scale);
    if (bytes % scale == 0) {
        return std::to_string(bytes / scale) + " " + units[static_cast<std::size_t>(unit)];
    }
    char buf[48];
    const int written = std::snprintf(buf, sizeof buf, "%.2f", value);
    std::string text(buf, buf + written);
    while (!text.empty() && text.back() == '0') text.pop_back();
    if (!text.empty() && text.back() == '.') text.pop_back();
    return text + " " + units[static_cast<std::size_t>(unit)];
}

}  // namespace holsim
