#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qtsp {

/// Packed computational-basis state over the M*k data qubits. Register i
/// occupies bits [i*k, (i+1)*k), little-endian within the register; the
/// ansatz ancilla, when present, sits above the data bits. Every module
/// uses this one layout.
using BasisState = std::uint64_t;

/// Register layout after fixing city 0 as the tour start. Reduced label
/// a in {0..M-1} stands for original city a+1.
struct ReducedEncoding {
    int n = 0; // original city count
    int M = 0; // registers, n-1
    int k = 0; // bits per register, ceil(log2 M), at least 1

    static ReducedEncoding for_cities(int n);

    int data_qubits() const { return M * k; }
    std::uint64_t code_mask() const { return (std::uint64_t{1} << k) - 1; }
    std::uint64_t data_mask() const { return (std::uint64_t{1} << data_qubits()) - 1; }
    int codes_per_register() const { return 1 << k; }

    int code_at(BasisState state, int reg) const {
        return static_cast<int>((state >> (reg * k)) & code_mask());
    }
    int original_city(int code) const { return code + 1; }
};

/// Order of the M reduced city labels along the tour; always a permutation
/// of {0..M-1}.
struct FeasibleTour {
    std::vector<std::uint8_t> codes;

    auto operator<=>(const FeasibleTour&) const = default;

    /// Full tour starting at city 0.
    std::vector<int> to_full_tour() const;
    /// Inverse of to_full_tour; `full` must start with city 0.
    static FeasibleTour from_full_tour(std::span<const int> full);
    /// Identity ordering 0,1,...,M-1 (the canonical start state).
    static FeasibleTour canonical(int M);
};

enum class StateClass { Feasible, RepeatedCity, InvalidCode };

struct Classification {
    StateClass kind;
    FeasibleTour tour; // populated only when kind == Feasible
};

/// 1 iff `reg`'s k bits equal `code`; the diagonal entry of the code
/// projector at this basis state.
int projector_value(const ReducedEncoding& enc, BasisState state, int reg, int code);

BasisState encode_tour(const ReducedEncoding& enc, const FeasibleTour& tour);

Classification classify_state(const ReducedEncoding& enc, BasisState state);

/// The M! feasible basis states, ascending. Refuses M above the cap.
std::vector<BasisState> feasible_state_index_set(const ReducedEncoding& enc, int cap = 8);

/// Bitstring rendering under the documented layout (register M-1 printed
/// first, matching ket notation), for logs.
std::string format_state(const ReducedEncoding& enc, BasisState state);

} // namespace qtsp
