#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qtsp/encoding.hpp"
#include "qtsp/hamiltonian.hpp"

namespace qtsp {

using Amplitude = std::complex<double>;

/// Dense statevector. Basis index bit b is qubit b; data qubits follow the
/// register layout of ReducedEncoding and the ansatz ancilla sits at the
/// highest index.
struct Statevector {
    static constexpr int kMaxQubits = 24;

    int num_qubits = 0;
    std::vector<Amplitude> amps;

    std::uint64_t dim() const { return std::uint64_t{1} << num_qubits; }
    double norm() const;
    double probability(std::uint64_t basis) const { return std::norm(amps[basis]); }
};

struct GateOp {
    enum class Kind { RY, CZ, CSWAP };

    Kind kind = Kind::RY;
    int q0 = 0; // RY target / CZ first / CSWAP control
    int q1 = 0; // CZ second / CSWAP first target
    int q2 = 0; // CSWAP second target
    double angle = 0.0;

    static GateOp ry(int target, double angle) { return {Kind::RY, target, 0, 0, angle}; }
    static GateOp cz(int a, int b) { return {Kind::CZ, a, b, 0, 0.0}; }
    static GateOp cswap(int control, int a, int b) { return {Kind::CSWAP, control, a, b, 0.0}; }
};

Statevector init_basis(int num_qubits, std::uint64_t basis);

/// In-place gate application. RY uses the real rotation
/// [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]].
void apply_gate(Statevector& sv, const GateOp& g);

void apply_circuit(Statevector& sv, std::span<const GateOp> circuit);

/// Order of the rotation and the swap cascade inside one block. The default
/// rotates the ancilla first so every block's swap is live; the literal
/// operator-product reading is kept selectable for sensitivity checks.
enum class BlockOrder { RotationFirst, SwapFirst };

/// One parameterized register-swap block: RY(2*theta) on `aux` and the k
/// controlled bit swaps exchanging registers reg and reg+1.
void register_swap_block(Statevector& sv, const ReducedEncoding& enc, int reg, double theta,
                         int aux, BlockOrder order = BlockOrder::RotationFirst);

/// <diag> over the state; an ancilla above the data qubits, when present,
/// is marginalized out.
double diag_expectation(const Statevector& sv, std::span<const double> diag);
double diag_expectation(const Statevector& sv, const DiagonalHamiltonian& h);

/// Ancilla-marginal probability of each feasible tour.
std::map<FeasibleTour, double> marginal_tour_probabilities(const Statevector& sv,
                                                           const ReducedEncoding& enc);

/// Probability mass on data configurations that are not feasible
/// permutations (ancilla marginalized).
double infeasible_probability(const Statevector& sv, const ReducedEncoding& enc);

} // namespace qtsp
