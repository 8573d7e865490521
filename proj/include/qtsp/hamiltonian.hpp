#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qtsp/encoding.hpp"
#include "qtsp/instance.hpp"

namespace qtsp {

/// Diagonal energy of the binary-register model: distance chain plus
/// lambda-weighted repeated-label pairs plus mu-weighted invalid-code
/// registers. Stores the reduced distance tables by value; the dense
/// energy vector is materialized up to kMaterializeBits data qubits and
/// evaluated on demand above that.
struct DiagonalHamiltonian {
    static constexpr int kMaterializeBits = 20;

    ReducedEncoding enc;
    double lambda = 0.0;
    double mu = 0.0;

    std::vector<double> start_out; // dist(start, city a+1), indexed by code a
    std::vector<double> start_in;  // dist(city a+1, start)
    std::vector<double> pair;      // dist(city a+1, city b+1), M*M row-major

    std::vector<double> diag; // empty when not materialized

    bool materialized() const { return !diag.empty(); }

    /// Distance contribution; invalid codes simply drop out of the sums.
    /// For feasible states this accumulates edges in tour order, matching
    /// tour_length term for term.
    double distance_term(BasisState state) const;
    /// Number of unordered register pairs holding the same valid code.
    int repetition_term(BasisState state) const;
    /// Number of registers holding a code >= M.
    int invalid_term(BasisState state) const;

    double energy(BasisState state) const {
        return distance_term(state) + lambda * repetition_term(state) + mu * invalid_term(state);
    }

    double operator[](BasisState state) const {
        return materialized() ? diag[state] : energy(state);
    }

    /// Copy with the penalty weights zeroed; the permutation-preserving
    /// ansatz needs only the distance part.
    DiagonalHamiltonian distance_only() const;

    /// Dense energy vector over all basis states (materializes if needed).
    std::vector<double> dense() const;
};

/// Penalty weight that strictly dominates any feasible-energy spread.
double default_penalty(const TspInstance& inst);

/// Smallest weight (scaled by `margin`) that keeps every ground state
/// feasible, from an exhaustive scan of the penalized states. Wants small
/// instances; used where oversized penalties would drown the distance
/// signal.
double sufficient_penalty(const TspInstance& inst, const ReducedEncoding& enc,
                          double margin = 1.25);

DiagonalHamiltonian build_hamiltonian(const TspInstance& inst, const ReducedEncoding& enc,
                                      double lambda, double mu);

struct GroundStates {
    double energy = 0.0;
    std::vector<BasisState> states;
};

/// Exact minimizers of the diagonal over all basis states; exhaustive scan,
/// refused above `cap_bits` data qubits.
GroundStates ground_states(const DiagonalHamiltonian& h, int cap_bits = 20);

/// One term of the Pauli-Z expansion: coeff * prod_{b in z_mask} Z_b.
struct PauliZTerm {
    double coeff = 0.0;
    std::uint64_t z_mask = 0;
};

/// Expands the Hamiltonian's projectors into Z-strings, merging equal masks
/// and dropping |coeff| < eps. Terms come back sorted by mask.
std::vector<PauliZTerm> expand_pauli(const DiagonalHamiltonian& h, double eps = 1e-12);

/// Parity evaluation of the expansion at one basis state.
double eval_pauli_terms(std::span<const PauliZTerm> terms, BasisState state);

/// CSV dump (coeff, z_mask as hex), one row per term.
void write_pauli_csv(std::ostream& out, std::span<const PauliZTerm> terms);
std::vector<PauliZTerm> read_pauli_csv(std::istream& in);

/// One-hot baseline cost; x[i*n + u] = 1 iff city u sits at position i.
struct QuboCost {
    int n = 0;
    double A = 0.0;
    double B = 0.0;
};

double qubo_cost(const QuboCost& q, const TspInstance& inst, std::span<const int> x);

/// One-hot matrix of a full tour (helper for the consistency checks).
std::vector<int> one_hot_assignment(std::span<const int> tour);

} // namespace qtsp
