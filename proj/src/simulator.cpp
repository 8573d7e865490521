#include "qtsp/simulator.hpp"

#include <cmath>
#include <stdexcept>

namespace qtsp {

double Statevector::norm() const {
    double n = 0.0;
    for (const auto& a : amps) n += std::norm(a);
    return std::sqrt(n);
}

Statevector init_basis(int num_qubits, std::uint64_t basis) {
    if (num_qubits < 1 || num_qubits > Statevector::kMaxQubits) {
        throw std::invalid_argument("init_basis: unsupported qubit count");
    }
    Statevector sv;
    sv.num_qubits = num_qubits;
    if (basis >= sv.dim()) throw std::out_of_range("init_basis: basis index overflow");
    sv.amps.assign(sv.dim(), Amplitude{0.0, 0.0});
    sv.amps[basis] = Amplitude{1.0, 0.0};
    return sv;
}

namespace {

void check_qubit(const Statevector& sv, int q) {
    if (q < 0 || q >= sv.num_qubits) throw std::out_of_range("gate qubit out of range");
}

void apply_ry(Statevector& sv, int target, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    const std::uint64_t bit = std::uint64_t{1} << target;
    const std::uint64_t dim = sv.dim();
    for (std::uint64_t i = 0; i < dim; ++i) {
        if (i & bit) continue;
        Amplitude a0 = sv.amps[i];
        Amplitude a1 = sv.amps[i | bit];
        sv.amps[i] = c * a0 - s * a1;
        sv.amps[i | bit] = s * a0 + c * a1;
    }
}

void apply_cz(Statevector& sv, int a, int b) {
    const std::uint64_t mask = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
    const std::uint64_t dim = sv.dim();
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & mask) == mask) sv.amps[i] = -sv.amps[i];
    }
}

void apply_cswap(Statevector& sv, int control, int a, int b) {
    const std::uint64_t cbit = std::uint64_t{1} << control;
    const std::uint64_t abit = std::uint64_t{1} << a;
    const std::uint64_t bbit = std::uint64_t{1} << b;
    const std::uint64_t dim = sv.dim();
    // Visit each swapped pair once via the (a=1, b=0) representative.
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & cbit) && (i & abit) && !(i & bbit)) {
            std::swap(sv.amps[i], sv.amps[(i ^ abit) | bbit]);
        }
    }
}

} // namespace

void apply_gate(Statevector& sv, const GateOp& g) {
    switch (g.kind) {
        case GateOp::Kind::RY:
            check_qubit(sv, g.q0);
            apply_ry(sv, g.q0, g.angle);
            break;
        case GateOp::Kind::CZ:
            check_qubit(sv, g.q0);
            check_qubit(sv, g.q1);
            if (g.q0 == g.q1) throw std::invalid_argument("CZ: qubit collision");
            apply_cz(sv, g.q0, g.q1);
            break;
        case GateOp::Kind::CSWAP:
            check_qubit(sv, g.q0);
            check_qubit(sv, g.q1);
            check_qubit(sv, g.q2);
            if (g.q0 == g.q1 || g.q0 == g.q2 || g.q1 == g.q2) {
                throw std::invalid_argument("CSWAP: qubit collision");
            }
            apply_cswap(sv, g.q0, g.q1, g.q2);
            break;
    }
}

void apply_circuit(Statevector& sv, std::span<const GateOp> circuit) {
    for (const auto& g : circuit) apply_gate(sv, g);
}

void register_swap_block(Statevector& sv, const ReducedEncoding& enc, int reg, double theta,
                         int aux, BlockOrder order) {
    if (reg < 0 || reg + 1 >= enc.M) throw std::out_of_range("register_swap_block: register out of range");
    auto cascade = [&] {
        for (int b = 0; b < enc.k; ++b) {
            apply_gate(sv, GateOp::cswap(aux, reg * enc.k + b, (reg + 1) * enc.k + b));
        }
    };
    if (order == BlockOrder::RotationFirst) {
        apply_gate(sv, GateOp::ry(aux, 2.0 * theta));
        cascade();
    } else {
        cascade();
        apply_gate(sv, GateOp::ry(aux, 2.0 * theta));
    }
}

double diag_expectation(const Statevector& sv, std::span<const double> diag) {
    const std::uint64_t dim = sv.dim();
    const std::uint64_t dsize = diag.size();
    if (dsize != dim && dsize * 2 != dim) {
        throw std::invalid_argument("diag_expectation: diagonal size mismatch");
    }
    double e = 0.0;
    const std::uint64_t mask = dsize - 1;
    for (std::uint64_t i = 0; i < dim; ++i) {
        e += std::norm(sv.amps[i]) * diag[i & mask];
    }
    return e;
}

double diag_expectation(const Statevector& sv, const DiagonalHamiltonian& h) {
    const int dq = h.enc.data_qubits();
    if (sv.num_qubits != dq && sv.num_qubits != dq + 1) {
        throw std::invalid_argument("diag_expectation: qubit count mismatch");
    }
    const std::uint64_t dim = sv.dim();
    const std::uint64_t mask = (std::uint64_t{1} << dq) - 1;
    double e = 0.0;
    for (std::uint64_t i = 0; i < dim; ++i) {
        double p = std::norm(sv.amps[i]);
        if (p != 0.0) e += p * h[i & mask];
    }
    return e;
}

std::map<FeasibleTour, double> marginal_tour_probabilities(const Statevector& sv,
                                                           const ReducedEncoding& enc) {
    if (sv.num_qubits != enc.data_qubits() + 1) {
        throw std::invalid_argument("marginal_tour_probabilities: expected data qubits + ancilla");
    }
    std::map<FeasibleTour, double> probs;
    const std::uint64_t data_mask = enc.data_mask();
    const std::uint64_t dim = sv.dim();
    for (std::uint64_t i = 0; i < dim; ++i) {
        double p = std::norm(sv.amps[i]);
        if (p == 0.0) continue;
        Classification c = classify_state(enc, i & data_mask);
        if (c.kind == StateClass::Feasible) probs[c.tour] += p;
    }
    return probs;
}

double infeasible_probability(const Statevector& sv, const ReducedEncoding& enc) {
    const int dq = enc.data_qubits();
    if (sv.num_qubits != dq && sv.num_qubits != dq + 1) {
        throw std::invalid_argument("infeasible_probability: qubit count mismatch");
    }
    const std::uint64_t data_mask = (std::uint64_t{1} << dq) - 1;
    double p = 0.0;
    const std::uint64_t dim = sv.dim();
    for (std::uint64_t i = 0; i < dim; ++i) {
        double q = std::norm(sv.amps[i]);
        if (q == 0.0) continue;
        if (classify_state(enc, i & data_mask).kind != StateClass::Feasible) p += q;
    }
    return p;
}

} // namespace qtsp
