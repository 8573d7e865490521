#include "qtsp/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qtsp {

double DiagonalHamiltonian::distance_term(BasisState state) const {
    const int M = enc.M;
    double e = 0.0;
    int c0 = enc.code_at(state, 0);
    if (c0 < M) e += start_out[c0];
    for (int i = 0; i + 1 < M; ++i) {
        int a = enc.code_at(state, i);
        int b = enc.code_at(state, i + 1);
        if (a < M && b < M) e += pair[static_cast<std::size_t>(a) * M + b];
    }
    int clast = enc.code_at(state, M - 1);
    if (clast < M) e += start_in[clast];
    return e;
}

int DiagonalHamiltonian::repetition_term(BasisState state) const {
    int count = 0;
    for (int i = 0; i < enc.M; ++i) {
        int a = enc.code_at(state, i);
        if (a >= enc.M) continue;
        for (int j = i + 1; j < enc.M; ++j) {
            if (enc.code_at(state, j) == a) ++count;
        }
    }
    return count;
}

int DiagonalHamiltonian::invalid_term(BasisState state) const {
    int count = 0;
    for (int i = 0; i < enc.M; ++i) {
        if (enc.code_at(state, i) >= enc.M) ++count;
    }
    return count;
}

DiagonalHamiltonian DiagonalHamiltonian::distance_only() const {
    DiagonalHamiltonian h = *this;
    h.lambda = 0.0;
    h.mu = 0.0;
    h.diag.clear();
    if (enc.data_qubits() <= kMaterializeBits) {
        h.diag.resize(std::size_t{1} << enc.data_qubits());
        for (std::size_t s = 0; s < h.diag.size(); ++s) h.diag[s] = h.energy(s);
    }
    return h;
}

std::vector<double> DiagonalHamiltonian::dense() const {
    if (materialized()) return diag;
    std::vector<double> d(std::size_t{1} << enc.data_qubits());
    for (std::size_t s = 0; s < d.size(); ++s) d[s] = energy(s);
    return d;
}

double default_penalty(const TspInstance& inst) {
    return 2.0 * inst.n * inst.max_weight();
}

double sufficient_penalty(const TspInstance& inst, const ReducedEncoding& enc, double margin) {
    if (enc.data_qubits() > DiagonalHamiltonian::kMaterializeBits) {
        throw std::invalid_argument("sufficient_penalty: state space too large to scan");
    }
    ExactSolution exact = solve_exact(inst);
    // Unit-weight Hamiltonian supplies the per-state distance and violation
    // counts for the bound max_s (opt - dist(s)) / violations(s).
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, 1.0, 1.0);
    const std::uint64_t dim = std::uint64_t{1} << enc.data_qubits();
    double bound = 0.0;
    for (std::uint64_t s = 0; s < dim; ++s) {
        int viol = h.repetition_term(s) + h.invalid_term(s);
        if (viol == 0) continue;
        bound = std::max(bound, (exact.optimal_length - h.distance_term(s)) / viol);
    }
    return std::max(bound, 1.0) * margin;
}

DiagonalHamiltonian build_hamiltonian(const TspInstance& inst, const ReducedEncoding& enc,
                                      double lambda, double mu) {
    if (enc.n != inst.n) throw std::invalid_argument("build_hamiltonian: encoding/instance mismatch");
    if (lambda <= 0.0 || mu <= 0.0) {
        throw std::invalid_argument("build_hamiltonian: penalties must be strictly positive");
    }
    DiagonalHamiltonian h;
    h.enc = enc;
    h.lambda = lambda;
    h.mu = mu;
    const int M = enc.M;
    h.start_out.resize(M);
    h.start_in.resize(M);
    h.pair.resize(static_cast<std::size_t>(M) * M);
    for (int a = 0; a < M; ++a) {
        h.start_out[a] = inst.at(0, a + 1);
        h.start_in[a] = inst.at(a + 1, 0);
        for (int b = 0; b < M; ++b) h.pair[static_cast<std::size_t>(a) * M + b] = inst.at(a + 1, b + 1);
    }
    if (enc.data_qubits() <= DiagonalHamiltonian::kMaterializeBits) {
        h.diag.resize(std::size_t{1} << enc.data_qubits());
        for (std::size_t s = 0; s < h.diag.size(); ++s) h.diag[s] = h.energy(s);
    }
    return h;
}

GroundStates ground_states(const DiagonalHamiltonian& h, int cap_bits) {
    if (h.enc.data_qubits() > cap_bits) {
        throw std::invalid_argument("ground_states: state space exceeds cap");
    }
    const std::uint64_t dim = std::uint64_t{1} << h.enc.data_qubits();
    GroundStates gs;
    gs.energy = h[0];
    gs.states.push_back(0);
    for (std::uint64_t s = 1; s < dim; ++s) {
        double e = h[s];
        if (e < gs.energy) {
            gs.energy = e;
            gs.states.clear();
            gs.states.push_back(s);
        } else if (e == gs.energy) {
            gs.states.push_back(s);
        }
    }
    return gs;
}

namespace {

using TermMap = std::map<std::uint64_t, double>;

// (mask, coeff) pairs of one code projector: 2^k masks over the register's
// bits, coeff = (+-1)/2^k with sign from the code bits under the mask.
std::vector<std::pair<std::uint64_t, double>> projector_expansion(const ReducedEncoding& enc,
                                                                  int reg, int code) {
    const int k = enc.k;
    const double scale = 1.0 / static_cast<double>(1 << k);
    std::vector<std::pair<std::uint64_t, double>> out;
    out.reserve(std::size_t{1} << k);
    for (int sub = 0; sub < (1 << k); ++sub) {
        int sign_bits = std::popcount(static_cast<unsigned>(sub & code));
        double c = (sign_bits & 1) ? -scale : scale;
        out.emplace_back(static_cast<std::uint64_t>(sub) << (reg * enc.k), c);
    }
    return out;
}

void add_projector(TermMap& acc, const ReducedEncoding& enc, double weight, int reg, int code) {
    for (const auto& [mask, c] : projector_expansion(enc, reg, code)) acc[mask] += weight * c;
}

void add_projector_pair(TermMap& acc, const ReducedEncoding& enc, double weight, int reg_a,
                        int code_a, int reg_b, int code_b) {
    auto ea = projector_expansion(enc, reg_a, code_a);
    auto eb = projector_expansion(enc, reg_b, code_b);
    for (const auto& [ma, ca] : ea) {
        for (const auto& [mb, cb] : eb) acc[ma | mb] += weight * ca * cb;
    }
}

} // namespace

std::vector<PauliZTerm> expand_pauli(const DiagonalHamiltonian& h, double eps) {
    const ReducedEncoding& enc = h.enc;
    const int M = enc.M;
    TermMap acc;

    for (int a = 0; a < M; ++a) add_projector(acc, enc, h.start_out[a], 0, a);
    for (int i = 0; i + 1 < M; ++i) {
        for (int a = 0; a < M; ++a) {
            for (int b = 0; b < M; ++b) {
                add_projector_pair(acc, enc, h.pair[static_cast<std::size_t>(a) * M + b], i, a,
                                   i + 1, b);
            }
        }
    }
    for (int a = 0; a < M; ++a) add_projector(acc, enc, h.start_in[a], M - 1, a);

    for (int i = 0; i < M; ++i) {
        for (int j = i + 1; j < M; ++j) {
            for (int a = 0; a < M; ++a) add_projector_pair(acc, enc, h.lambda, i, a, j, a);
        }
    }
    for (int i = 0; i < M; ++i) {
        for (int a = M; a < enc.codes_per_register(); ++a) add_projector(acc, enc, h.mu, i, a);
    }

    std::vector<PauliZTerm> terms;
    terms.reserve(acc.size());
    for (const auto& [mask, coeff] : acc) {
        if (std::abs(coeff) >= eps) terms.push_back({coeff, mask});
    }
    return terms;
}

double eval_pauli_terms(std::span<const PauliZTerm> terms, BasisState state) {
    double e = 0.0;
    for (const auto& t : terms) {
        int parity = std::popcount(t.z_mask & state) & 1;
        e += parity ? -t.coeff : t.coeff;
    }
    return e;
}

void write_pauli_csv(std::ostream& out, std::span<const PauliZTerm> terms) {
    out << "coeff,z_mask\n";
    char buf[64];
    for (const auto& t : terms) {
        std::snprintf(buf, sizeof buf, "%.17g,0x%llx\n", t.coeff,
                      static_cast<unsigned long long>(t.z_mask));
        out << buf;
    }
}

std::vector<PauliZTerm> read_pauli_csv(std::istream& in) {
    std::vector<PauliZTerm> terms;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("pauli csv: empty input");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("pauli csv: malformed row");
        PauliZTerm t;
        t.coeff = std::stod(line.substr(0, comma));
        t.z_mask = std::stoull(line.substr(comma + 1), nullptr, 16);
        terms.push_back(t);
    }
    return terms;
}

double qubo_cost(const QuboCost& q, const TspInstance& inst, std::span<const int> x) {
    const int n = q.n;
    if (n != inst.n) throw std::invalid_argument("qubo_cost: size mismatch");
    if (x.size() != static_cast<std::size_t>(n) * n) {
        throw std::invalid_argument("qubo_cost: assignment size mismatch");
    }
    auto xv = [&](int i, int u) { return x[static_cast<std::size_t>(i) * n + u]; };

    double cost = 0.0;
    for (int i = 0; i < n; ++i) {
        int inext = (i + 1) % n;
        for (int u = 0; u < n; ++u) {
            if (!xv(i, u)) continue;
            for (int v = 0; v < n; ++v) {
                if (xv(inext, v)) cost += inst.at(u, v);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        int row = 0;
        for (int u = 0; u < n; ++u) row += xv(i, u);
        cost += q.A * (1 - row) * (1 - row);
    }
    for (int u = 0; u < n; ++u) {
        int col = 0;
        for (int i = 0; i < n; ++i) col += xv(i, u);
        cost += q.B * (1 - col) * (1 - col);
    }
    return cost;
}

std::vector<int> one_hot_assignment(std::span<const int> tour) {
    const int n = static_cast<int>(tour.size());
    std::vector<int> x(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) * n + tour[i]] = 1;
    return x;
}

} // namespace qtsp
