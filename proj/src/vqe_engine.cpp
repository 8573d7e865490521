#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "qtsp/ansatz.hpp"

namespace qtsp {

namespace {

// Shared block algebra: a block on registers (reg, reg+1) is the ancilla
// rotation RY(2*theta) composed with the ancilla-controlled register swap.
// Since d/dtheta RY(2*theta) = RY(pi) RY(2*theta), each per-parameter
// overlap in the reverse sweep reduces to one fused pass with
// RY(pi): (x0, x1) -> (-x1, x0) on the ancilla components:
//   rotation-first: grad = 2 Re <S lam_b | RY(pi) S psi_b>
//   swap-first:     grad = 2 Re <lam_b | RY(pi) psi_b>

class DenseVqeEngine final : public VqeEngine {
public:
    DenseVqeEngine(const DiagonalHamiltonian& h, BlockOrder order)
        : enc_(h.enc), order_(order) {
        const int nq = enc_.data_qubits() + 1;
        if (nq > Statevector::kMaxQubits) {
            throw std::invalid_argument("dense engine: qubit count exceeds simulator cap");
        }
        half_ = std::uint64_t{1} << enc_.data_qubits();
        diag_.resize(half_);
        for (std::uint64_t s = 0; s < half_; ++s) diag_[s] = h.distance_term(s);
        start_ = encode_tour(enc_, FeasibleTour::canonical(enc_.M));
        psi_.resize(2 * half_);
        lam_.resize(2 * half_);
    }

    double energy(const AnsatzParams& params) override {
        forward(params);
        double e = 0.0;
        for (std::uint64_t i = 0; i < 2 * half_; ++i) e += std::norm(psi_[i]) * diag_[i & (half_ - 1)];
        return e;
    }

    double energy_and_gradient(const AnsatzParams& params, std::span<double> grad) override {
        forward(params);
        double e = 0.0;
        for (std::uint64_t i = 0; i < 2 * half_; ++i) {
            double d = diag_[i & (half_ - 1)];
            e += std::norm(psi_[i]) * d;
            lam_[i] = d * psi_[i];
        }
        const int blocks = params.block_count();
        const int per_layer = params.blocks_per_layer();
        for (int b = blocks - 1; b >= 0; --b) {
            const int reg = b % per_layer;
            const double theta = params.theta[b];
            if (order_ == BlockOrder::RotationFirst) {
                swap_regs(psi_, reg);
                swap_regs(lam_, reg);
                grad[b] = 2.0 * rotation_overlap(lam_, psi_);
                ry_aux(psi_, -2.0 * theta);
                ry_aux(lam_, -2.0 * theta);
            } else {
                grad[b] = 2.0 * rotation_overlap(lam_, psi_);
                ry_aux(psi_, -2.0 * theta);
                swap_regs(psi_, reg);
                ry_aux(lam_, -2.0 * theta);
                swap_regs(lam_, reg);
            }
        }
        return e;
    }

    std::map<FeasibleTour, double> tour_probabilities(const AnsatzParams& params) override {
        forward(params);
        std::map<FeasibleTour, double> probs;
        for (std::uint64_t i = 0; i < 2 * half_; ++i) {
            double p = std::norm(psi_[i]);
            if (p == 0.0) continue;
            Classification c = classify_state(enc_, i & (half_ - 1));
            if (c.kind == StateClass::Feasible) probs[c.tour] += p;
        }
        return probs;
    }

private:
    void forward(const AnsatzParams& params) {
        std::fill(psi_.begin(), psi_.end(), Amplitude{0.0, 0.0});
        psi_[start_] = Amplitude{1.0, 0.0};
        const int blocks = params.block_count();
        const int per_layer = params.blocks_per_layer();
        for (int b = 0; b < blocks; ++b) {
            const int reg = b % per_layer;
            const double theta = params.theta[b];
            if (order_ == BlockOrder::RotationFirst) {
                ry_aux(psi_, 2.0 * theta);
                swap_regs(psi_, reg);
            } else {
                swap_regs(psi_, reg);
                ry_aux(psi_, 2.0 * theta);
            }
        }
    }

    void ry_aux(std::vector<Amplitude>& v, double angle) {
        const double c = std::cos(angle / 2.0);
        const double s = std::sin(angle / 2.0);
        for (std::uint64_t i = 0; i < half_; ++i) {
            Amplitude a0 = v[i];
            Amplitude a1 = v[i + half_];
            v[i] = c * a0 - s * a1;
            v[i + half_] = s * a0 + c * a1;
        }
    }

    // Ancilla-controlled exchange of registers reg and reg+1, all k bits at
    // once; equal to the k-CSWAP cascade.
    void swap_regs(std::vector<Amplitude>& v, int reg) {
        const int sa = reg * enc_.k;
        const int sb = (reg + 1) * enc_.k;
        const std::uint64_t mask = enc_.code_mask();
        for (std::uint64_t i = half_; i < 2 * half_; ++i) {
            const std::uint64_t a = (i >> sa) & mask;
            const std::uint64_t b = (i >> sb) & mask;
            if (a > b) {
                const std::uint64_t x = a ^ b;
                std::swap(v[i], v[i ^ (x << sa) ^ (x << sb)]);
            }
        }
    }

    double rotation_overlap(const std::vector<Amplitude>& lam, const std::vector<Amplitude>& phi) {
        double g = 0.0;
        for (std::uint64_t i = 0; i < half_; ++i) {
            g += std::real(std::conj(lam[i]) * (-phi[i + half_])) +
                 std::real(std::conj(lam[i + half_]) * phi[i]);
        }
        return g;
    }

    ReducedEncoding enc_;
    BlockOrder order_;
    std::uint64_t half_ = 0;
    BasisState start_ = 0;
    std::vector<double> diag_;
    std::vector<Amplitude> psi_, lam_;
};

// The block family maps permutation basis states to permutation basis
// states, so the reachable space from the canonical start is spanned by
// the M! permutations tensor the ancilla. This engine works in that basis;
// amplitudes stay real for RY/swap circuits.
class SubspaceVqeEngine final : public VqeEngine {
public:
    static constexpr int kMaxRegisters = 8;

    SubspaceVqeEngine(const DiagonalHamiltonian& h, BlockOrder order)
        : enc_(h.enc), order_(order) {
        if (enc_.M > kMaxRegisters) {
            throw std::invalid_argument("subspace engine: too many registers to enumerate");
        }
        FeasibleTour t = FeasibleTour::canonical(enc_.M);
        std::unordered_map<std::uint64_t, int> rank;
        do {
            rank.emplace(encode_tour(enc_, t), static_cast<int>(perms_.size()));
            perms_.push_back(t);
        } while (std::next_permutation(t.codes.begin(), t.codes.end()));
        count_ = perms_.size();

        len_.resize(count_);
        for (std::size_t p = 0; p < count_; ++p) len_[p] = h.distance_term(encode_tour(enc_, perms_[p]));

        swap_to_.assign(static_cast<std::size_t>(enc_.M - 1) * count_, 0);
        for (int i = 0; i + 1 < enc_.M; ++i) {
            for (std::size_t p = 0; p < count_; ++p) {
                FeasibleTour s = perms_[p];
                std::swap(s.codes[i], s.codes[i + 1]);
                swap_to_[i * count_ + p] = rank.at(encode_tour(enc_, s));
            }
        }
        psi_.resize(2 * count_);
        lam_.resize(2 * count_);
    }

    double energy(const AnsatzParams& params) override {
        forward(params);
        double e = 0.0;
        for (std::size_t p = 0; p < count_; ++p) {
            e += (psi_[p] * psi_[p] + psi_[p + count_] * psi_[p + count_]) * len_[p];
        }
        return e;
    }

    double energy_and_gradient(const AnsatzParams& params, std::span<double> grad) override {
        forward(params);
        double e = 0.0;
        for (std::size_t i = 0; i < 2 * count_; ++i) {
            double d = len_[i % count_];
            e += psi_[i] * psi_[i] * d;
            lam_[i] = d * psi_[i];
        }
        const int blocks = params.block_count();
        const int per_layer = params.blocks_per_layer();
        for (int b = blocks - 1; b >= 0; --b) {
            const int reg = b % per_layer;
            const double theta = params.theta[b];
            if (order_ == BlockOrder::RotationFirst) {
                swap_regs(psi_, reg);
                swap_regs(lam_, reg);
                grad[b] = 2.0 * rotation_overlap(lam_, psi_);
                ry_aux(psi_, -2.0 * theta);
                ry_aux(lam_, -2.0 * theta);
            } else {
                grad[b] = 2.0 * rotation_overlap(lam_, psi_);
                ry_aux(psi_, -2.0 * theta);
                swap_regs(psi_, reg);
                ry_aux(lam_, -2.0 * theta);
                swap_regs(lam_, reg);
            }
        }
        return e;
    }

    std::map<FeasibleTour, double> tour_probabilities(const AnsatzParams& params) override {
        forward(params);
        std::map<FeasibleTour, double> probs;
        for (std::size_t p = 0; p < count_; ++p) {
            probs[perms_[p]] = psi_[p] * psi_[p] + psi_[p + count_] * psi_[p + count_];
        }
        return probs;
    }

private:
    void forward(const AnsatzParams& params) {
        std::fill(psi_.begin(), psi_.end(), 0.0);
        psi_[0] = 1.0; // canonical permutation is lexicographically first
        const int blocks = params.block_count();
        const int per_layer = params.blocks_per_layer();
        for (int b = 0; b < blocks; ++b) {
            const int reg = b % per_layer;
            const double theta = params.theta[b];
            if (order_ == BlockOrder::RotationFirst) {
                ry_aux(psi_, 2.0 * theta);
                swap_regs(psi_, reg);
            } else {
                swap_regs(psi_, reg);
                ry_aux(psi_, 2.0 * theta);
            }
        }
    }

    void ry_aux(std::vector<double>& v, double angle) {
        const double c = std::cos(angle / 2.0);
        const double s = std::sin(angle / 2.0);
        for (std::size_t p = 0; p < count_; ++p) {
            double a0 = v[p];
            double a1 = v[p + count_];
            v[p] = c * a0 - s * a1;
            v[p + count_] = s * a0 + c * a1;
        }
    }

    void swap_regs(std::vector<double>& v, int reg) {
        const int* to = swap_to_.data() + static_cast<std::size_t>(reg) * count_;
        for (std::size_t p = 0; p < count_; ++p) {
            std::size_t q = static_cast<std::size_t>(to[p]);
            if (q > p) std::swap(v[p + count_], v[q + count_]);
        }
    }

    double rotation_overlap(const std::vector<double>& lam, const std::vector<double>& phi) {
        double g = 0.0;
        for (std::size_t p = 0; p < count_; ++p) {
            g += lam[p] * (-phi[p + count_]) + lam[p + count_] * phi[p];
        }
        return g;
    }

    ReducedEncoding enc_;
    BlockOrder order_;
    std::size_t count_ = 0;
    std::vector<FeasibleTour> perms_;
    std::vector<double> len_;
    std::vector<int> swap_to_;
    std::vector<double> psi_, lam_;
};

} // namespace

std::unique_ptr<VqeEngine> make_engine(EngineKind kind, const DiagonalHamiltonian& h,
                                       BlockOrder order) {
    switch (kind) {
        case EngineKind::Dense:
            return std::make_unique<DenseVqeEngine>(h, order);
        case EngineKind::Subspace:
            return std::make_unique<SubspaceVqeEngine>(h, order);
        case EngineKind::Auto:
        default:
            if (h.enc.M <= SubspaceVqeEngine::kMaxRegisters) {
                return std::make_unique<SubspaceVqeEngine>(h, order);
            }
            return std::make_unique<DenseVqeEngine>(h, order);
    }
}

} // namespace qtsp
