#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "qtsp/encoding.hpp"
#include "qtsp/hamiltonian.hpp"
#include "qtsp/instance.hpp"
#include "qtsp/simulator.hpp"

namespace qtsp {

/// Rotation angles of the layered register-swap ansatz. theta[l*(M-1)+i]
/// drives the block acting on registers (i, i+1) in layer l; blocks are
/// applied layer-major, ascending i.
struct AnsatzParams {
    int L = 0;
    int M = 0;
    std::vector<double> theta;

    int blocks_per_layer() const { return M - 1; }
    int block_count() const { return L * (M - 1); }
    double& at(int layer, int i) { return theta[static_cast<std::size_t>(layer) * (M - 1) + i]; }
    double at(int layer, int i) const { return theta[static_cast<std::size_t>(layer) * (M - 1) + i]; }

    static AnsatzParams zeros(const ReducedEncoding& enc, int L);
    /// Angles drawn iid uniform(-range, range) from a dedicated stream.
    static AnsatzParams random(const ReducedEncoding& enc, int L, std::uint64_t seed, double range);
};

/// Full gate list: RY(pi) flips preparing the canonical permutation from
/// the all-zero state, then the L layers of register-swap blocks. The flip
/// count is what the one-qubit-gate budget accounts for.
std::vector<GateOp> build_layer_circuit(const ReducedEncoding& enc, const AnsatzParams& params,
                                        BlockOrder order = BlockOrder::RotationFirst);

struct ResourceCount {
    int qubits = 0;
    long long params = 0;
    long long one_qubit_gates = 0;
    long long cswap_gates = 0;
};

/// Counts gates in a built circuit; qubits include the ancilla.
ResourceCount count_resources(const ReducedEncoding& enc, std::span<const GateOp> circuit,
                              const AnsatzParams& params);

/// Evaluates the variational state and distance objective for one encoding.
/// Two implementations exist: a dense statevector engine and an engine
/// restricted to the permutation-spanned invariant subspace (exact for this
/// circuit family, which never leaves that subspace). They agree to within
/// accumulation noise and are cross-checked in the tests.
class VqeEngine {
public:
    virtual ~VqeEngine() = default;

    virtual double energy(const AnsatzParams& params) = 0;
    /// Energy plus dE/dtheta for every block via one reverse sweep.
    virtual double energy_and_gradient(const AnsatzParams& params, std::span<double> grad) = 0;
    virtual std::map<FeasibleTour, double> tour_probabilities(const AnsatzParams& params) = 0;
};

enum class EngineKind { Auto, Dense, Subspace };

/// `h` supplies the distance tables; its penalty weights are ignored (the
/// objective is the distance part only). Auto picks the subspace engine
/// whenever M is small enough to enumerate.
std::unique_ptr<VqeEngine> make_engine(EngineKind kind, const DiagonalHamiltonian& h,
                                       BlockOrder order = BlockOrder::RotationFirst);

/// Distance objective at `params` (dense statevector path).
double energy(const ReducedEncoding& enc, const DiagonalHamiltonian& h_dist,
              const AnsatzParams& params, BlockOrder order = BlockOrder::RotationFirst);

/// Two-term parameter-shift gradient: each block's angle shifted by +-pi/4
/// with unit weight. Deterministic; one energy pair per parameter.
std::vector<double> gradient(const ReducedEncoding& enc, const DiagonalHamiltonian& h_dist,
                             const AnsatzParams& params,
                             BlockOrder order = BlockOrder::RotationFirst);

/// Parameter-shift gradient over an arbitrary engine (used by the adjoint
/// cross-checks).
std::vector<double> gradient_param_shift(VqeEngine& engine, const AnsatzParams& params);

enum class GradientMethod { Adjoint, ParamShift };

struct OptimizerConfig {
    int iterations = 200;
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double init_range = 0.39269908169872414; // pi/8
    GradientMethod gradient_method = GradientMethod::Adjoint;
    EngineKind engine = EngineKind::Auto;
    BlockOrder block_order = BlockOrder::RotationFirst;
};

struct VqeRunResult {
    double final_energy = 0.0;          // at the best (lowest-energy) iterate
    std::vector<double> energy_trace;   // E(theta_t) for t = 0..iterations
    FeasibleTour best_tour;             // highest ancilla-marginal probability
    double best_tour_probability = 0.0;
    bool success = false;               // best_tour is a globally optimal tour
    int iterations_used = 0;
    int argmax_ties = 0;                // tours within 1e-12 of the max probability
};

/// Adam minimization of the distance objective from a seeded random start.
/// The lowest-energy iterate is retained; the returned tour is the argmax
/// of the final marginal tour distribution, with ties granted success if
/// any tied tour is optimal. An iteration budget of zero returns the
/// unoptimized canonical start (all angles zero).
VqeRunResult run_vqe(const TspInstance& inst, const ReducedEncoding& enc,
                     const ExactSolution& exact, int L, std::uint64_t init_seed,
                     const OptimizerConfig& cfg = {});

VqeRunResult run_vqe(const TspInstance& inst, int L, std::uint64_t init_seed,
                     const OptimizerConfig& cfg = {});

struct DepthSweepConfig {
    std::vector<int> ns = {4, 5, 6};
    std::map<int, std::vector<int>> depths; // per n; empty -> invalid
    int instances_per_n = 3;
    int inits_per_instance = 20;
    std::uint64_t root_seed = 19;
    WeightRange weight_range{};
    bool integer_weights = false;
    OptimizerConfig opt{};
    int workers = 0; // 0 = hardware_concurrency
};

struct SweepRunRecord {
    int n = 0;
    int L = 0;
    std::uint64_t instance_seed = 0;
    std::uint64_t init_seed = 0;
    bool success = false;
    double final_energy = 0.0;
    int iterations = 0;
};

struct SweepAggregate {
    int n = 0;
    int L = 0;
    double mean = 0.0; // mean over instances of the per-instance success rate
    double min = 0.0;
    double max = 0.0;
};

struct SweepResult {
    std::vector<SweepRunRecord> runs;
    std::vector<SweepAggregate> aggregates;
};

/// Runs every (n, depth, instance, init) job over a worker pool and
/// aggregates per-instance success rates. Output is byte-identical for a
/// fixed config regardless of the worker count.
SweepResult depth_sweep(const DepthSweepConfig& cfg);

/// Seed fan-out used by the sweep (documented so recorded seeds can be
/// replayed in isolation).
std::uint64_t sweep_instance_seed(std::uint64_t root, int n, int instance_idx);
std::uint64_t sweep_init_seed(std::uint64_t root, int n, int L, int instance_idx, int init_idx);

} // namespace qtsp
