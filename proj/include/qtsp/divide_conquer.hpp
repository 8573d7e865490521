#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qtsp/encoding.hpp"
#include "qtsp/hamiltonian.hpp"
#include "qtsp/instance.hpp"
#include "qtsp/mitigation.hpp"
#include "qtsp/simulator.hpp"

namespace qtsp {

/// Disjoint qubit groups covering all data qubits. The default puts one
/// k-qubit register in each group.
struct SubsystemPartition {
    std::vector<std::vector<int>> groups;

    static SubsystemPartition per_register(const ReducedEncoding& enc);

    int group_count() const { return static_cast<int>(groups.size()); }
    void validate(int data_qubits) const;

    /// Group-local outcome index of a global basis state: bit b of the
    /// result is the global bit at groups[g][b].
    std::uint64_t local_outcome(int g, BasisState state) const;
};

/// One Z-string split across groups; an empty submask is the identity
/// factor for that group.
struct FactorizedTerm {
    double coeff = 0.0;
    std::vector<std::uint64_t> submasks;
};

struct FactorizedObjective {
    SubsystemPartition part;
    std::vector<FactorizedTerm> terms;
};

/// Splits each Z-mask into per-group submasks. Throws if a mask touches a
/// qubit no group owns.
FactorizedObjective partition_terms(std::span<const PauliZTerm> terms,
                                    const SubsystemPartition& part, int data_qubits);

/// Local hardware-efficient circuit: an RY on every qubit, a CZ chain, and
/// a second RY layer; 2q angles for q qubits. For the default two-qubit
/// group this is RY(t1) x RY(t2), CZ, RY(t3) x RY(t4) applied to |00>.
std::vector<Amplitude> local_state(std::span<const double> angles, int qubits = 2);

constexpr int local_param_count(int qubits) { return 2 * qubits; }

/// Exact product-state objective: sum_t c_t prod_g <Z submask>_g with each
/// local expectation computed from the group's amplitudes.
double exact_factorized_energy(const FactorizedObjective& obj,
                               std::span<const std::vector<double>> group_params);

enum class MitigationMethod { None, Ibu, Inversion };

struct SampledEnergyOptions {
    long shots = 1024;
    const std::vector<ConfusionModel>* noise = nullptr;       // per group
    MitigationMethod mitigation = MitigationMethod::None;
    const std::vector<ConfusionModel>* calibration = nullptr; // per group; required for mitigation
    IbuOptions ibu{};
};

/// One measured (optionally corrupted, optionally mitigated) outcome
/// histogram per group. A single histogram per group serves every term:
/// all observables are Z-diagonal and simultaneously measurable. The
/// sampling and corruption streams are derived independently, so an
/// identity noise model reproduces the no-noise outcomes exactly.
std::vector<Histogram> sample_group_histograms(const SubsystemPartition& part,
                                               std::span<const std::vector<double>> group_params,
                                               const SampledEnergyOptions& opts,
                                               std::uint64_t seed);

/// Coefficient-weighted product recombination from measured histograms.
double energy_from_histograms(const FactorizedObjective& obj,
                              std::span<const Histogram> histograms);

/// Shot-based estimate of the factorized objective; deterministic for a
/// fixed seed.
double sampled_factorized_energy(const FactorizedObjective& obj,
                                 std::span<const std::vector<double>> group_params,
                                 const SampledEnergyOptions& opts, std::uint64_t seed,
                                 std::vector<Histogram>* out_histograms = nullptr);

enum class DncVariant { Noiseless, Raw, Ibu, Inversion };

const char* variant_name(DncVariant v);

struct SpsaSchedule {
    double a = 0.2;
    double c = 0.1;
    double stability = 12.0; // offset A in a_k = a/(k+1+A)^alpha
    double alpha = 0.602;
    double gamma = 0.101;
    // When set, `a` is calibrated from a few probe evaluations so the first
    // update moves each angle by about `target_first_step` radians; a fixed
    // gain cannot serve both the raw and penalty-dominated loss scales.
    bool auto_gain = true;
    double target_first_step = 0.1;
    int probe_evals = 5;
};

/// Start-point policies. WarmStart prepares the exhaustively known optimal
/// basis state with per-angle perturbation noise, the regime the reported
/// hardware trajectories operate in (their target-state probability starts
/// near 0.7); SPSA then has to re-concentrate the state against shot and
/// readout noise. UniformSuperposition and Random are the cold-start
/// alternatives for studying the global-search behavior.
enum class DncInit { WarmStart, UniformSuperposition, Random };

struct DncConfig {
    int iterations = 120;
    long shots = 1024;
    SpsaSchedule spsa{};
    double noise_p01 = 0.03;
    double noise_p10 = 0.07;
    long calibration_shots = 1024;
    bool exact_calibration = false; // use the true model instead of estimating
    IbuOptions ibu{};
    DncInit init = DncInit::WarmStart;
    double init_range = 3.141592653589793; // Random: angles ~ uniform(-r, r)
    double warm_start_noise = 0.5;         // WarmStart: per-angle perturbation
    // Cold starts only: the penalty weight driving the SPSA updates ramps
    // linearly from zero, reaching full strength at this fraction of the
    // budget. Recorded losses always use the full objective. Zero disables
    // the ramp.
    double penalty_ramp_fraction = 0.0;
};

struct DncTracePoint {
    int iteration = 0;
    double loss = 0.0;
    double target_prob = 0.0;
};

struct DncRunResult {
    DncVariant variant = DncVariant::Noiseless;
    std::vector<DncTracePoint> trace;
    std::vector<std::vector<double>> final_params;
    double final_loss = 0.0;
    double final_target_prob = 0.0;
};

/// SPSA over the concatenated local angles against the penalized objective.
/// Per iteration: two perturbed loss estimates drive the update, then one
/// evaluation at the new iterate is recorded as (loss, target-state
/// probability). The target probability is the product over groups of the
/// measured probability of the optimal tour's local outcome, maximized over
/// the set of globally optimal tours. A zero budget returns an empty trace
/// and the initial parameters.
DncRunResult run_dnc_spsa(const TspInstance& inst, const ReducedEncoding& enc,
                          const DiagonalHamiltonian& h, const SubsystemPartition& part,
                          DncVariant variant, const DncConfig& cfg, std::uint64_t run_seed);

} // namespace qtsp
