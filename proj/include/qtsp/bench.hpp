#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtsp/ansatz.hpp"
#include "qtsp/divide_conquer.hpp"
#include "qtsp/instance.hpp"

namespace qtsp {

inline constexpr const char* kArtifactVersion = "1.0.0";

std::uint64_t fnv1a64(std::string_view bytes);

/// Everything a command needs, JSON-serializable. A persisted effective
/// config re-runs to byte-identical data outputs; all randomness fans out
/// from `seed`.
struct ExperimentConfig {
    std::string mode = "sweep-depth";
    std::uint64_t seed = 19;
    int workers = 0;
    bool paper_scale = false;
    std::string out_dir = "out";

    struct Gen {
        std::vector<int> ns = {4, 5, 6};
        int count = 3;
        WeightRange weight_range{};
        bool integer_weights = false;
    } gen;

    struct Solve {
        std::string input; // instance fixture path
    } solve;

    struct Vqe {
        int n = 5;
        int depth = 10;
        std::uint64_t instance_seed = 1;
        std::uint64_t init_seed = 1;
        OptimizerConfig opt{};
        WeightRange weight_range{};
        bool integer_weights = false;
    } vqe;

    struct Sweep {
        std::vector<int> ns = {4, 5, 6};
        std::map<int, std::vector<int>> depths = {{4, {3, 5, 10}}, {5, {9, 10, 12}}, {6, {5, 30}}};
        int instances = 3;
        int inits = 20;
        WeightRange weight_range{};
        bool integer_weights = false;
        OptimizerConfig opt{};
    } sweep;

    struct Dnc {
        std::string fixture;            // instance fixture path; generated when empty
        int n = 5;
        std::uint64_t instance_seed = 5;
        bool integer_weights = true;
        WeightRange weight_range{};
        double lambda = 0.0;            // 0 -> default penalty
        double mu = 0.0;
        DncConfig run{};
        std::vector<std::string> variants = {"noiseless", "raw", "ibu", "inversion"};
    } dnc;

    struct MitigationStudy {
        int trials = 200;
        int qubits = 3;
        long shots = 1024;
        double perturbation = 0.02;
        double noise_p01 = 0.03;
        double noise_p10 = 0.07;
        IbuOptions ibu{.iterations = 100}; // run to convergence in the study
    } mitigation;

    struct Report {
        std::vector<std::string> inputs;
    } report;

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);

    /// FNV-1a over the canonical JSON dump; stamped into every CSV.
    std::uint64_t hash() const;
};

/// Output files as (relative path, content); commands assemble these in
/// memory so checksums are exact and writes are atomic per file.
struct OutputBundle {
    std::vector<std::pair<std::string, std::string>> files;

    void add(std::string name, std::string content);
    /// Writes all files plus manifest.json (config hash, version, per-file
    /// checksums, wall-clock metadata).
    void write(const std::string& out_dir, const ExperimentConfig& cfg) const;
};

/// Sweep settings derived from a command config; --paper-scale restores the
/// full benchmark protocol (10 instances x 100 initializations, depths n-1
/// through 30).
DepthSweepConfig make_sweep_config(const ExperimentConfig& cfg);

// Command entry points; each returns the bundle it wrote (for tests).
OutputBundle cmd_gen_instances(const ExperimentConfig& cfg);
OutputBundle cmd_solve_exact(const ExperimentConfig& cfg);
OutputBundle cmd_run_vqe(const ExperimentConfig& cfg);
OutputBundle cmd_sweep_depth(const ExperimentConfig& cfg);
OutputBundle cmd_run_dnc(const ExperimentConfig& cfg);
OutputBundle cmd_mitigation_study(const ExperimentConfig& cfg);
OutputBundle cmd_report(const ExperimentConfig& cfg);

/// Dispatch by cfg.mode; writes cfg.out_dir. Returns the process exit code.
int run_command(const ExperimentConfig& cfg);

/// Instance fixture JSON: {n, seed, weight_range, integer_weights, dist,
/// optimal_length, optimal_tours}.
std::string instance_fixture_json(const TspInstance& inst, const ExactSolution& exact);
TspInstance read_instance_fixture(const std::string& path);

std::uint64_t file_checksum(const std::string& path);

} // namespace qtsp
