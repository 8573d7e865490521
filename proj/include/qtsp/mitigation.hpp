#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qtsp {

/// Column-stochastic readout response: R[i][j] = P(observe outcome i |
/// prepared basis state j), stored row-major.
struct ConfusionModel {
    int dim = 0;
    std::vector<double> R;

    double at(int obs, int prep) const { return R[static_cast<std::size_t>(obs) * dim + prep]; }
    double& at(int obs, int prep) { return R[static_cast<std::size_t>(obs) * dim + prep]; }

    static ConfusionModel identity(int dim);
    /// Independent per-qubit flips p(0->1), p(1->0) composed over `qubits`
    /// bits (bit 0 = fastest index).
    static ConfusionModel per_qubit_flips(int qubits, double p01, double p10);

    bool is_identity(double tol = 0.0) const;
    void validate(double tol = 1e-12) const;
};

/// Probability vector over outcomes.
struct Histogram {
    std::vector<double> p;

    static Histogram uniform(int dim);
    static Histogram from_counts(const std::vector<long long>& counts);

    double sum() const;
    void normalize();
};

double total_variation(const Histogram& a, const Histogram& b);

/// Estimates a calibration matrix by preparing each basis state and sampling
/// `shots_per_state` outcomes through the true model; columns are the
/// normalized observed counts.
ConfusionModel calibrate(const ConfusionModel& truth, long shots_per_state, std::uint64_t seed);

/// R^{-1} m with negative entries clipped to zero and the result
/// renormalized. Throws on a singular R; warns (stderr) when the condition
/// number exceeds 1e6.
Histogram mitigate_inversion(const ConfusionModel& R, const Histogram& m);

struct IbuOptions {
    int iterations = 20;
    double stop_tol = 1e-8; // early stop on total-variation change
};

/// Iterative Bayesian unfolding: multiplicative update
///   p_j <- p_j * sum_i R[i][j] m_i / (R p)_i ,
/// starting from `prior` (uniform when omitted). Every iterate is a valid
/// distribution. Throws when some observed mass sits where (R p) is zero.
Histogram mitigate_ibu(const ConfusionModel& R, const Histogram& m, const IbuOptions& opts = {},
                       const Histogram* prior = nullptr);

/// JSON round-trip for calibration matrices (row-major, with provenance).
std::string confusion_to_json(const ConfusionModel& model, long shots_per_state, std::uint64_t seed);
ConfusionModel confusion_from_json(const std::string& text);

} // namespace qtsp
