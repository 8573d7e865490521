#include "qtsp/divide_conquer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "qtsp/rng.hpp"

namespace qtsp {

namespace {

constexpr std::uint64_t kSampleTag = 0x53414d50ULL; // "SAMP"
constexpr std::uint64_t kNoiseTag = 0x4e4f4953ULL;  // "NOIS"
constexpr std::uint64_t kCalTag = 0x43414c49ULL;    // "CALI"
constexpr std::uint64_t kInitTag = 0x494e4954ULL;   // "INIT"
constexpr std::uint64_t kDeltaTag = 0x44454c54ULL;  // "DELT"
constexpr std::uint64_t kEvalTag = 0x4556414cULL;   // "EVAL"

} // namespace

SubsystemPartition SubsystemPartition::per_register(const ReducedEncoding& enc) {
    SubsystemPartition part;
    part.groups.resize(enc.M);
    for (int i = 0; i < enc.M; ++i) {
        for (int b = 0; b < enc.k; ++b) part.groups[i].push_back(i * enc.k + b);
    }
    return part;
}

void SubsystemPartition::validate(int data_qubits) const {
    std::vector<char> seen(data_qubits, 0);
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("SubsystemPartition: empty group");
        for (int q : g) {
            if (q < 0 || q >= data_qubits) throw std::invalid_argument("SubsystemPartition: qubit out of range");
            if (seen[q]) throw std::invalid_argument("SubsystemPartition: overlapping groups");
            seen[q] = 1;
        }
    }
    for (char s : seen) {
        if (!s) throw std::invalid_argument("SubsystemPartition: uncovered qubit");
    }
}

std::uint64_t SubsystemPartition::local_outcome(int g, BasisState state) const {
    const auto& qubits = groups[g];
    std::uint64_t out = 0;
    for (std::size_t b = 0; b < qubits.size(); ++b) {
        out |= ((state >> qubits[b]) & 1) << b;
    }
    return out;
}

FactorizedObjective partition_terms(std::span<const PauliZTerm> terms,
                                    const SubsystemPartition& part, int data_qubits) {
    part.validate(data_qubits);
    std::uint64_t covered = 0;
    for (const auto& g : part.groups) {
        for (int q : g) covered |= std::uint64_t{1} << q;
    }

    FactorizedObjective obj;
    obj.part = part;
    obj.terms.reserve(terms.size());
    for (const auto& t : terms) {
        if (t.z_mask & ~covered) {
            throw std::invalid_argument("partition_terms: mask touches an unpartitioned qubit");
        }
        FactorizedTerm ft;
        ft.coeff = t.coeff;
        ft.submasks.resize(part.groups.size());
        for (int g = 0; g < part.group_count(); ++g) {
            const auto& qubits = part.groups[g];
            std::uint64_t sub = 0;
            for (std::size_t b = 0; b < qubits.size(); ++b) {
                sub |= ((t.z_mask >> qubits[b]) & 1) << b;
            }
            ft.submasks[g] = sub;
        }
        obj.terms.push_back(std::move(ft));
    }
    return obj;
}

std::vector<Amplitude> local_state(std::span<const double> angles, int qubits) {
    if (qubits < 1 || qubits > 10) throw std::invalid_argument("local_state: unsupported group size");
    if (angles.size() != static_cast<std::size_t>(local_param_count(qubits))) {
        throw std::invalid_argument("local_state: wrong parameter count");
    }
    Statevector sv = init_basis(qubits, 0);
    for (int q = 0; q < qubits; ++q) apply_gate(sv, GateOp::ry(q, angles[q]));
    for (int q = 0; q + 1 < qubits; ++q) apply_gate(sv, GateOp::cz(q, q + 1));
    for (int q = 0; q < qubits; ++q) apply_gate(sv, GateOp::ry(q, angles[qubits + q]));
    return std::move(sv.amps);
}

namespace {

// <Z submask> for every submask of the group, from an outcome distribution.
std::vector<double> parity_factors(const std::vector<double>& probs) {
    const std::size_t dim = probs.size();
    std::vector<double> f(dim, 0.0);
    for (std::uint64_t mask = 0; mask < dim; ++mask) {
        double v = 0.0;
        for (std::uint64_t s = 0; s < dim; ++s) {
            v += (std::popcount(mask & s) & 1) ? -probs[s] : probs[s];
        }
        f[mask] = v;
    }
    return f;
}

std::vector<double> outcome_probs(std::span<const double> angles, int qubits) {
    auto amps = local_state(angles, qubits);
    std::vector<double> p(amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i) p[i] = std::norm(amps[i]);
    return p;
}

double recombine(const FactorizedObjective& obj, const std::vector<std::vector<double>>& factors) {
    double e = 0.0;
    for (const auto& t : obj.terms) {
        double prod = t.coeff;
        for (std::size_t g = 0; g < t.submasks.size(); ++g) prod *= factors[g][t.submasks[g]];
        e += prod;
    }
    return e;
}

} // namespace

double exact_factorized_energy(const FactorizedObjective& obj,
                               std::span<const std::vector<double>> group_params) {
    if (group_params.size() != static_cast<std::size_t>(obj.part.group_count())) {
        throw std::invalid_argument("exact_factorized_energy: one parameter set per group required");
    }
    std::vector<std::vector<double>> factors(obj.part.group_count());
    for (int g = 0; g < obj.part.group_count(); ++g) {
        const int q = static_cast<int>(obj.part.groups[g].size());
        factors[g] = parity_factors(outcome_probs(group_params[g], q));
    }
    return recombine(obj, factors);
}

std::vector<Histogram> sample_group_histograms(const SubsystemPartition& part,
                                               std::span<const std::vector<double>> group_params,
                                               const SampledEnergyOptions& opts,
                                               std::uint64_t seed) {
    if (group_params.size() != static_cast<std::size_t>(part.group_count())) {
        throw std::invalid_argument("sample_group_histograms: one parameter set per group required");
    }
    if (opts.shots < 1) throw std::invalid_argument("sample_group_histograms: need at least one shot");
    if (opts.mitigation != MitigationMethod::None && opts.calibration == nullptr) {
        throw std::invalid_argument("sample_group_histograms: mitigation requires a calibration matrix");
    }

    const int groups = part.group_count();
    std::vector<Histogram> out(groups);
    for (int g = 0; g < groups; ++g) {
        const int q = static_cast<int>(part.groups[g].size());
        const std::size_t dim = std::size_t{1} << q;
        std::vector<double> probs = outcome_probs(group_params[g], q);
        double total = 0.0;
        for (double p : probs) total += p;

        std::mt19937_64 sample_gen(rng::derive(seed, kSampleTag, g));
        std::mt19937_64 noise_gen(rng::derive(seed, kNoiseTag, g));

        std::vector<long long> counts(dim, 0);
        std::vector<double> col(dim);
        for (long s = 0; s < opts.shots; ++s) {
            std::size_t outcome = rng::sample_index(sample_gen, probs.data(), dim, total);
            if (opts.noise) {
                const ConfusionModel& R = (*opts.noise)[g];
                for (std::size_t i = 0; i < dim; ++i) {
                    col[i] = R.at(static_cast<int>(i), static_cast<int>(outcome));
                }
                outcome = rng::sample_index(noise_gen, col.data(), dim, 1.0);
            }
            ++counts[outcome];
        }

        Histogram hist = Histogram::from_counts(counts);
        switch (opts.mitigation) {
            case MitigationMethod::None:
                break;
            case MitigationMethod::Ibu:
                hist = mitigate_ibu((*opts.calibration)[g], hist, opts.ibu);
                break;
            case MitigationMethod::Inversion:
                hist = mitigate_inversion((*opts.calibration)[g], hist);
                break;
        }
        out[g] = std::move(hist);
    }
    return out;
}

double energy_from_histograms(const FactorizedObjective& obj,
                              std::span<const Histogram> histograms) {
    if (histograms.size() != static_cast<std::size_t>(obj.part.group_count())) {
        throw std::invalid_argument("energy_from_histograms: one histogram per group required");
    }
    std::vector<std::vector<double>> factors(histograms.size());
    for (std::size_t g = 0; g < histograms.size(); ++g) factors[g] = parity_factors(histograms[g].p);
    return recombine(obj, factors);
}

double sampled_factorized_energy(const FactorizedObjective& obj,
                                 std::span<const std::vector<double>> group_params,
                                 const SampledEnergyOptions& opts, std::uint64_t seed,
                                 std::vector<Histogram>* out_histograms) {
    std::vector<Histogram> hists = sample_group_histograms(obj.part, group_params, opts, seed);
    double e = energy_from_histograms(obj, hists);
    if (out_histograms) *out_histograms = std::move(hists);
    return e;
}

const char* variant_name(DncVariant v) {
    switch (v) {
        case DncVariant::Noiseless: return "noiseless";
        case DncVariant::Raw: return "raw";
        case DncVariant::Ibu: return "ibu";
        case DncVariant::Inversion: return "inversion";
    }
    return "unknown";
}

DncRunResult run_dnc_spsa(const TspInstance& inst, const ReducedEncoding& enc,
                          const DiagonalHamiltonian& h, const SubsystemPartition& part,
                          DncVariant variant, const DncConfig& cfg, std::uint64_t run_seed) {
    if (cfg.iterations < 0) throw std::invalid_argument("run_dnc_spsa: negative iteration budget");
    part.validate(enc.data_qubits());
    if (h.lambda <= 0.0 || h.mu <= 0.0) {
        throw std::invalid_argument("run_dnc_spsa: penalties must be retained for the product-state path");
    }

    // The objective is split so the update rule can scale the penalty part
    // without resampling: both recombinations share one histogram draw.
    DiagonalHamiltonian h_dist = h;
    h_dist.lambda = 0.0;
    h_dist.mu = 0.0;
    h_dist.diag.clear();
    DiagonalHamiltonian h_pen = h;
    std::fill(h_pen.start_out.begin(), h_pen.start_out.end(), 0.0);
    std::fill(h_pen.start_in.begin(), h_pen.start_in.end(), 0.0);
    std::fill(h_pen.pair.begin(), h_pen.pair.end(), 0.0);
    h_pen.diag.clear();
    FactorizedObjective obj_dist = partition_terms(expand_pauli(h_dist), part, enc.data_qubits());
    FactorizedObjective obj_pen = partition_terms(expand_pauli(h_pen), part, enc.data_qubits());
    const int groups = part.group_count();

    // Target outcomes: local projections of every globally optimal tour.
    ExactSolution exact = solve_exact(inst);
    std::vector<std::vector<std::uint64_t>> targets;
    for (const auto& tour : exact.optimal_tours) {
        BasisState s = encode_tour(enc, FeasibleTour::from_full_tour(tour));
        std::vector<std::uint64_t> locals(groups);
        for (int g = 0; g < groups; ++g) locals[g] = part.local_outcome(g, s);
        targets.push_back(std::move(locals));
    }

    SampledEnergyOptions opts;
    opts.shots = cfg.shots;
    opts.ibu = cfg.ibu;

    std::vector<ConfusionModel> noise;
    std::vector<ConfusionModel> calibration;
    if (variant != DncVariant::Noiseless) {
        for (int g = 0; g < groups; ++g) {
            noise.push_back(ConfusionModel::per_qubit_flips(static_cast<int>(part.groups[g].size()),
                                                            cfg.noise_p01, cfg.noise_p10));
        }
        opts.noise = &noise;
        if (variant == DncVariant::Ibu || variant == DncVariant::Inversion) {
            for (int g = 0; g < groups; ++g) {
                calibration.push_back(cfg.exact_calibration
                                          ? noise[g]
                                          : calibrate(noise[g], cfg.calibration_shots,
                                                      rng::derive(run_seed, kCalTag, g)));
            }
            opts.calibration = &calibration;
            opts.mitigation =
                variant == DncVariant::Ibu ? MitigationMethod::Ibu : MitigationMethod::Inversion;
        }
    }

    // Warm starts target the lexicographically smallest optimal encoding;
    // the measured probability maximizes over the whole optimal set either
    // way.
    BasisState warm_target = 0;
    if (cfg.init == DncInit::WarmStart) {
        warm_target = encode_tour(enc, FeasibleTour::from_full_tour(exact.optimal_tours.front()));
        for (const auto& tour : exact.optimal_tours) {
            warm_target = std::min(warm_target,
                                   encode_tour(enc, FeasibleTour::from_full_tour(tour)));
        }
    }

    std::vector<std::vector<double>> params(groups);
    std::size_t total_params = 0;
    for (int g = 0; g < groups; ++g) {
        const int q = static_cast<int>(part.groups[g].size());
        params[g].resize(local_param_count(q));
        switch (cfg.init) {
            case DncInit::WarmStart: {
                std::uint64_t local = part.local_outcome(g, warm_target);
                for (int b = 0; b < q; ++b) {
                    params[g][b] = ((local >> b) & 1) ? 3.141592653589793 : 0.0;
                }
                std::mt19937_64 gen(rng::derive(run_seed, kInitTag, g));
                for (double& t : params[g]) {
                    t += rng::uniform(gen, -cfg.warm_start_noise, cfg.warm_start_noise);
                }
                break;
            }
            case DncInit::Random: {
                std::mt19937_64 gen(rng::derive(run_seed, kInitTag, g));
                for (double& t : params[g]) t = rng::uniform(gen, -cfg.init_range, cfg.init_range);
                break;
            }
            case DncInit::UniformSuperposition:
                // RY(pi/2) on every qubit, second layer idle: uniform
                // outcome probabilities in each group.
                for (int i = 0; i < q; ++i) params[g][i] = 1.5707963267948966;
                break;
        }
        total_params += params[g].size();
    }

    DncRunResult result;
    result.variant = variant;

    auto target_probability = [&](const std::vector<Histogram>& hists) {
        double best = 0.0;
        for (const auto& target : targets) {
            double p = 1.0;
            for (int g = 0; g < groups; ++g) p *= hists[g].p[target[g]];
            best = std::max(best, p);
        }
        return best;
    };

    auto penalty_scale = [&](int t) {
        if (cfg.penalty_ramp_fraction <= 0.0) return 1.0;
        double ramp_end = std::max(1.0, cfg.penalty_ramp_fraction * cfg.iterations);
        return std::min(1.0, (t + 1) / ramp_end);
    };
    auto driving_loss = [&](std::span<const Histogram> hists, int t) {
        return energy_from_histograms(obj_dist, hists) +
               penalty_scale(t) * energy_from_histograms(obj_pen, hists);
    };

    double a_gain = cfg.spsa.a;
    if (cfg.spsa.auto_gain && cfg.iterations > 0) {
        // Probe the loss scale at the start point and size the gain so the
        // first step moves angles by roughly target_first_step.
        double acc = 0.0;
        for (int p = 0; p < cfg.spsa.probe_evals; ++p) {
            std::mt19937_64 delta_gen(rng::derive(run_seed, kDeltaTag, 1000000 + p));
            std::vector<double> delta(total_params);
            for (double& d : delta) d = (delta_gen() & 1) ? 1.0 : -1.0;
            std::vector<std::vector<double>> plus = params, minus = params;
            std::size_t idx = 0;
            for (std::size_t g = 0; g < plus.size(); ++g) {
                for (std::size_t i = 0; i < plus[g].size(); ++i, ++idx) {
                    plus[g][i] += cfg.spsa.c * delta[idx];
                    minus[g][i] -= cfg.spsa.c * delta[idx];
                }
            }
            auto hp = sample_group_histograms(part, plus, opts,
                                              rng::derive(run_seed, kEvalTag, 1000000 + p, 0));
            auto hm = sample_group_histograms(part, minus, opts,
                                              rng::derive(run_seed, kEvalTag, 1000000 + p, 1));
            acc += std::abs(driving_loss(hp, 0) - driving_loss(hm, 0)) / (2.0 * cfg.spsa.c);
        }
        double g0 = acc / cfg.spsa.probe_evals;
        if (g0 > 0.0) {
            a_gain = cfg.spsa.target_first_step *
                     std::pow(cfg.spsa.stability + 1.0, cfg.spsa.alpha) / g0;
        }
    }

    for (int t = 0; t < cfg.iterations; ++t) {
        const double a_t = a_gain / std::pow(t + 1 + cfg.spsa.stability, cfg.spsa.alpha);
        const double c_t = cfg.spsa.c / std::pow(t + 1, cfg.spsa.gamma);

        std::mt19937_64 delta_gen(rng::derive(run_seed, kDeltaTag, t));
        std::vector<double> delta(total_params);
        for (double& d : delta) d = (delta_gen() & 1) ? 1.0 : -1.0;

        auto perturbed = [&](double sign) {
            std::vector<std::vector<double>> p = params;
            std::size_t idx = 0;
            for (auto& grp : p) {
                for (double& v : grp) v += sign * c_t * delta[idx++];
            }
            return p;
        };

        const auto plus = perturbed(1.0);
        const auto minus = perturbed(-1.0);
        const auto hist_plus =
            sample_group_histograms(part, plus, opts, rng::derive(run_seed, kEvalTag, t, 0));
        const auto hist_minus =
            sample_group_histograms(part, minus, opts, rng::derive(run_seed, kEvalTag, t, 1));

        const double scale = (driving_loss(hist_plus, t) - driving_loss(hist_minus, t)) / (2.0 * c_t);
        std::size_t idx = 0;
        for (auto& grp : params) {
            for (double& v : grp) v -= a_t * scale * delta[idx++];
        }

        // Record the full objective regardless of the ramp position.
        const auto hists =
            sample_group_histograms(part, params, opts, rng::derive(run_seed, kEvalTag, t, 2));
        const double loss = energy_from_histograms(obj_dist, hists) +
                            energy_from_histograms(obj_pen, hists);
        result.trace.push_back({t, loss, target_probability(hists)});
    }

    result.final_params = params;
    if (!result.trace.empty()) {
        result.final_loss = result.trace.back().loss;
        result.final_target_prob = result.trace.back().target_prob;
    }
    return result;
}

} // namespace qtsp
