#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qtsp/divide_conquer.hpp"
#include "qtsp/rng.hpp"

using namespace qtsp;

namespace {

std::vector<std::vector<double>> random_group_params(const SubsystemPartition& part,
                                                     std::uint64_t seed, double range = 3.0) {
    std::mt19937_64 gen(seed);
    std::vector<std::vector<double>> params(part.group_count());
    for (int g = 0; g < part.group_count(); ++g) {
        params[g].resize(local_param_count(static_cast<int>(part.groups[g].size())));
        for (double& v : params[g]) v = rng::uniform(gen, -range, range);
    }
    return params;
}

// Oracle: tensor the local states into the full register space and take the
// dense diagonal expectation.
double tensored_expectation(const DiagonalHamiltonian& h, const SubsystemPartition& part,
                            std::span<const std::vector<double>> params) {
    const int dq = h.enc.data_qubits();
    std::vector<Amplitude> global(std::size_t{1} << dq, 1.0);
    for (int g = 0; g < part.group_count(); ++g) {
        auto local = local_state(params[g], static_cast<int>(part.groups[g].size()));
        for (std::uint64_t s = 0; s < global.size(); ++s) {
            global[s] *= local[part.local_outcome(g, s)];
        }
    }
    double e = 0.0;
    for (std::uint64_t s = 0; s < global.size(); ++s) e += std::norm(global[s]) * h[s];
    return e;
}

} // namespace

TEST_SUITE_BEGIN("divide_conquer");

TEST_CASE("the default partition is one register per group") {
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    SubsystemPartition part = SubsystemPartition::per_register(enc);
    CHECK(part.group_count() == 4);
    for (int g = 0; g < 4; ++g) {
        REQUIRE(part.groups[g].size() == 2);
        CHECK(part.groups[g][0] == 2 * g);
        CHECK(part.groups[g][1] == 2 * g + 1);
    }
    part.validate(enc.data_qubits());
}

TEST_CASE("term splitting routes mask bits to their groups") {
    SubsystemPartition part;
    part.groups = {{0, 1}, {2, 3}};
    std::vector<PauliZTerm> terms = {{1.5, 0b0011}, {2.0, 0b0000}, {0.5, 0b0110}};
    FactorizedObjective obj = partition_terms(terms, part, 4);
    REQUIRE(obj.terms.size() == 3);
    CHECK(obj.terms[0].submasks == std::vector<std::uint64_t>{0b11, 0});
    CHECK(obj.terms[1].submasks == std::vector<std::uint64_t>{0, 0});
    CHECK(obj.terms[2].submasks == std::vector<std::uint64_t>{0b10, 0b01});

    std::vector<PauliZTerm> outside = {{1.0, 0b10000}};
    CHECK_THROWS_AS(partition_terms(outside, part, 4), std::invalid_argument);
}

TEST_CASE("identity terms contribute their coefficient for any parameters") {
    SubsystemPartition part;
    part.groups = {{0, 1}, {2, 3}};
    std::vector<PauliZTerm> terms = {{7.25, 0}};
    FactorizedObjective obj = partition_terms(terms, part, 4);
    for (std::uint64_t s = 0; s < 4; ++s) {
        auto params = random_group_params(part, s);
        CHECK(exact_factorized_energy(obj, params) == doctest::Approx(7.25).epsilon(1e-12));
    }
}

TEST_CASE("local circuit fixes its reference states") {
    std::vector<double> zeros(4, 0.0);
    auto amps = local_state(zeros);
    CHECK(std::abs(amps[0] - Amplitude{1.0, 0.0}) < 1e-15);

    std::vector<double> flip = {std::numbers::pi, 0, 0, 0};
    auto flipped = local_state(flip);
    CHECK(std::abs(std::abs(flipped[1]) - 1.0) < 1e-12);

    // RY and CZ are real, so local amplitudes stay real for any angles.
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> angles(4);
        for (double& a : angles) a = rng::uniform(gen, -3, 3);
        for (const auto& a : local_state(angles)) CHECK(a.imag() == 0.0);
    }
}

TEST_CASE("basis-state group parameters reproduce the diagonal entry") {
    TspInstance inst = generate_instance(5, 60, {10, 50}, true);
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, 300.0, 300.0);
    SubsystemPartition part = SubsystemPartition::per_register(enc);
    FactorizedObjective obj = partition_terms(expand_pauli(h), part, enc.data_qubits());

    // Drive each 2-qubit group to basis state |code>: RY(pi) on set bits.
    FeasibleTour t;
    t.codes = {2, 0, 3, 1};
    BasisState target = encode_tour(enc, t);
    std::vector<std::vector<double>> params(4, std::vector<double>(4, 0.0));
    for (int g = 0; g < 4; ++g) {
        std::uint64_t local = part.local_outcome(g, target);
        if (local & 1) params[g][0] = std::numbers::pi;
        if (local & 2) params[g][1] = std::numbers::pi;
    }
    CHECK(exact_factorized_energy(obj, params) == doctest::Approx(h[target]).epsilon(1e-10));
}

TEST_CASE("factorized energy equals the tensored global expectation") {
    for (int n : {4, 5}) {
        TspInstance inst = generate_instance(n, 200 + n);
        ReducedEncoding enc = ReducedEncoding::for_cities(n);
        DiagonalHamiltonian h = build_hamiltonian(inst, enc, 55.0, 66.0);
        SubsystemPartition part = SubsystemPartition::per_register(enc);
        FactorizedObjective obj = partition_terms(expand_pauli(h), part, enc.data_qubits());
        for (std::uint64_t s = 0; s < 25; ++s) {
            auto params = random_group_params(part, 1000 * n + s);
            double exact = exact_factorized_energy(obj, params);
            double oracle = tensored_expectation(h, part, params);
            CHECK(exact == doctest::Approx(oracle).epsilon(1e-10));
        }
    }
}

TEST_CASE("sampling converges to the exact energy and respects the seed streams") {
    TspInstance inst = generate_instance(5, 91);
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, 120.0, 120.0);
    SubsystemPartition part = SubsystemPartition::per_register(enc);
    FactorizedObjective obj = partition_terms(expand_pauli(h), part, enc.data_qubits());
    auto params = random_group_params(part, 4);
    const double exact = exact_factorized_energy(obj, params);

    // Large-shot estimate lands within a few standard errors. The spread of
    // the per-shot energy is bounded by the coefficient 1-norm; 3 sigma with
    // a generous constant keeps this deterministic check meaningful.
    SampledEnergyOptions opts;
    opts.shots = 1000000;
    double est = sampled_factorized_energy(obj, params, opts, 17);
    double coeff_norm = 0.0;
    for (const auto& t : obj.terms) coeff_norm += std::abs(t.coeff);
    CHECK(std::abs(est - exact) < 3.0 * coeff_norm / std::sqrt(1e6));

    // Identity confusion consumes its own stream, so outcomes match the
    // no-noise path bit for bit.
    std::vector<ConfusionModel> id_noise(4, ConfusionModel::identity(4));
    SampledEnergyOptions with_id = opts;
    with_id.shots = 2048;
    with_id.noise = &id_noise;
    SampledEnergyOptions without = opts;
    without.shots = 2048;
    CHECK(sampled_factorized_energy(obj, params, with_id, 5) ==
          sampled_factorized_energy(obj, params, without, 5));

    // Same seed, same estimate; different seed, almost surely different.
    CHECK(sampled_factorized_energy(obj, params, without, 5) ==
          sampled_factorized_energy(obj, params, without, 5));

    SampledEnergyOptions needs_cal = without;
    needs_cal.mitigation = MitigationMethod::Ibu;
    CHECK_THROWS_AS(sampled_factorized_energy(obj, params, needs_cal, 5), std::invalid_argument);
}

TEST_CASE("exact-calibration inversion removes readout bias") {
    TspInstance inst = generate_instance(5, 14);
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, 150.0, 150.0);
    SubsystemPartition part = SubsystemPartition::per_register(enc);
    FactorizedObjective obj = partition_terms(expand_pauli(h), part, enc.data_qubits());
    auto params = random_group_params(part, 77);
    const double exact = exact_factorized_energy(obj, params);

    std::vector<ConfusionModel> noise(4, ConfusionModel::per_qubit_flips(2, 0.04, 0.09));
    SampledEnergyOptions opts;
    opts.shots = 1000000;
    opts.noise = &noise;
    opts.mitigation = MitigationMethod::Inversion;
    opts.calibration = &noise;
    double mitigated = sampled_factorized_energy(obj, params, opts, 31);

    double coeff_norm = 0.0;
    for (const auto& t : obj.terms) coeff_norm += std::abs(t.coeff);
    CHECK(std::abs(mitigated - exact) < 3.0 * coeff_norm / std::sqrt(1e6));

    // Unmitigated noisy estimate carries visible bias on this instance.
    SampledEnergyOptions raw = opts;
    raw.mitigation = MitigationMethod::None;
    raw.calibration = nullptr;
    double biased = sampled_factorized_energy(obj, params, raw, 31);
    CHECK(std::abs(biased - exact) > std::abs(mitigated - exact));
}

TEST_CASE("shot noise shrinks like one over sqrt shots") {
    TspInstance inst = generate_instance(5, 33);
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, 100.0, 100.0);
    SubsystemPartition part = SubsystemPartition::per_register(enc);
    FactorizedObjective obj = partition_terms(expand_pauli(h), part, enc.data_qubits());
    auto params = random_group_params(part, 12);

    std::vector<double> log_shots, log_se;
    for (long shots : {256L, 1024L, 4096L, 16384L}) {
        SampledEnergyOptions opts;
        opts.shots = shots;
        const int reps = 200;
        double mean = 0.0, m2 = 0.0;
        for (int r = 0; r < reps; ++r) {
            double e = sampled_factorized_energy(obj, params, opts, rng::derive(999, shots, r));
            double delta = e - mean;
            mean += delta / (r + 1);
            m2 += delta * (e - mean);
        }
        double sd = std::sqrt(m2 / (reps - 1));
        log_shots.push_back(std::log(static_cast<double>(shots)));
        log_se.push_back(std::log(sd));
    }
    // Least-squares slope of log(sd) vs log(shots).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int k = static_cast<int>(log_shots.size());
    for (int i = 0; i < k; ++i) {
        sx += log_shots[i];
        sy += log_se[i];
        sxx += log_shots[i] * log_shots[i];
        sxy += log_shots[i] * log_se[i];
    }
    double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.2)); // -0.5 +- 0.1
}

TEST_CASE("penalties are necessary and sufficient for product basis states") {
    TspInstance inst = generate_instance(5, 412, {10, 50}, true);
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    ExactSolution exact = solve_exact(inst);

    // Without penalties some non-permutation basis state undercuts the
    // optimum; the distance-only diagonal admits a witness.
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, 1.0, 1.0);
    const std::uint64_t dim = std::uint64_t{1} << enc.data_qubits();
    double best_unpenalized = 1e300;
    for (std::uint64_t s = 0; s < dim; ++s) {
        best_unpenalized = std::min(best_unpenalized, h.distance_term(s));
    }
    CHECK(best_unpenalized < exact.optimal_length);

    // With the default penalties no basis state beats the optimal tour.
    double pen = default_penalty(inst);
    DiagonalHamiltonian hp = build_hamiltonian(inst, enc, pen, pen);
    double best_penalized = 1e300;
    for (std::uint64_t s = 0; s < dim; ++s) best_penalized = std::min(best_penalized, hp[s]);
    CHECK(best_penalized == exact.optimal_length);
}

TEST_CASE("zero iteration budgets return the initial parameters") {
    TspInstance inst = generate_instance(5, 2, {10, 50}, true);
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    double pen = default_penalty(inst);
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, pen, pen);
    SubsystemPartition part = SubsystemPartition::per_register(enc);
    DncConfig cfg;
    cfg.iterations = 0;
    cfg.init = DncInit::Random;
    DncRunResult r = run_dnc_spsa(inst, enc, h, part, DncVariant::Noiseless, cfg, 4);
    CHECK(r.trace.empty());
    REQUIRE(r.final_params.size() == 4);
    std::mt19937_64 gen(rng::derive(std::uint64_t{4}, 0x494e4954ULL, 0));
    CHECK(r.final_params[0][0] == rng::uniform(gen, -cfg.init_range, cfg.init_range));

    // Warm starts with zero perturbation sit exactly on the optimal state.
    DncConfig warm;
    warm.iterations = 0;
    warm.warm_start_noise = 0.0;
    DncRunResult w = run_dnc_spsa(inst, enc, h, part, DncVariant::Noiseless, warm, 4);
    ExactSolution exact = solve_exact(inst);
    BasisState target = encode_tour(enc, FeasibleTour::from_full_tour(exact.optimal_tours[0]));
    for (const auto& t : exact.optimal_tours) {
        target = std::min(target, encode_tour(enc, FeasibleTour::from_full_tour(t)));
    }
    for (int g = 0; g < 4; ++g) {
        auto amps = local_state(w.final_params[g], 2);
        CHECK(std::norm(amps[part.local_outcome(g, target)]) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("dnc runs emit one trace point per iteration") {
    TspInstance inst = generate_instance(5, 2, {10, 50}, true);
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    double pen = default_penalty(inst);
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, pen, pen);
    SubsystemPartition part = SubsystemPartition::per_register(enc);
    DncConfig cfg;
    cfg.iterations = 10;
    for (DncVariant v :
         {DncVariant::Noiseless, DncVariant::Raw, DncVariant::Ibu, DncVariant::Inversion}) {
        DncRunResult r = run_dnc_spsa(inst, enc, h, part, v, cfg, 9);
        REQUIRE(r.trace.size() == 10);
        CHECK(r.final_loss == r.trace.back().loss);
        for (const auto& pt : r.trace) {
            CHECK(pt.target_prob >= 0.0);
            CHECK(pt.target_prob <= 1.0 + 1e-12);
        }
    }
}

TEST_SUITE_END();
