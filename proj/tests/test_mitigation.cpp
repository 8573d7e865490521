#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "qtsp/mitigation.hpp"
#include "qtsp/rng.hpp"

using namespace qtsp;

namespace {

Histogram forward(const ConfusionModel& R, const Histogram& p) {
    Histogram m;
    m.p.assign(R.dim, 0.0);
    for (int i = 0; i < R.dim; ++i) {
        for (int j = 0; j < R.dim; ++j) m.p[i] += R.at(i, j) * p.p[j];
    }
    return m;
}

Histogram random_simplex(int dim, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Histogram p;
    p.p.resize(dim);
    for (double& v : p.p) v = -std::log(1.0 - rng::to_unit_double(gen()));
    p.normalize();
    return p;
}

} // namespace

TEST_SUITE_BEGIN("mitigation");

TEST_CASE("per-qubit flip model composes into a column-stochastic matrix") {
    ConfusionModel m = ConfusionModel::per_qubit_flips(2, 0.03, 0.07);
    m.validate();
    CHECK(m.dim == 4);
    // Prepared |00>: both qubits report 1 with probability p01 each.
    CHECK(m.at(0, 0) == doctest::Approx(0.97 * 0.97));
    CHECK(m.at(3, 0) == doctest::Approx(0.03 * 0.03));
    // Prepared |11> (index 3): staying takes two (1-p10) factors.
    CHECK(m.at(3, 3) == doctest::Approx(0.93 * 0.93));
    CHECK(m.at(0, 3) == doctest::Approx(0.07 * 0.07));
}

TEST_CASE("calibration of an identity channel is exact for any shot count") {
    ConfusionModel truth = ConfusionModel::identity(4);
    ConfusionModel est = calibrate(truth, 17, 3);
    CHECK(est.R == truth.R);
}

TEST_CASE("calibration converges to the true model") {
    ConfusionModel truth = ConfusionModel::per_qubit_flips(1, 0.05, 0.05);
    ConfusionModel est = calibrate(truth, 1000000, 99);
    est.validate(1e-9);
    for (std::size_t i = 0; i < truth.R.size(); ++i) {
        CHECK(std::abs(est.R[i] - truth.R[i]) < 0.005);
    }
}

TEST_CASE("inversion undoes its own columns and the identity") {
    Histogram m;
    m.p = {0.9, 0.1};
    ConfusionModel id = ConfusionModel::identity(2);
    Histogram out = mitigate_inversion(id, m);
    CHECK(out.p[0] == doctest::Approx(0.9).epsilon(1e-12));

    ConfusionModel r;
    r.dim = 2;
    r.R = {0.9, 0.1, 0.1, 0.9};
    Histogram col0 = mitigate_inversion(r, m); // m equals R's first column
    CHECK(col0.p[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(col0.p[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("inversion clips unphysical negatives into a valid distribution") {
    ConfusionModel r;
    r.dim = 2;
    r.R = {0.9, 0.1, 0.1, 0.9};
    Histogram noisy;
    noisy.p = {0.98, 0.02}; // beyond the model's reachable set
    Histogram out = mitigate_inversion(r, noisy);
    CHECK(out.p[0] >= 0.0);
    CHECK(out.p[1] >= 0.0);
    CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inversion roundtrip holds when no clipping occurs") {
    ConfusionModel r = ConfusionModel::per_qubit_flips(2, 0.04, 0.06);
    Histogram p = random_simplex(4, 8);
    Histogram m = forward(r, p);
    Histogram rec = mitigate_inversion(r, m);
    Histogram re_m = forward(r, rec);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(re_m.p[i] - m.p[i]) < 1e-10);
}

TEST_CASE("ibu with an identity response returns the measurement") {
    Histogram m;
    m.p = {0.25, 0.75};
    ConfusionModel id = ConfusionModel::identity(2);
    Histogram one = mitigate_ibu(id, m, {.iterations = 1});
    CHECK(one.p[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(one.p[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("ibu recovers the truth on consistent problems") {
    ConfusionModel r = ConfusionModel::per_qubit_flips(2, 0.05, 0.08);
    Histogram p = random_simplex(4, 21);
    Histogram m = forward(r, p);
    Histogram rec = mitigate_ibu(r, m, {.iterations = 100, .stop_tol = 0.0});
    CHECK(total_variation(rec, p) < 1e-6);
}

TEST_CASE("every ibu iterate stays on the simplex") {
    ConfusionModel r = ConfusionModel::per_qubit_flips(1, 0.1, 0.2);
    Histogram m;
    m.p = {0.8, 0.2};
    for (int iters = 1; iters <= 30; ++iters) {
        Histogram p = mitigate_ibu(r, m, {.iterations = iters, .stop_tol = 0.0});
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : p.p) CHECK(v >= 0.0);
    }
}

TEST_CASE("ibu rejects observed mass outside the model support") {
    ConfusionModel r;
    r.dim = 2;
    r.R = {1.0, 1.0, 0.0, 0.0}; // outcome 1 is unreachable
    Histogram m;
    m.p = {0.4, 0.6};
    CHECK_THROWS_AS(mitigate_ibu(r, m), std::domain_error);

    Histogram bad_prior;
    bad_prior.p = {1.0, 0.0};
    Histogram ok;
    ok.p = {1.0, 0.0};
    CHECK_THROWS_AS(mitigate_ibu(ConfusionModel::identity(2), ok, {}, &bad_prior),
                    std::invalid_argument);
}

TEST_CASE("both methods agree with the truth in the exact-measurement limit") {
    ConfusionModel r = ConfusionModel::per_qubit_flips(2, 0.03, 0.07);
    Histogram p = random_simplex(4, 5);
    Histogram m = forward(r, p);
    Histogram inv = mitigate_inversion(r, m);
    Histogram ibu = mitigate_ibu(r, m, {.iterations = 200, .stop_tol = 0.0});
    CHECK(total_variation(inv, p) < 1e-6);
    CHECK(total_variation(ibu, p) < 1e-6);
}

TEST_CASE("ibu is at least as stable as inversion under perturbed calibrations") {
    // Basis-state recovery trials: prepare a random computational state,
    // measure with finite shots through the true response, mitigate with a
    // drifted calibration. Clipping makes inversion lose mass exactly where
    // the truth sits on the simplex boundary; converged IBU does not.
    ConfusionModel truth = ConfusionModel::per_qubit_flips(3, 0.03, 0.07);
    const int dim = truth.dim;
    const int trials = 200;
    int wins = 0;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 gen(rng::derive(2025, 0x4d49ULL, t));
        Histogram p;
        p.p.assign(dim, 0.0);
        p.p[gen() % dim] = 1.0;

        std::vector<double> pushed = forward(truth, p).p;
        std::vector<long long> counts(dim, 0);
        for (int s = 0; s < 1024; ++s) {
            ++counts[rng::sample_index(gen, pushed.data(), pushed.size(), 1.0)];
        }
        Histogram m = Histogram::from_counts(counts);

        ConfusionModel cal = truth;
        for (double& v : cal.R) v = std::max(0.0, v + rng::uniform(gen, -0.02, 0.02));
        for (int j = 0; j < dim; ++j) {
            double col = 0.0;
            for (int i = 0; i < dim; ++i) col += cal.at(i, j);
            for (int i = 0; i < dim; ++i) cal.at(i, j) /= col;
        }

        double tv_ibu = total_variation(mitigate_ibu(cal, m, {.iterations = 100}), p);
        double tv_inv = total_variation(mitigate_inversion(cal, m), p);
        if (tv_ibu <= tv_inv) ++wins;
    }
    CHECK(wins >= 140); // 70% of 200
}

TEST_CASE("calibration matrices serialize and parse") {
    ConfusionModel truth = ConfusionModel::per_qubit_flips(2, 0.02, 0.05);
    ConfusionModel est = calibrate(truth, 4096, 7);
    std::string text = confusion_to_json(est, 4096, 7);
    ConfusionModel back = confusion_from_json(text);
    CHECK(back.dim == est.dim);
    CHECK(back.R == est.R);
}

TEST_SUITE_END();
