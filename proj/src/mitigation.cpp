#include "qtsp/mitigation.hpp"

#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qtsp/rng.hpp"

namespace qtsp {

ConfusionModel ConfusionModel::identity(int dim) {
    ConfusionModel m;
    m.dim = dim;
    m.R.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

ConfusionModel ConfusionModel::per_qubit_flips(int qubits, double p01, double p10) {
    if (qubits < 1) throw std::invalid_argument("per_qubit_flips: need at least one qubit");
    if (p01 < 0.0 || p01 > 1.0 || p10 < 0.0 || p10 > 1.0) {
        throw std::invalid_argument("per_qubit_flips: probabilities outside [0,1]");
    }
    const int dim = 1 << qubits;
    ConfusionModel m;
    m.dim = dim;
    m.R.resize(static_cast<std::size_t>(dim) * dim);
    for (int obs = 0; obs < dim; ++obs) {
        for (int prep = 0; prep < dim; ++prep) {
            double p = 1.0;
            for (int b = 0; b < qubits; ++b) {
                const int pb = (prep >> b) & 1;
                const int ob = (obs >> b) & 1;
                p *= pb == 0 ? (ob == 0 ? 1.0 - p01 : p01) : (ob == 1 ? 1.0 - p10 : p10);
            }
            m.at(obs, prep) = p;
        }
    }
    return m;
}

bool ConfusionModel::is_identity(double tol) const {
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            if (std::abs(at(i, j) - (i == j ? 1.0 : 0.0)) > tol) return false;
        }
    }
    return true;
}

void ConfusionModel::validate(double tol) const {
    if (dim < 1 || R.size() != static_cast<std::size_t>(dim) * dim) {
        throw std::invalid_argument("ConfusionModel: bad shape");
    }
    for (int j = 0; j < dim; ++j) {
        double col = 0.0;
        for (int i = 0; i < dim; ++i) {
            if (at(i, j) < 0.0) throw std::invalid_argument("ConfusionModel: negative entry");
            col += at(i, j);
        }
        if (std::abs(col - 1.0) > tol) throw std::invalid_argument("ConfusionModel: column not normalized");
    }
}

Histogram Histogram::uniform(int dim) {
    Histogram h;
    h.p.assign(dim, 1.0 / dim);
    return h;
}

Histogram Histogram::from_counts(const std::vector<long long>& counts) {
    Histogram h;
    h.p.resize(counts.size());
    long long total = 0;
    for (long long c : counts) {
        if (c < 0) throw std::invalid_argument("Histogram: negative count");
        total += c;
    }
    if (total == 0) throw std::invalid_argument("Histogram: empty counts");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        h.p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return h;
}

double Histogram::sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

void Histogram::normalize() {
    double s = sum();
    if (s <= 0.0) throw std::invalid_argument("Histogram: nonpositive mass");
    for (double& v : p) v /= s;
}

double total_variation(const Histogram& a, const Histogram& b) {
    if (a.p.size() != b.p.size()) throw std::invalid_argument("total_variation: size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) d += std::abs(a.p[i] - b.p[i]);
    return 0.5 * d;
}

ConfusionModel calibrate(const ConfusionModel& truth, long shots_per_state, std::uint64_t seed) {
    truth.validate();
    if (shots_per_state < 1) throw std::invalid_argument("calibrate: need at least one shot");
    ConfusionModel est;
    est.dim = truth.dim;
    est.R.assign(truth.R.size(), 0.0);
    for (int prep = 0; prep < truth.dim; ++prep) {
        std::mt19937_64 gen(rng::derive(seed, 0x43414cULL, prep)); // "CAL"
        std::vector<long long> counts(truth.dim, 0);
        const double* col_start = nullptr;
        std::vector<double> col(truth.dim);
        for (int i = 0; i < truth.dim; ++i) col[i] = truth.at(i, prep);
        col_start = col.data();
        for (long s = 0; s < shots_per_state; ++s) {
            ++counts[rng::sample_index(gen, col_start, col.size(), 1.0)];
        }
        for (int i = 0; i < truth.dim; ++i) {
            est.at(i, prep) = static_cast<double>(counts[i]) / static_cast<double>(shots_per_state);
        }
    }
    return est;
}

Histogram mitigate_inversion(const ConfusionModel& R, const Histogram& m) {
    R.validate(1e-9);
    if (static_cast<int>(m.p.size()) != R.dim) {
        throw std::invalid_argument("mitigate_inversion: size mismatch");
    }
    const int d = R.dim;
    Eigen::MatrixXd mat(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) mat(i, j) = R.at(i, j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(d - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 0.0 || !std::isfinite(smax / smin)) {
        throw std::invalid_argument("mitigate_inversion: singular calibration matrix");
    }
    if (smax / smin > 1e6) {
        std::cerr << "mitigate_inversion: calibration matrix condition number "
                  << smax / smin << " exceeds 1e6\n";
    }

    Eigen::VectorXd meas(d);
    for (int i = 0; i < d; ++i) meas(i) = m.p[i];
    Eigen::VectorXd sol = mat.partialPivLu().solve(meas);

    Histogram out;
    out.p.resize(d);
    for (int i = 0; i < d; ++i) out.p[i] = std::max(sol(i), 0.0);
    out.normalize();
    return out;
}

Histogram mitigate_ibu(const ConfusionModel& R, const Histogram& m, const IbuOptions& opts,
                       const Histogram* prior) {
    R.validate(1e-9);
    if (static_cast<int>(m.p.size()) != R.dim) throw std::invalid_argument("mitigate_ibu: size mismatch");
    if (opts.iterations < 1) throw std::invalid_argument("mitigate_ibu: need at least one iteration");
    const int d = R.dim;

    Histogram p = prior ? *prior : Histogram::uniform(d);
    if (static_cast<int>(p.p.size()) != d) throw std::invalid_argument("mitigate_ibu: prior size mismatch");
    for (double v : p.p) {
        if (v <= 0.0) throw std::invalid_argument("mitigate_ibu: prior must be strictly positive");
    }

    std::vector<double> forward(d), next(d);
    for (int it = 0; it < opts.iterations; ++it) {
        for (int i = 0; i < d; ++i) {
            double f = 0.0;
            for (int j = 0; j < d; ++j) f += R.at(i, j) * p.p[j];
            forward[i] = f;
            if (f == 0.0 && m.p[i] > 0.0) {
                throw std::domain_error("mitigate_ibu: observed mass outside the model support");
            }
        }
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int i = 0; i < d; ++i) {
                if (forward[i] > 0.0) acc += R.at(i, j) * m.p[i] / forward[i];
            }
            next[j] = p.p[j] * acc;
        }
        double delta = 0.0;
        for (int j = 0; j < d; ++j) {
            delta += std::abs(next[j] - p.p[j]);
            p.p[j] = next[j];
        }
        if (0.5 * delta < opts.stop_tol) break;
    }
    return p;
}

std::string confusion_to_json(const ConfusionModel& model, long shots_per_state, std::uint64_t seed) {
    nlohmann::json j;
    j["dim"] = model.dim;
    j["matrix"] = model.R;
    j["shots_per_state"] = shots_per_state;
    j["seed"] = seed;
    return j.dump(2);
}

ConfusionModel confusion_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ConfusionModel m;
    m.dim = j.at("dim").get<int>();
    m.R = j.at("matrix").get<std::vector<double>>();
    m.validate(1e-9);
    return m;
}

} // namespace qtsp
