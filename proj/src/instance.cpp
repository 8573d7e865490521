#include "qtsp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qtsp/rng.hpp"

namespace qtsp {

double TspInstance::max_weight() const {
    double m = 0.0;
    for (double d : dist) m = std::max(m, d);
    return m;
}

bool ExactSolution::contains(std::span<const int> tour) const {
    for (const auto& t : optimal_tours) {
        if (t.size() == tour.size() && std::equal(t.begin(), t.end(), tour.begin())) return true;
    }
    return false;
}

TspInstance generate_instance(int n, std::uint64_t seed, WeightRange range, bool integer_weights) {
    if (n < 3) throw std::invalid_argument("generate_instance: need at least 3 cities");
    if (range.lo > range.hi) throw std::invalid_argument("generate_instance: inverted weight range");
    if (range.lo < 0.0) throw std::invalid_argument("generate_instance: negative weights");

    TspInstance inst;
    inst.n = n;
    inst.seed = seed;
    inst.range = range;
    inst.integer_weights = integer_weights;
    inst.dist.assign(static_cast<std::size_t>(n) * n, 0.0);

    std::mt19937_64 gen(seed);
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            double w = integer_weights
                           ? static_cast<double>(rng::uniform_int(gen, std::lround(range.lo),
                                                                  std::lround(range.hi)))
                           : rng::uniform(gen, range.lo, range.hi);
            inst.at(u, v) = w;
            inst.at(v, u) = w;
        }
    }
    return inst;
}

namespace {

void check_permutation(int n, std::span<const int> tour) {
    if (static_cast<int>(tour.size()) != n) throw std::invalid_argument("tour: wrong length");
    std::vector<char> seen(n, 0);
    for (int c : tour) {
        if (c < 0 || c >= n || seen[c]) throw std::invalid_argument("tour: not a permutation");
        seen[c] = 1;
    }
}

} // namespace

double tour_length(const TspInstance& inst, std::span<const int> tour) {
    check_permutation(inst.n, tour);
    double len = 0.0;
    for (int i = 0; i < inst.n; ++i) {
        len += inst.at(tour[i], tour[(i + 1) % inst.n]);
    }
    return len;
}

ExactSolution solve_exact(const TspInstance& inst, int enumeration_cap) {
    if (inst.n > enumeration_cap) {
        throw std::invalid_argument("solve_exact: instance exceeds enumeration cap");
    }
    std::vector<int> tour(inst.n);
    std::iota(tour.begin(), tour.end(), 0);

    ExactSolution sol;
    sol.optimal_length = tour_length(inst, tour);
    sol.optimal_tours.push_back(tour);

    // Permute the tail; city 0 stays first. Ties are kept under exact
    // floating-point equality so reversal twins survive when their sums agree.
    while (std::next_permutation(tour.begin() + 1, tour.end())) {
        double len = tour_length(inst, tour);
        if (len < sol.optimal_length) {
            sol.optimal_length = len;
            sol.optimal_tours.clear();
            sol.optimal_tours.push_back(tour);
        } else if (len == sol.optimal_length) {
            sol.optimal_tours.push_back(tour);
        }
    }
    return sol;
}

TspInstance instance_from_matrix(int n, std::vector<double> dist, std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("instance_from_matrix: need at least 3 cities");
    if (dist.size() != static_cast<std::size_t>(n) * n) {
        throw std::invalid_argument("instance_from_matrix: matrix size mismatch");
    }
    TspInstance inst;
    inst.n = n;
    inst.seed = seed;
    inst.dist = std::move(dist);
    for (int u = 0; u < n; ++u) {
        if (inst.at(u, u) != 0.0) throw std::invalid_argument("instance_from_matrix: nonzero diagonal");
        for (int v = 0; v < n; ++v) {
            if (inst.at(u, v) != inst.at(v, u)) {
                throw std::invalid_argument("instance_from_matrix: asymmetric matrix");
            }
            if (inst.at(u, v) < 0.0) throw std::invalid_argument("instance_from_matrix: negative weight");
        }
    }
    return inst;
}

} // namespace qtsp
