#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qtsp {

struct WeightRange {
    double lo = 10.0;
    double hi = 50.0;
};

/// Symmetric TSP instance with a recorded generation seed.
struct TspInstance {
    int n = 0;
    std::vector<double> dist; // n*n row-major, symmetric, zero diagonal
    std::uint64_t seed = 0;
    WeightRange range;
    bool integer_weights = false;

    double at(int u, int v) const { return dist[static_cast<std::size_t>(u) * n + v]; }
    double& at(int u, int v) { return dist[static_cast<std::size_t>(u) * n + v]; }
    double max_weight() const;
};

/// All globally optimal tours (city 0 fixed first) and their common length.
struct ExactSolution {
    std::vector<std::vector<int>> optimal_tours;
    double optimal_length = 0.0;

    bool contains(std::span<const int> tour) const;
};

/// Draws symmetric edge weights uniformly from `range`, one draw per
/// unordered pair (u,v), u < v, in row-major order. Pure function of its
/// arguments: identical inputs give bit-identical matrices.
TspInstance generate_instance(int n, std::uint64_t seed, WeightRange range = {},
                              bool integer_weights = false);

/// Cyclic tour length: sum of dist[tour[i]][tour[(i+1) mod n]], accumulated
/// left to right. Throws if `tour` is not a permutation of 0..n-1.
double tour_length(const TspInstance& inst, std::span<const int> tour);

/// Enumerates all (n-1)! tours with city 0 fixed first and collects every
/// tour attaining the minimum length. Refuses n above `enumeration_cap`.
ExactSolution solve_exact(const TspInstance& inst, int enumeration_cap = 10);

/// Constructs an instance directly from a full distance matrix (fixtures,
/// tests). Validates symmetry and the zero diagonal.
TspInstance instance_from_matrix(int n, std::vector<double> dist, std::uint64_t seed = 0);

} // namespace qtsp
