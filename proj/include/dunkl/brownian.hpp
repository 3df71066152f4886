#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace dunkl {

/// Per-path stream seed derived from (master_seed, path_id) with SplitMix64
/// finalizers.  Each path draws from std::mt19937_64 seeded with this value
/// and std::normal_distribution<double>, so a path's increments depend only
/// on the pair and never on which thread produced them.
std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t path_id);

/// Brownian increments on a uniform grid of `steps` intervals over [0, T].
/// Column l of `increments` is B(t_{l+1}) - B(t_l) (r components).
struct BrownianDriver {
    int r = 0;
    int steps = 0;
    double T = 0.0;
    Eigen::MatrixXd increments;
    std::uint64_t master_seed = 0;
    std::uint64_t path_id = 0;

    double dt() const { return T / steps; }
    auto increment(int l) const { return increments.col(l); }
};

BrownianDriver make_brownian(int r, int finest_n, double T, std::uint64_t master_seed, std::uint64_t path_id);

/// Sums consecutive blocks of `factor` increments.  Blocks are summed
/// pairwise, so for power-of-two factors coarsen(coarsen(B, a), b) equals
/// coarsen(B, a * b) bit for bit.  Throws GridError if factor does not divide
/// the step count.
BrownianDriver coarsen(const BrownianDriver& driver, int factor);

}  // namespace dunkl
