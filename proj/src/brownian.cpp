#include "dunkl/brownian.hpp"

#include <cmath>
#include <random>

#include "dunkl/errors.hpp"

namespace dunkl {

namespace {

std::uint64_t splitmix_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double pairwise_block(const Eigen::MatrixXd& inc, Eigen::Index row, Eigen::Index begin, Eigen::Index len) {
    if (len == 1) {
        return inc(row, begin);
    }
    const Eigen::Index half = len / 2;
    return pairwise_block(inc, row, begin, half) + pairwise_block(inc, row, begin + half, len - half);
}

}  // namespace

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t path_id) {
    const std::uint64_t key = splitmix_finalize(master_seed + 0x9e3779b97f4a7c15ull);
    return splitmix_finalize(key ^ (path_id * 0xd1b54a32d192ed03ull + 0x9e3779b97f4a7c15ull));
}

BrownianDriver make_brownian(int r, int finest_n, double T, std::uint64_t master_seed, std::uint64_t path_id) {
    if (finest_n < 1) {
        throw GridError("make_brownian: need at least one step");
    }
    if (r < 1) {
        throw DimensionError("make_brownian: Brownian dimension must be positive");
    }
    if (!(T > 0.0)) {
        throw ParameterError("make_brownian: horizon must be positive");
    }
    BrownianDriver driver;
    driver.r = r;
    driver.steps = finest_n;
    driver.T = T;
    driver.master_seed = master_seed;
    driver.path_id = path_id;
    driver.increments.resize(r, finest_n);

    std::mt19937_64 engine(path_seed(master_seed, path_id));
    std::normal_distribution<double> normal(0.0, std::sqrt(T / finest_n));
    double* data = driver.increments.data();
    for (Eigen::Index i = 0; i < driver.increments.size(); ++i) {
        data[i] = normal(engine);
    }
    return driver;
}

BrownianDriver coarsen(const BrownianDriver& driver, int factor) {
    if (factor < 1 || driver.steps % factor != 0) {
        throw GridError("coarsen: factor must divide the number of steps");
    }
    if (factor == 1) {
        return driver;
    }
    BrownianDriver out;
    out.r = driver.r;
    out.steps = driver.steps / factor;
    out.T = driver.T;
    out.master_seed = driver.master_seed;
    out.path_id = driver.path_id;
    out.increments.resize(driver.r, out.steps);
    for (int l = 0; l < out.steps; ++l) {
        for (int j = 0; j < driver.r; ++j) {
            out.increments(j, l) = pairwise_block(driver.increments, j, static_cast<Eigen::Index>(l) * factor, factor);
        }
    }
    return out;
}

}  // namespace dunkl
