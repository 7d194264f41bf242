#pragma once

#include "softprog/program.hpp"

namespace softprog::algorithms {

struct GridPathResult {
    Tensor distances;        // (n+2) x (n+2), padded with the sentinel
    Tensor path_map;         // n x n visit probabilities (binary in hard mode)
    Tensor neighbor_weights; // 8 x n x n softmin weights of the final sweep
    Tensor source_mass;      // scalar: path mass absorbed at the source
    RunReport report;
};

struct BellmanFordOptions {
    int64_t iters = -1;              // relaxation sweeps; default n*n
    double mass_eps = 1e-6;          // backtrace stops at source mass >= 1-mass_eps
    int64_t backtrace_max_iter = -1; // default 4*n*n
};

// The 8-neighbourhood directions in the fixed enumeration used everywhere
// (sweeps, weights, backtrace).
inline constexpr int kNeighborCount = 8;
inline constexpr int kNeighborDelta[kNeighborCount][2] = {
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};

/// Sentinel "infinity": large but finite so gradients stay finite.
double grid_sentinel(const Tensor& cost, int64_t n);

/// Statement program: iters sweeps of D = cost + min over the 8 neighbours
/// (re-pinning D[source]=0), then a backtrace loop propagating a marginal
/// position distribution from the goal until the source has absorbed almost
/// all mass. State variables: D, W, cost_flat, pos, path, absorbed.
StatementPtr bellman_ford_program(int64_t n, const BellmanFordOptions& opts);

/// Relaxed Bellman-Ford on an n x n grid of non-negative node costs with
/// 8-neighbourhood and path reconstruction.
GridPathResult bellman_ford(const Tensor& cost, double beta, RunMode mode = RunMode::relaxed,
                            BellmanFordOptions opts = {});

} // namespace softprog::algorithms
