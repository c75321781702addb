#pragma once

#include "effdim/gaussian_design.hpp"
#include "effdim/relu_net.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

// Hot loops, each with a plain serial reference and an OpenMP version that
// must agree with it bit for bit.
namespace effdim::kernels {

/// Columns of `inputs` are points.
Matrix evaluate_batch_serial(const ReluNetwork &net, const Matrix &inputs);
Matrix evaluate_batch_omp(const ReluNetwork &net, const Matrix &inputs);

/// Number of the first n draws of sample(set.profile, n, seed) outside S.
std::size_t count_outside_serial(const EllipsoidSet &set, std::size_t n, std::uint64_t seed);
std::size_t count_outside_omp(const EllipsoidSet &set, std::size_t n, std::uint64_t seed);

/// For Z ~ N(0, I_p): counts of |Z|_2 > t for every t, over n draws.
std::vector<std::size_t> tail_counts_serial(std::size_t p, const std::vector<double> &ts, std::size_t n,
                                            std::uint64_t seed);
std::vector<std::size_t> tail_counts_omp(std::size_t p, const std::vector<double> &ts, std::size_t n,
                                         std::uint64_t seed);

/// n x k matrix of sorted Euclidean distances from each row of `points` to
/// its k nearest other rows. The serial version compares every pair
/// directly; the OpenMP version searches a kd-tree built once and shared
/// by the threads. Ties are broken by row index in both.
Matrix knn_distances_serial(const Matrix &points, std::size_t k);
Matrix knn_distances_omp(const Matrix &points, std::size_t k);

} // namespace effdim::kernels
