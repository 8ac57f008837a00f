#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adlearn/error.hpp"

namespace adl::sel {

enum class QueryVariant { Rnd, Max, Min, Avg };

const char* variant_name(QueryVariant v);

struct ClusterAssignment {
    size_t k = 0;
    size_t dim = 0;
    std::vector<double> centers;     // k x dim, row-major
    std::vector<int> membership;     // cluster index per vector
    double within_cluster_sse = 0.0;
    std::vector<double> sse_trace;   // objective after each Lloyd iteration

    std::span<const double> center(size_t l) const { return {centers.data() + l * dim, dim}; }
};

// Number of distinct rows (exact equality) in an n x dim matrix.
size_t distinct_count(std::span<const double> data, size_t n, size_t dim);

// K-means++ seeding followed by Lloyd iterations until the assignment is
// stable, the relative SSE change drops below tol, or max_iter passes.
// Empty clusters are repaired by donating the globally farthest point.
// Requires more than k distinct vectors.
ClusterAssignment kmeans_pp(std::span<const double> data, size_t n, size_t dim, size_t k,
                            uint64_t seed, double tol = 1e-6, int max_iter = 300);

// exp(-L1(v, center) / n_e), in (0, 1]; 1 exactly when v equals the center.
double laplacian_similarity(std::span<const double> v, std::span<const double> center,
                            size_t n_e);

// Similarity of every vector to its own cluster center.
std::vector<double> score_candidates(const ClusterAssignment& assignment,
                                     std::span<const double> data, size_t n, size_t dim,
                                     size_t n_e);

// One candidate index per cluster, ordered by cluster id. Rnd picks uniformly
// within the cluster; Max takes the smallest similarity (farthest point), Min
// the largest, Avg the largest deviation from the cluster's mean similarity.
// Ties break toward the smallest candidate index.
std::vector<size_t> select_batch(QueryVariant variant, const ClusterAssignment& assignment,
                                 std::span<const double> scores, uint64_t seed);

} // namespace adl::sel
