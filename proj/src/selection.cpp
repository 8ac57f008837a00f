#include "adlearn/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "adlearn/rng.hpp"

namespace adl::sel {

const char* variant_name(QueryVariant v) {
    switch (v) {
        case QueryVariant::Rnd: return "rnd";
        case QueryVariant::Max: return "max";
        case QueryVariant::Min: return "min";
        case QueryVariant::Avg: return "avg";
    }
    return "unknown";
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

std::span<const double> row(std::span<const double> data, size_t i, size_t dim) {
    return {data.data() + i * dim, dim};
}

} // namespace

size_t distinct_count(std::span<const double> data, size_t n, size_t dim) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t(0));
    auto less = [&](size_t a, size_t b) {
        return std::lexicographical_compare(data.begin() + a * dim, data.begin() + (a + 1) * dim,
                                            data.begin() + b * dim, data.begin() + (b + 1) * dim);
    };
    std::sort(idx.begin(), idx.end(), less);
    size_t count = n > 0 ? 1 : 0;
    for (size_t i = 1; i < n; ++i)
        if (less(idx[i - 1], idx[i])) ++count;
    return count;
}

ClusterAssignment kmeans_pp(std::span<const double> data, size_t n, size_t dim, size_t k,
                            uint64_t seed, double tol, int max_iter) {
    if (k < 1)
        throw Error(ErrorCode::InvalidArgument, "kmeans_pp: k must be >= 1");
    if (n == 0 || dim == 0 || data.size() != n * dim)
        throw Error(ErrorCode::InvalidArgument, "kmeans_pp: bad data shape");
    const size_t n_diverse = distinct_count(data, n, dim);
    if (n_diverse <= k)
        throw Error(ErrorCode::Degenerate, "kmeans_pp: need more than k distinct vectors (have "
                    + std::to_string(n_diverse) + ", k = " + std::to_string(k) + ")");

    Rng rng(seed);
    ClusterAssignment asg;
    asg.k = k;
    asg.dim = dim;
    asg.centers.assign(k * dim, 0.0);
    asg.membership.assign(n, 0);

    // seeding: first center uniform, the rest proportional to squared
    // distance from the nearest chosen center
    std::vector<double> best_d2(n, std::numeric_limits<double>::infinity());
    {
        const size_t first = size_t(rng.below(n));
        std::copy_n(data.begin() + first * dim, dim, asg.centers.begin());
        for (size_t i = 0; i < n; ++i)
            best_d2[i] = sq_dist(row(data, i, dim), asg.center(0));
        for (size_t c = 1; c < k; ++c) {
            const double total = std::accumulate(best_d2.begin(), best_d2.end(), 0.0);
            double r = rng.uniform() * total;
            size_t pick = n - 1;
            for (size_t i = 0; i < n; ++i) {
                r -= best_d2[i];
                if (r <= 0.0 && best_d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            // numeric tail guard: fall back to the farthest point
            if (best_d2[pick] <= 0.0)
                pick = size_t(std::max_element(best_d2.begin(), best_d2.end()) - best_d2.begin());
            std::copy_n(data.begin() + pick * dim, dim, asg.centers.begin() + c * dim);
            for (size_t i = 0; i < n; ++i)
                best_d2[i] = std::min(best_d2[i], sq_dist(row(data, i, dim), asg.center(c)));
        }
    }

    std::vector<size_t> counts(k, 0);
    std::vector<double> means(k * dim, 0.0);
    auto assign_all = [&](bool& changed) {
        changed = false;
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (size_t c = 0; c < k; ++c) {
                const double d = sq_dist(row(data, i, dim), asg.center(c));
                if (d < best) {
                    best = d;
                    best_c = int(c);
                }
            }
            if (asg.membership[i] != best_c) {
                asg.membership[i] = best_c;
                changed = true;
            }
        }
    };
    auto repair_empties = [&]() -> bool {
        bool repaired = false;
        for (;;) {
            std::fill(counts.begin(), counts.end(), size_t(0));
            for (int m : asg.membership) ++counts[size_t(m)];
            size_t empty = k;
            for (size_t c = 0; c < k; ++c)
                if (counts[c] == 0) {
                    empty = c;
                    break;
                }
            if (empty == k) return repaired;
            // donate the globally farthest point from a cluster that can spare one
            double worst = -1.0;
            size_t worst_i = 0;
            for (size_t i = 0; i < n; ++i) {
                if (counts[size_t(asg.membership[i])] < 2) continue;
                const double d = sq_dist(row(data, i, dim), asg.center(size_t(asg.membership[i])));
                if (d > worst) {
                    worst = d;
                    worst_i = i;
                }
            }
            asg.membership[worst_i] = int(empty);
            std::copy_n(data.begin() + worst_i * dim, dim, asg.centers.begin() + empty * dim);
            repaired = true;
        }
    };
    auto recompute_means = [&]() {
        std::fill(means.begin(), means.end(), 0.0);
        std::fill(counts.begin(), counts.end(), size_t(0));
        for (size_t i = 0; i < n; ++i) {
            const size_t c = size_t(asg.membership[i]);
            ++counts[c];
            for (size_t d = 0; d < dim; ++d) means[c * dim + d] += data[i * dim + d];
        }
        for (size_t c = 0; c < k; ++c)
            for (size_t d = 0; d < dim; ++d) asg.centers[c * dim + d] = means[c * dim + d] / double(counts[c]);
    };
    auto objective = [&]() {
        double sse = 0.0;
        for (size_t i = 0; i < n; ++i)
            sse += sq_dist(row(data, i, dim), asg.center(size_t(asg.membership[i])));
        return sse;
    };

    double prev_sse = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        assign_all(changed);
        const bool repaired = repair_empties();
        recompute_means();
        const double sse = objective();
        asg.sse_trace.push_back(sse);
        asg.within_cluster_sse = sse;
        if (!changed && !repaired) break;
        if (std::isfinite(prev_sse) && prev_sse - sse <= tol * prev_sse) break;
        prev_sse = sse;
    }
    return asg;
}

double laplacian_similarity(std::span<const double> v, std::span<const double> center,
                            size_t n_e) {
    if (v.size() != center.size())
        throw Error(ErrorCode::InvalidArgument, "laplacian_similarity: length mismatch");
    if (n_e < 1)
        throw Error(ErrorCode::InvalidArgument, "laplacian_similarity: n_e must be >= 1");
    double l1 = 0.0;
    for (size_t i = 0; i < v.size(); ++i) l1 += std::fabs(v[i] - center[i]);
    return std::exp(-l1 / double(n_e));
}

std::vector<double> score_candidates(const ClusterAssignment& assignment,
                                     std::span<const double> data, size_t n, size_t dim,
                                     size_t n_e) {
    if (assignment.membership.size() != n || assignment.dim != dim)
        throw Error(ErrorCode::InvalidArgument, "score_candidates: assignment does not cover data");
    std::vector<double> scores(n);
    for (size_t i = 0; i < n; ++i)
        scores[i] = laplacian_similarity(row(data, i, dim),
                                         assignment.center(size_t(assignment.membership[i])), n_e);
    return scores;
}

std::vector<size_t> select_batch(QueryVariant variant, const ClusterAssignment& assignment,
                                 std::span<const double> scores, uint64_t seed) {
    const size_t k = assignment.k;
    std::vector<std::vector<size_t>> members(k);
    for (size_t i = 0; i < assignment.membership.size(); ++i)
        members[size_t(assignment.membership[i])].push_back(i);

    Rng rng(seed);
    std::vector<size_t> picks(k);
    for (size_t c = 0; c < k; ++c) {
        const std::vector<size_t>& m = members[c];
        if (m.empty())
            throw Error(ErrorCode::Internal, "select_batch: empty cluster " + std::to_string(c));
        switch (variant) {
            case QueryVariant::Rnd:
                picks[c] = m[size_t(rng.below(m.size()))];
                break;
            case QueryVariant::Max: {
                size_t best = m[0];
                for (size_t i : m)
                    if (scores[i] < scores[best]) best = i;
                picks[c] = best;
                break;
            }
            case QueryVariant::Min: {
                size_t best = m[0];
                for (size_t i : m)
                    if (scores[i] > scores[best]) best = i;
                picks[c] = best;
                break;
            }
            case QueryVariant::Avg: {
                double mean = 0.0;
                for (size_t i : m) mean += scores[i];
                mean /= double(m.size());
                size_t best = m[0];
                double best_dev = std::fabs(scores[m[0]] - mean);
                for (size_t i : m) {
                    const double dev = std::fabs(scores[i] - mean);
                    if (dev > best_dev) {
                        best_dev = dev;
                        best = i;
                    }
                }
                picks[c] = best;
                break;
            }
        }
    }
    return picks;
}

} // namespace adl::sel
