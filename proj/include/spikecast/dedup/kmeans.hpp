#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "spikecast/core/serialize.hpp"

namespace spikecast {

using Points = std::vector<std::vector<double>>;

struct ClusterModel {
    int level_k = 0;  // effective k
    Points centroids;
    std::uint64_t seed = 0;
    double inertia = 0.0;

    friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

inline void to_json(Json& j, const ClusterModel& m) {
    j = Json{{"level_k", m.level_k}, {"seed", m.seed}, {"inertia", m.inertia}, {"centroids", m.centroids}};
}
inline void from_json(const Json& j, ClusterModel& m) {
    j.at("level_k").get_to(m.level_k);
    j.at("seed").get_to(m.seed);
    j.at("inertia").get_to(m.inertia);
    j.at("centroids").get_to(m.centroids);
    if (m.level_k < 1 || static_cast<std::size_t>(m.level_k) != m.centroids.size())
        throw ValidationError("level_k", "does not match the number of centroids");
}

struct KMeansResult {
    ClusterModel model;
    std::vector<int> assignments;
    int iterations = 0;
    std::vector<double> inertia_trace;  // after every assignment step
};

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Nearest centroid; ties go to the lowest index.
inline int nearest_centroid(const Points& centroids, const std::vector<double>& p) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        double d = squared_distance(centroids[c], p);
        if (d < best_d) best_d = d, best = static_cast<int>(c);
    }
    return best;
}

namespace detail {

// Uniform [0,1) from the raw engine output, identical on every platform
// (std distributions are implementation-defined).
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline void check_points(const Points& pts) {
    if (pts.empty()) throw PreconditionError("kmeans needs at least one point");
    const std::size_t dim = pts[0].size();
    if (dim == 0) throw PreconditionError("kmeans points have dimension 0");
    for (const auto& p : pts) {
        if (p.size() != dim) throw PreconditionError("kmeans points differ in dimension");
        for (double x : p)
            if (!std::isfinite(x)) throw PreconditionError("kmeans point has a non-finite coordinate");
    }
}

// k-means++ seeding: first centre uniform, then proportional to the squared
// distance to the nearest chosen centre.
inline Points kmeanspp(const Points& pts, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = pts.size();
    Points centres;
    centres.push_back(pts[std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)))]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(pts[i], centres[0]);
    while (centres.size() < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick = 0;
        if (total > 0.0) {
            double target = unit_uniform(rng) * total, acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            while (d2[pick] == 0.0) --pick;  // rounding at the very end
        }
        centres.push_back(pts[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(pts[i], centres.back()));
    }
    return centres;
}

inline double inertia_of(const Points& pts, const Points& centroids, const std::vector<int>& assign) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        s += squared_distance(pts[i], centroids[static_cast<std::size_t>(assign[i])]);
    return s;
}

// One sweep of single-point moves: point i leaves cluster a for b when
// n_b/(n_b+1)·|x−m_b|² < n_a/(n_a−1)·|x−m_a|², i.e. the move strictly lowers
// the inertia. Lloyd cannot see these moves (the point is already nearest to
// m_a), which is how it stalls in poor local optima. On a move, centroids
// become the exact means of the new clusters; otherwise nothing is touched.
inline bool single_point_moves(const Points& pts, std::vector<int>& assign, Points& centroids) {
    const std::size_t n = pts.size(), kk = centroids.size(), dim = pts[0].size();
    std::vector<int> next = assign;
    std::vector<std::size_t> counts(kk, 0);
    Points sums(kk, std::vector<double>(dim, 0.0)), means = sums;
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(next[i]);
        ++counts[a];
        for (std::size_t d = 0; d < dim; ++d) sums[a][d] += pts[i][d];
    }
    auto refresh = [&](std::size_t c) {
        for (std::size_t d = 0; d < dim; ++d) means[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    };
    for (std::size_t c = 0; c < kk; ++c)
        if (counts[c] > 0) refresh(c);

    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(next[i]);
        if (counts[a] <= 1) continue;
        const double na = static_cast<double>(counts[a]);
        const double removal = na / (na - 1.0) * squared_distance(pts[i], means[a]);
        std::size_t best = a;
        double best_add = removal;
        for (std::size_t b = 0; b < kk; ++b) {
            if (b == a || counts[b] == 0) continue;
            const double nb = static_cast<double>(counts[b]);
            const double add = nb / (nb + 1.0) * squared_distance(pts[i], means[b]);
            if (add < best_add) best_add = add, best = b;
        }
        // Relative margin so rounding cannot make two points swap forever.
        if (best == a || !(best_add < removal * (1.0 - 1e-12))) continue;
        for (std::size_t d = 0; d < dim; ++d) {
            sums[a][d] -= pts[i][d];
            sums[best][d] += pts[i][d];
        }
        --counts[a];
        ++counts[best];
        refresh(a);
        refresh(best);
        next[i] = static_cast<int>(best);
        moved = true;
    }
    if (moved) {
        assign = std::move(next);
        centroids = std::move(means);
    }
    return moved;
}

}  // namespace detail

// Lloyd's algorithm from a k-means++ start. k is clamped to the number of
// points. An emptied cluster is re-seeded with the point farthest from its
// current centroid (lowest index on ties). At each Lloyd fixpoint a sweep of
// single-point moves is tried; if one lowers the inertia, Lloyd resumes. The
// result is still an assignment fixpoint.
inline KMeansResult kmeans(const Points& pts, int k, std::uint64_t seed, int max_iters = 100) {
    detail::check_points(pts);
    if (k < 1) throw PreconditionError("kmeans needs k >= 1");
    if (max_iters < 1) throw PreconditionError("kmeans needs max_iters >= 1");
    const std::size_t n = pts.size(), dim = pts[0].size();
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);

    std::mt19937_64 rng(seed);
    KMeansResult r;
    Points centroids = detail::kmeanspp(pts, kk, rng);
    std::vector<int> assign(n);
    for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_centroid(centroids, pts[i]);
    r.inertia_trace.push_back(detail::inertia_of(pts, centroids, assign));

    for (int it = 1; it <= max_iters; ++it) {
        r.iterations = it;
        std::vector<std::size_t> counts(kk, 0);
        for (int a : assign) ++counts[static_cast<std::size_t>(a)];
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assign[i])] <= 1) continue;  // never empty another cluster
                double d = squared_distance(pts[i], centroids[static_cast<std::size_t>(assign[i])]);
                if (d > far_d) far_d = d, far = i;
            }
            if (far_d < 0.0) continue;
            --counts[static_cast<std::size_t>(assign[far])];
            assign[far] = static_cast<int>(c);
            counts[c] = 1;
        }
        Points sums(kk, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < dim; ++d) sums[static_cast<std::size_t>(assign[i])][d] += pts[i][d];
        for (std::size_t c = 0; c < kk; ++c)
            if (counts[c] > 0)
                for (std::size_t d = 0; d < dim; ++d) centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);

        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = nearest_centroid(centroids, pts[i]);
        const double before = r.inertia_trace.back();
        r.inertia_trace.push_back(detail::inertia_of(pts, centroids, next));
        // Stop at an assignment fixpoint, or when only ties move (coincident points).
        const bool done = next == assign || r.inertia_trace.back() >= before;
        assign = std::move(next);
        if (!done) continue;
        if (it == max_iters || !detail::single_point_moves(pts, assign, centroids)) break;
        r.inertia_trace.push_back(detail::inertia_of(pts, centroids, assign));
    }
    r.model = ClusterModel{static_cast<int>(kk), std::move(centroids), seed, r.inertia_trace.back()};
    r.assignments = std::move(assign);
    return r;
}

// Lowest-inertia run over `restarts` consecutive seeds (ties: earliest seed).
inline KMeansResult kmeans_best_of(const Points& pts, int k, std::uint64_t seed, int restarts, int max_iters = 100) {
    if (restarts < 1) throw PreconditionError("restarts must be >= 1");
    KMeansResult best = kmeans(pts, k, seed, max_iters);
    for (int s = 1; s < restarts; ++s) {
        auto r = kmeans(pts, k, seed + static_cast<std::uint64_t>(s), max_iters);
        if (r.model.inertia < best.model.inertia) best = std::move(r);
    }
    return best;
}

}  // namespace spikecast
