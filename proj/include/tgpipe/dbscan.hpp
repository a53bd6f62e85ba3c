#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

namespace tgpipe {

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

// Renumber cluster labels to 0..T-1 by descending size, ties broken by the
// cluster's smallest member index. -1 stays -1.
inline std::vector<int> renumber_by_size(const std::vector<int>& labels) {
    std::map<int, std::pair<size_t, size_t>> stats;  // label -> (size, first index)
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        auto [it, inserted] = stats.try_emplace(labels[i], 0, i);
        ++it->second.first;
    }
    std::vector<std::pair<int, std::pair<size_t, size_t>>> order(stats.begin(), stats.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second.first != b.second.first) return a.second.first > b.second.first;
        return a.second.second < b.second.second;
    });
    std::map<int, int> remap;
    for (size_t k = 0; k < order.size(); ++k) remap[order[k].first] = static_cast<int>(k);
    std::vector<int> out(labels.size(), -1);
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) out[i] = remap[labels[i]];
    return out;
}

// DBSCAN with Euclidean eps. A core point has >= min_points neighbors
// within eps, itself included. Clusters are the connected components of
// core points; a non-core point joins the cluster of its nearest core
// within eps (ties: lower core index), otherwise it is noise (-1).
// Labels come back renumbered by size descending.
inline std::vector<int> cluster_embeddings(const std::vector<std::vector<double>>& points,
                                           double eps, int min_points) {
    const size_t n = points.size();
    const double eps2 = eps * eps;
    std::vector<std::vector<size_t>> neighbors(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (detail::sq_dist(points[i], points[j]) <= eps2) neighbors[i].push_back(j);

    std::vector<bool> core(n, false);
    for (size_t i = 0; i < n; ++i)
        core[i] = neighbors[i].size() >= static_cast<size_t>(min_points);

    std::vector<int> labels(n, -1);
    int next = 0;
    for (size_t i = 0; i < n; ++i) {
        if (!core[i] || labels[i] >= 0) continue;
        const int cluster = next++;
        std::vector<size_t> stack{i};
        labels[i] = cluster;
        while (!stack.empty()) {
            const size_t p = stack.back();
            stack.pop_back();
            for (size_t q : neighbors[p]) {
                if (!core[q] || labels[q] >= 0) continue;
                labels[q] = cluster;
                stack.push_back(q);
            }
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        double best = eps2;
        int best_label = -1;
        bool found = false;
        for (size_t q : neighbors[i]) {
            if (!core[q]) continue;
            const double d = detail::sq_dist(points[i], points[q]);
            if (!found || d < best) {
                best = d;
                best_label = labels[q];
                found = true;
            }
        }
        labels[i] = best_label;
    }
    return renumber_by_size(labels);
}

}  // namespace tgpipe
