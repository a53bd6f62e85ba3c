#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "tgpipe/cleaner.hpp"

namespace tgpipe {

struct MetricParams {
    int k_neighbors = 10;       // even, >= 2
    double viral_threshold = 3.0;
};

struct MessageMetrics {
    double virality_ratio = 0.0;
    bool is_viral = false;
    double engagement_rate = 0.0;
};

// Indices of up to k temporal neighbors of `index` in one channel, k/2 on
// each side; at a boundary the deficit is taken from the other side so the
// window always holds min(k, n-1) messages.
inline std::vector<size_t> neighbor_window(size_t n, size_t index, int k) {
    const size_t want = std::min<size_t>(static_cast<size_t>(k), n > 0 ? n - 1 : 0);
    std::vector<size_t> out;
    out.reserve(want);
    size_t lo = index, hi = index;
    while (out.size() < want) {
        const bool can_lo = lo > 0;
        const bool can_hi = hi + 1 < n;
        const size_t before = index - lo;
        const size_t after = hi - index;
        // Prefer the side still under its k/2 quota; overflow to the other.
        if (can_lo && (before < static_cast<size_t>(k) / 2 || !can_hi)) {
            --lo;
            out.push_back(lo);
        } else if (can_hi) {
            ++hi;
            out.push_back(hi);
        } else {
            break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline double virality_ratio(double own_forwards, const std::vector<double>& neighbor_forwards) {
    double mean = 0.0;
    if (!neighbor_forwards.empty()) {
        double sum = 0.0;
        for (double f : neighbor_forwards) sum += f;
        mean = sum / static_cast<double>(neighbor_forwards.size());
    }
    return own_forwards / std::max(1.0, mean);
}

// Annotates records in input order. Neighborhoods are computed per channel
// over date-then-id order and never cross channel boundaries.
inline std::vector<MessageMetrics> compute_metrics(const std::vector<CleanRecord>& records,
                                                   const MetricParams& params = {}) {
    // channel -> record indices sorted by (date, message_id)
    std::map<int64_t, std::vector<size_t>> by_channel;
    for (size_t i = 0; i < records.size(); ++i)
        by_channel[records[i].channel_id].push_back(i);
    for (auto& [ch, idx] : by_channel)
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
            if (records[a].date != records[b].date) return records[a].date < records[b].date;
            return records[a].message_id < records[b].message_id;
        });

    auto forwards_of = [](const CleanRecord& r) {
        return r.forwards ? static_cast<double>(*r.forwards) : 0.0;
    };

    std::vector<MessageMetrics> out(records.size());
    for (const auto& [ch, idx] : by_channel) {
        for (size_t pos = 0; pos < idx.size(); ++pos) {
            const CleanRecord& r = records[idx[pos]];
            std::vector<double> nf;
            for (size_t npos : neighbor_window(idx.size(), pos, params.k_neighbors))
                nf.push_back(forwards_of(records[idx[npos]]));
            MessageMetrics m;
            m.virality_ratio = virality_ratio(forwards_of(r), nf);
            m.is_viral = m.virality_ratio >= params.viral_threshold;
            const double interactions =
                static_cast<double>(r.reactions_total + r.replies_count.value_or(0));
            m.engagement_rate = interactions / std::max<double>(1.0, static_cast<double>(r.views.value_or(0)));
            out[idx[pos]] = m;
        }
    }
    return out;
}

}  // namespace tgpipe
