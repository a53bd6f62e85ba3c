#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tgpipe/csv.hpp"
#include "tgpipe/model.hpp"

namespace tgpipe {

struct ChannelSeed {
    std::optional<int64_t> id;  // unknown before first contact
    std::string channel_name;
    std::string url;
    std::string cluster;
    std::string user;
};

struct CrawlWindow {
    int64_t start = 0;
    int64_t end = 0;
    std::optional<int64_t> limit;  // max messages per channel, most recent kept
};

struct RateLimitPolicy {
    double max_requests_per_second = 1.0;
    int max_retries = 3;
    int max_parallel_channels = 4;
};

struct CrawlFailure {
    std::string channel;
    std::string error;
};

struct CrawlReport {
    int64_t channels_processed = 0;
    int64_t messages_fetched = 0;
    std::vector<CrawlFailure> failures;
    int64_t rounds = 0;  // snowball only
};

class ChannelNotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProviderUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FloodWait : public std::runtime_error {
public:
    explicit FloodWait(int retry_after_s)
        : std::runtime_error("flood wait " + std::to_string(retry_after_s) + "s"),
          retry_after_s(retry_after_s) {}
    int retry_after_s;
};

class SinkUnwritable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FileMissing : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class HeaderMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RowError : public std::runtime_error {
public:
    RowError(size_t line_no, const std::string& what)
        : std::runtime_error("row " + std::to_string(line_no) + ": " + what),
          line_no(line_no) {}
    size_t line_no;
};

struct HistoryPage {
    std::vector<RawMessage> messages;
    std::optional<int64_t> next_offset_id;
};

// Transport-agnostic channel source. `key` is a numeric id or a username,
// per the by_url flag of the calling operation.
class HistoryProvider {
public:
    virtual ~HistoryProvider() = default;
    virtual ChannelDetails get_details(const std::string& key) = 0;
    virtual HistoryPage get_messages(const std::string& key, int64_t since, int64_t until,
                                     int64_t offset_id, int64_t limit) = 0;
};

// Paces requests at a fixed interval of 1/rate, shared across all
// concurrent channel fetches. Strict pacing (no bursts) guarantees that no
// 1-second sliding window ever holds more than `rate` requests; the small
// margin on the interval absorbs scheduler wake-up jitter.
class RateLimiter {
public:
    explicit RateLimiter(double max_requests_per_second)
        : interval_(1.05 / max_requests_per_second), next_(clock::now()) {}

    void acquire() {
        clock::time_point slot;
        {
            std::lock_guard lock(mu_);
            const auto now = clock::now();
            if (next_ < now) next_ = now;
            slot = next_;
            next_ += std::chrono::duration_cast<clock::duration>(
                std::chrono::duration<double>(interval_));
        }
        std::this_thread::sleep_until(slot);
    }

private:
    using clock = std::chrono::steady_clock;

    double interval_;
    clock::time_point next_;
    std::mutex mu_;
};

inline std::string seed_key(const ChannelSeed& seed, bool by_url) {
    auto username_of = [&]() -> std::string {
        if (!seed.user.empty()) return seed.user;
        const std::string prefix = "https://t.me/";
        if (seed.url.rfind(prefix, 0) == 0) return seed.url.substr(prefix.size());
        return seed.url;
    };
    if (by_url) {
        auto u = username_of();
        if (!u.empty()) return u;
    }
    if (seed.id) return std::to_string(*seed.id);
    return username_of();
}

// CSV header id,channel_name,url,cluster,user. Duplicate ids are kept;
// dedup is the snowball's job.
inline std::vector<ChannelSeed> read_channels_from_csv(const std::string& path) {
    if (!std::filesystem::exists(path)) throw FileMissing("channels file missing: " + path);
    csv::Table t = csv::read_file(path);
    for (const char* req : {"id", "channel_name", "url", "cluster", "user"})
        if (t.column(req) < 0)
            throw HeaderMismatch(std::string("channels CSV missing column '") + req + "'");
    const int c_id = t.column("id"), c_name = t.column("channel_name"),
              c_url = t.column("url"), c_cluster = t.column("cluster"),
              c_user = t.column("user");
    std::vector<ChannelSeed> seeds;
    for (size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        ChannelSeed s;
        if (!row[c_id].empty()) {
            try {
                s.id = std::stoll(row[c_id]);
            } catch (const std::exception&) {
                throw RowError(i + 2, "bad id '" + row[c_id] + "'");
            }
        }
        s.channel_name = row[c_name];
        s.url = row[c_url];
        s.cluster = row[c_cluster];
        s.user = row[c_user];
        if (!s.id && s.url.empty() && s.user.empty())
            throw RowError(i + 2, "row identifies no channel (id, url and user all empty)");
        seeds.push_back(std::move(s));
    }
    return seeds;
}

namespace detail {

template <typename F>
auto with_retries(F&& call, const RateLimitPolicy& policy) {
    int retries = 0;
    for (;;) {
        try {
            return call();
        } catch (const FloodWait& fw) {
            if (retries >= policy.max_retries) throw;
            std::this_thread::sleep_for(std::chrono::seconds(fw.retry_after_s));
            ++retries;
        } catch (const ProviderUnavailable&) {
            if (retries >= policy.max_retries) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(100 * (1 << retries)));
            ++retries;
        }
    }
}

}  // namespace detail

// All messages with start <= date < end, ascending by (date, message_id);
// when window.limit truncates, the most recent are kept.
inline std::vector<RawMessage> fetch_history(HistoryProvider& provider, RateLimiter& limiter,
                                             const ChannelSeed& channel, const CrawlWindow& window,
                                             const RateLimitPolicy& policy, bool by_url = false) {
    const std::string key = seed_key(channel, by_url);
    std::vector<RawMessage> all;
    int64_t offset_id = 0;
    for (;;) {
        limiter.acquire();
        HistoryPage page = detail::with_retries(
            [&] { return provider.get_messages(key, window.start, window.end, offset_id, 500); },
            policy);
        for (auto& m : page.messages)
            if (m.date >= window.start && m.date < window.end) all.push_back(std::move(m));
        if (!page.next_offset_id) break;
        offset_id = *page.next_offset_id;
    }
    std::sort(all.begin(), all.end(), [](const RawMessage& a, const RawMessage& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.message_id < b.message_id;
    });
    if (window.limit && all.size() > static_cast<size_t>(*window.limit))
        all.erase(all.begin(), all.end() - *window.limit);
    return all;
}

inline ChannelDetails fetch_details(HistoryProvider& provider, RateLimiter& limiter,
                                    const ChannelSeed& channel, const RateLimitPolicy& policy,
                                    bool by_url = false) {
    const std::string key = seed_key(channel, by_url);
    limiter.acquire();
    return detail::with_retries([&] { return provider.get_details(key); }, policy);
}

struct CrawlSinks {
    std::string messages_dir;  // messages_<channel_id>.jsonl per channel
    std::string details_csv;
};

inline const std::vector<std::string>& details_csv_header() {
    static const std::vector<std::string> header = {
        "id",          "channel_name", "url",         "cluster",
        "user",        "subscribers",  "created_at",  "description",
        "pinned_message_ids", "similar_channels"};
    return header;
}

struct ChannelResult {
    ChannelSeed seed;
    std::optional<ChannelDetails> details;
    std::vector<RawMessage> messages;
    std::optional<std::string> error;
};

namespace detail {

inline void write_details_row(std::ostream& os, const ChannelSeed& seed,
                              const ChannelDetails& d) {
    nlohmann::json pinned = d.pinned_message_ids;
    nlohmann::json similar = nlohmann::json::array();
    for (const auto& s : d.similar_channels)
        similar.push_back({{"id", s.id}, {"title", s.title}, {"username", s.username}});
    csv::write_row(os, {std::to_string(d.channel_id), d.title.empty() ? seed.channel_name : d.title,
                        d.url, seed.cluster, d.username, std::to_string(d.subscribers),
                        format_rfc3339(d.created_at), d.description, pinned.dump(),
                        similar.dump()});
}

}  // namespace detail

// Fetches details + history for every seed; per-channel failures go to the
// report instead of aborting the batch. append=false truncates the sinks
// first. Up to policy.max_parallel_channels fetches run concurrently; all
// writing happens on the calling thread, in seed order.
inline std::pair<CrawlReport, std::vector<ChannelResult>> process_channels(
    HistoryProvider& provider, RateLimiter& limiter, const std::vector<ChannelSeed>& seeds,
    const CrawlWindow& window, const RateLimitPolicy& policy, const CrawlSinks& sinks,
    bool append, bool by_url) {
    std::error_code ec;
    std::filesystem::create_directories(sinks.messages_dir, ec);
    if (ec) throw SinkUnwritable("cannot create messages dir: " + sinks.messages_dir);

    std::vector<ChannelResult> results(seeds.size());
    {
        std::mutex mu;
        size_t next = 0;
        auto worker = [&] {
            for (;;) {
                size_t i;
                {
                    std::lock_guard lock(mu);
                    if (next >= seeds.size()) return;
                    i = next++;
                }
                ChannelResult& r = results[i];
                r.seed = seeds[i];
                try {
                    r.details = fetch_details(provider, limiter, seeds[i], policy, by_url);
                    ChannelSeed resolved = seeds[i];
                    resolved.id = r.details->channel_id;
                    r.messages = fetch_history(provider, limiter, resolved, window, policy, false);
                } catch (const std::exception& e) {
                    r.error = e.what();
                }
            }
        };
        std::vector<std::thread> threads;
        const int nthreads = std::max(1, std::min<int>(policy.max_parallel_channels,
                                                       static_cast<int>(seeds.size())));
        for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    const bool fresh_details = !append || !std::filesystem::exists(sinks.details_csv);
    std::ofstream details(sinks.details_csv,
                          std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    if (!details) throw SinkUnwritable("cannot write details CSV: " + sinks.details_csv);
    if (fresh_details) csv::write_row(details, details_csv_header());

    CrawlReport report;
    std::set<std::string> truncated;
    for (const auto& r : results) {
        if (r.error) {
            report.failures.push_back({seed_key(r.seed, by_url), *r.error});
            continue;
        }
        detail::write_details_row(details, r.seed, *r.details);
        const std::string path = sinks.messages_dir + "/messages_" +
                                 std::to_string(r.details->channel_id) + ".jsonl";
        const bool trunc = !append && truncated.insert(path).second;
        std::ofstream out(path, std::ios::binary | (trunc ? std::ios::trunc : std::ios::app));
        if (!out) throw SinkUnwritable("cannot write messages file: " + path);
        for (const auto& m : r.messages) out << serialize_message(m) << "\n";
        report.messages_fetched += static_cast<int64_t>(r.messages.size());
        ++report.channels_processed;
    }
    return {std::move(report), std::move(results)};
}

// Recursive expansion over recommended channels: round r processes only
// channels never seen before; the next frontier is the union of their
// similar_channels minus everything already processed, in stable discovery
// order. Stops on an empty frontier or after max_rounds.
inline std::pair<std::vector<ChannelSeed>, CrawlReport> snowball(
    HistoryProvider& provider, RateLimiter& limiter, const std::vector<ChannelSeed>& seeds,
    int max_rounds, const CrawlWindow& window, const RateLimitPolicy& policy,
    const CrawlSinks& sinks) {
    std::vector<ChannelSeed> current = seeds;
    std::vector<ChannelSeed> all_channels;
    std::set<int64_t> visited;
    CrawlReport total;

    for (int round = 1; round <= max_rounds && !current.empty(); ++round) {
        total.rounds = round;
        auto [report, results] = process_channels(provider, limiter, current, window, policy,
                                                  sinks, /*append=*/round > 1,
                                                  /*by_url=*/round == 1);
        total.channels_processed += report.channels_processed;
        total.messages_fetched += report.messages_fetched;
        total.failures.insert(total.failures.end(), report.failures.begin(),
                              report.failures.end());

        std::vector<ChannelSeed> frontier;
        std::set<int64_t> in_frontier;
        for (const auto& r : results) {
            if (!r.details) {
                // failed channels stay unexpanded but count as attempted
                if (r.seed.id) visited.insert(*r.seed.id);
                continue;
            }
            ChannelSeed processed = r.seed;
            processed.id = r.details->channel_id;
            if (processed.user.empty()) processed.user = r.details->username;
            visited.insert(r.details->channel_id);
            all_channels.push_back(processed);
            for (const auto& rec : r.details->similar_channels) {
                if (visited.count(rec.id) || in_frontier.count(rec.id)) continue;
                in_frontier.insert(rec.id);
                frontier.push_back({rec.id, rec.title, "https://t.me/" + rec.username,
                                    "not assigned", rec.username});
            }
        }
        // a later round may have visited a channel queued earlier in this one
        std::erase_if(frontier, [&](const ChannelSeed& s) { return visited.count(*s.id) > 0; });
        current = std::move(frontier);
    }
    return {std::move(all_channels), std::move(total)};
}

}  // namespace tgpipe
