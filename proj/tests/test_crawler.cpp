#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <queue>
#include <set>

#include "tgpipe/archive_provider.hpp"
#include "tgpipe/crawler.hpp"

using namespace tgpipe;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = TGPIPE_FIXTURES_DIR;

std::string temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("tgpipe_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

RateLimitPolicy fast_policy() {
    RateLimitPolicy p;
    p.max_requests_per_second = 1000;
    return p;
}

}  // namespace

TEST_CASE("read_channels_from_csv") {
    auto seeds = read_channels_from_csv(kFixtures + "/channels_sample.csv");
    REQUIRE(seeds.size() == 3);
    CHECK(seeds[0].id == 101);
    CHECK(seeds[0].channel_name == "Alpha Energía");
    CHECK(seeds[0].user == "alpha");
    CHECK(seeds[2].url == "https://t.me/gamma");

    const std::string dir = temp_dir("csv");
    {
        std::ofstream os(dir + "/only_header.csv");
        os << "id,channel_name,url,cluster,user\r\n";
    }
    CHECK(read_channels_from_csv(dir + "/only_header.csv").empty());
    {
        std::ofstream os(dir + "/missing_url.csv");
        os << "id,channel_name,cluster,user\r\n1,a,c,u\r\n";
    }
    CHECK_THROWS_AS(read_channels_from_csv(dir + "/missing_url.csv"), HeaderMismatch);
    CHECK_THROWS_AS(read_channels_from_csv(dir + "/nope.csv"), FileMissing);
    {
        std::ofstream os(dir + "/badrow.csv");
        os << "id,channel_name,url,cluster,user\r\nxyz,a,u,c,u\r\n";
    }
    CHECK_THROWS_AS(read_channels_from_csv(dir + "/badrow.csv"), RowError);
    {
        // duplicate ids retained; dedup is the snowball's job
        std::ofstream os(dir + "/dups.csv");
        os << "id,channel_name,url,cluster,user\r\n5,a,,c,u\r\n5,a,,c,u\r\n";
    }
    CHECK(read_channels_from_csv(dir + "/dups.csv").size() == 2);
}

TEST_CASE("fetch_history window filter, order and limit") {
    ArchiveProvider provider(kFixtures + "/archive_small");
    RateLimiter limiter(1000);
    ChannelSeed seed;
    seed.user = "tiny";
    // fixture: 10 daily messages starting 2024-08-01; window Aug 4..8 -> ids 4..7
    CrawlWindow window{*parse_timestamp("2024-08-04T00:00:00Z"),
                       *parse_timestamp("2024-08-08T00:00:00Z"), std::nullopt};
    auto msgs = fetch_history(provider, limiter, seed, window, fast_policy(), true);
    REQUIRE(msgs.size() == 4);
    for (size_t i = 0; i < 4; ++i) CHECK(msgs[i].message_id == static_cast<int64_t>(i + 4));
    for (size_t i = 1; i < msgs.size(); ++i) CHECK(msgs[i - 1].date <= msgs[i].date);

    window.limit = 2;  // keeps the 2 most recent
    msgs = fetch_history(provider, limiter, seed, window, fast_policy(), true);
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].message_id == 6);
    CHECK(msgs[1].message_id == 7);

    CrawlWindow empty{0, 10, std::nullopt};
    CHECK(fetch_history(provider, limiter, seed, empty, fast_policy(), true).empty());
}

TEST_CASE("fetch_details from fixture") {
    ArchiveProvider provider(kFixtures + "/archive");
    RateLimiter limiter(1000);
    ChannelSeed seed;
    seed.user = "alpha";
    auto d = fetch_details(provider, limiter, seed, fast_policy(), true);
    CHECK(d.subscribers == 1200);
    CHECK(d.similar_channels.size() == 2);
    CHECK(d.url == "https://t.me/alpha");

    ChannelSeed gamma;
    gamma.user = "gamma";
    CHECK(fetch_details(provider, limiter, gamma, fast_policy(), true).similar_channels.empty());

    ChannelSeed unknown;
    unknown.user = "does_not_exist";
    CHECK_THROWS_AS(fetch_details(provider, limiter, unknown, fast_policy(), true),
                    ChannelNotFound);
}

TEST_CASE("process_channels writes sinks, append semantics, failure isolation") {
    ArchiveProvider provider(kFixtures + "/archive");
    RateLimiter limiter(1000);
    auto seeds = read_channels_from_csv(kFixtures + "/channels_sample.csv");
    CrawlWindow window{*parse_timestamp("2024-08-01T00:00:00Z"),
                       *parse_timestamp("2024-09-01T00:00:00Z"), std::nullopt};
    const std::string dir = temp_dir("process");
    CrawlSinks sinks{dir, dir + "/details.csv"};

    auto [report, results] = process_channels(provider, limiter, seeds, window, fast_policy(),
                                              sinks, false, true);
    CHECK(report.channels_processed == 3);
    CHECK(report.messages_fetched == 600);
    CHECK(report.failures.empty());
    CHECK(csv::read_file(dir + "/details.csv").rows.size() == 3);
    CHECK(fs::exists(dir + "/messages_101.jsonl"));

    auto [report2, results2] = process_channels(provider, limiter, seeds, window, fast_policy(),
                                                sinks, true, true);
    CHECK(csv::read_file(dir + "/details.csv").rows.size() == 6);

    // details CSV carries similar_channels as a JSON array cell
    auto details = csv::read_file(dir + "/details.csv");
    const int c_sim = details.column("similar_channels");
    REQUIRE(c_sim >= 0);
    auto sim = nlohmann::json::parse(details.rows[0][c_sim]);
    CHECK(sim.size() == 2);
    CHECK(sim[0].at("id") == 102);

    // one unknown channel does not abort the batch
    auto bad_seeds = seeds;
    ChannelSeed ghost;
    ghost.user = "ghost";
    bad_seeds.push_back(ghost);
    auto [report3, results3] = process_channels(provider, limiter, bad_seeds, window,
                                                fast_policy(), sinks, false, true);
    CHECK(report3.channels_processed == 3);
    REQUIRE(report3.failures.size() == 1);
    CHECK(report3.failures[0].channel == "ghost");
    CHECK(csv::read_file(dir + "/details.csv").rows.size() == 3);
}

namespace {

// independent BFS with per-round frontier dedup over the fixture graph
struct BfsResult {
    std::vector<int64_t> visited;
    int rounds = 0;
};

BfsResult bfs_oracle(const std::map<int64_t, std::vector<int64_t>>& graph, int64_t start,
                     int max_rounds) {
    BfsResult out;
    std::set<int64_t> seen{start};
    std::vector<int64_t> frontier{start};
    for (int r = 1; r <= max_rounds && !frontier.empty(); ++r) {
        out.rounds = r;
        std::vector<int64_t> next;
        for (int64_t c : frontier) {
            out.visited.push_back(c);
            auto it = graph.find(c);
            if (it == graph.end()) continue;
            for (int64_t t : it->second)
                if (seen.insert(t).second) next.push_back(t);
        }
        frontier = std::move(next);
    }
    return out;
}

const std::map<int64_t, std::vector<int64_t>> kGraph = {
    {1, {2, 3}}, {2, {4, 1}}, {3, {3, 5}}, {4, {6}}, {5, {6, 7}},
    {6, {}},     {7, {8}},    {8, {2}},    {9, {10}}, {10, {}}};

}  // namespace

TEST_CASE("snowball equals the BFS oracle on the fixture graph") {
    ArchiveProvider provider(kFixtures + "/snowball");
    RateLimiter limiter(1000);
    auto seeds = read_channels_from_csv(kFixtures + "/snowball_seed.csv");
    CrawlWindow window{*parse_timestamp("2024-08-01T00:00:00Z"),
                      *parse_timestamp("2024-09-01T00:00:00Z"), std::nullopt};
    const std::string dir = temp_dir("snowball");
    CrawlSinks sinks{dir, dir + "/details.csv"};

    auto [channels, report] =
        snowball(provider, limiter, seeds, 5, window, fast_policy(), sinks);
    auto want = bfs_oracle(kGraph, 1, 5);

    std::vector<int64_t> got;
    for (const auto& c : channels) got.push_back(*c.id);
    CHECK(got == want.visited);  // same set, same discovery order, no dups
    CHECK(report.rounds == want.rounds);
    CHECK(report.rounds == 5);
    CHECK(channels.size() == 8);  // 9 and 10 unreachable
    std::set<int64_t> uniq(got.begin(), got.end());
    CHECK(uniq.size() == got.size());

    // discovered channels carry the "not assigned" cluster label
    auto details = csv::read_file(dir + "/details.csv");
    const int c_cluster = details.column("cluster");
    CHECK(details.rows.size() == 8);
    CHECK(details.rows[0][c_cluster] == "seed");
    for (size_t i = 1; i < details.rows.size(); ++i)
        CHECK(details.rows[i][c_cluster] == "not assigned");
}

TEST_CASE("snowball round cap and cycle safety") {
    ArchiveProvider provider(kFixtures + "/snowball");
    RateLimiter limiter(1000);
    auto seeds = read_channels_from_csv(kFixtures + "/snowball_seed.csv");
    CrawlWindow window{0, 4102444800, std::nullopt};
    const std::string dir = temp_dir("snowball_cap");
    CrawlSinks sinks{dir, dir + "/details.csv"};

    auto [one_round, r1] = snowball(provider, limiter, seeds, 1, window, fast_policy(), sinks);
    CHECK(one_round.size() == 1);
    CHECK(r1.rounds == 1);

    // start inside the 2 -> 1 -> 2 cycle: every channel processed once
    std::vector<ChannelSeed> cyc(1);
    cyc[0].id = 2;
    cyc[0].user = "ch2";
    auto [cyc_channels, rc] = snowball(provider, limiter, cyc, 10, window, fast_policy(), sinks);
    std::set<int64_t> uniq;
    for (const auto& c : cyc_channels) CHECK(uniq.insert(*c.id).second);
}

namespace {

class RecordingProvider : public HistoryProvider {
public:
    std::vector<std::chrono::steady_clock::time_point> request_times;
    int flood_wait_after = -1;  // nth request answers 429 once
    int flood_retry_after_s = 2;
    bool flooded = false;

    ChannelDetails get_details(const std::string& key) override {
        note();
        ChannelDetails d;
        d.channel_id = std::stoll(key);
        d.username = "ch" + key;
        d.url = "https://t.me/ch" + key;
        return d;
    }

    HistoryPage get_messages(const std::string&, int64_t, int64_t, int64_t, int64_t) override {
        note();
        return {};
    }

private:
    void note() {
        request_times.push_back(std::chrono::steady_clock::now());
        if (flood_wait_after >= 0 &&
            static_cast<int>(request_times.size()) == flood_wait_after && !flooded) {
            flooded = true;
            throw FloodWait(flood_retry_after_s);
        }
    }
};

}  // namespace

TEST_CASE("rate limiter: no 1-second window exceeds the cap") {
    RecordingProvider provider;
    RateLimiter limiter(5.0);
    RateLimitPolicy policy;
    policy.max_requests_per_second = 5.0;
    CrawlWindow window{0, 4102444800, std::nullopt};
    std::vector<ChannelSeed> seeds(7);
    for (int i = 0; i < 7; ++i) seeds[i].id = i + 1;
    const std::string dir = temp_dir("rate");
    CrawlSinks sinks{dir, dir + "/details.csv"};
    process_channels(provider, limiter, seeds, window, policy, sinks, false, false);

    const auto& times = provider.request_times;
    REQUIRE(times.size() == 14);  // details + one history page per channel
    for (size_t i = 0; i < times.size(); ++i) {
        size_t in_window = 0;
        for (size_t j = 0; j < times.size(); ++j)
            if (times[j] >= times[i] &&
                times[j] < times[i] + std::chrono::seconds(1))
                ++in_window;
        CHECK(in_window <= 5);
    }
}

TEST_CASE("flood wait delays the retry by at least retry_after") {
    RecordingProvider provider;
    provider.flood_wait_after = 1;
    provider.flood_retry_after_s = 2;
    RateLimiter limiter(100);
    ChannelSeed seed;
    seed.id = 1;
    auto d = fetch_details(provider, limiter, seed, fast_policy(), false);
    CHECK(d.channel_id == 1);
    REQUIRE(provider.request_times.size() == 2);
    CHECK(provider.request_times[1] - provider.request_times[0] >= std::chrono::seconds(2));
}

TEST_CASE("flood wait surfaces once retries are exhausted") {
    class AlwaysFlooded : public HistoryProvider {
    public:
        int calls = 0;
        ChannelDetails get_details(const std::string&) override {
            ++calls;
            throw FloodWait(0);
        }
        HistoryPage get_messages(const std::string&, int64_t, int64_t, int64_t,
                                 int64_t) override {
            throw FloodWait(0);
        }
    };
    AlwaysFlooded provider;
    RateLimiter limiter(1000);
    RateLimitPolicy policy;
    policy.max_retries = 2;
    ChannelSeed seed;
    seed.id = 1;
    CHECK_THROWS_AS(fetch_details(provider, limiter, seed, policy, false), FloodWait);
    CHECK(provider.calls == 3);
}
