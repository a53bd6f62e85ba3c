#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tgpipe/archive_provider.hpp"
#include "tgpipe/cleaner.hpp"
#include "tgpipe/crawler.hpp"
#include "tgpipe/csv.hpp"
#include "tgpipe/http_provider.hpp"
#include "tgpipe/metrics.hpp"
#include "tgpipe/model.hpp"
#include "tgpipe/report.hpp"
#include "tgpipe/textprep.hpp"
#include "tgpipe/topics.hpp"

namespace tgpipe {

struct PipelineConfig {
    std::string api_id;    // opaque pass-through for a live-provider adapter
    std::string api_hash;  // idem
    int64_t start_date = 0;
    int64_t end_date = 0;
    std::string channels_file;
    std::string openai_key;
    std::string openai_endpoint;  // chat-completions URL; empty = offline descriptions
    std::string description;
    std::optional<int64_t> limit;
    bool capture_urls = true;
    bool capture_emojis = true;
    bool capture_mentions = true;
    int k_neighbors = 10;
    double viral_threshold = 3.0;
    double extractor_sample_ratio = 1.0;
    bool viewer_generate_viz = true;
    std::string provider = "archive";  // archive | http
    std::string provider_root;
    uint64_t seed = 0;
    std::string out_dir = "output";
    int snowball_rounds = 0;  // 0 = plain crawl
    std::string lexicon_file;
    std::string stopwords_file;
    std::string features;  // comma-separated retained fields, empty = all
    double rate_limit_rps = 1.0;
    int embedding_dim = 384;
    int reduced_dim = 5;
    double cluster_eps = 0.5;
    int cluster_min_points = 10;
    int min_topic_size = 10;
    int n_keywords = 10;
};

class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("stage " + stage + ": " + what), stage(std::move(stage)) {}
    std::string stage;
};

inline void log_line(const std::string& level, const std::string& kv) {
    const int64_t now = std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();
    std::cerr << format_rfc3339(now) << " " << level << " " << kv << "\n";
}

inline std::unique_ptr<HistoryProvider> make_provider(const PipelineConfig& cfg) {
    if (cfg.provider == "http") return std::make_unique<HttpProvider>(cfg.provider_root);
    return std::make_unique<ArchiveProvider>(cfg.provider_root);
}

inline FeatureList feature_list(const PipelineConfig& cfg) {
    if (cfg.features.empty()) return FeatureList::all();
    FeatureList fl;
    std::string cur;
    for (char c : cfg.features + ",") {
        if (c == ',') {
            if (!cur.empty()) fl.names.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return fl;
}

inline std::set<std::string> load_stopwords(const std::string& path) {
    std::set<std::string> out;
    if (path.empty()) return out;
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open stopwords file: " + path);
    std::string w;
    while (is >> w) out.insert(lower(w));
    return out;
}

// --- stages; each reads the previous stage's file and writes its own ---

inline CrawlReport crawl_stage(const PipelineConfig& cfg) {
    auto provider = make_provider(cfg);
    RateLimiter limiter(cfg.rate_limit_rps);
    RateLimitPolicy policy;
    policy.max_requests_per_second = cfg.rate_limit_rps;
    auto seeds = read_channels_from_csv(cfg.channels_file);
    CrawlWindow window{cfg.start_date, cfg.end_date, cfg.limit};
    CrawlSinks sinks{cfg.out_dir, cfg.out_dir + "/channels_list_details.csv"};
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (cfg.snowball_rounds > 0) {
        auto [channels, report] =
            snowball(*provider, limiter, seeds, cfg.snowball_rounds, window, policy, sinks);
        log_line("info", "stage=crawl rounds=" + std::to_string(report.rounds) +
                             " channels=" + std::to_string(report.channels_processed) +
                             " messages=" + std::to_string(report.messages_fetched));
        return report;
    }
    auto [report, results] = process_channels(*provider, limiter, seeds, window, policy, sinks,
                                              /*append=*/false, /*by_url=*/true);
    log_line("info", "stage=crawl channels=" + std::to_string(report.channels_processed) +
                         " messages=" + std::to_string(report.messages_fetched) +
                         " failures=" + std::to_string(report.failures.size()));
    return report;
}

inline std::vector<RawMessage> read_crawled_messages(const std::string& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("messages_", 0) == 0 && e.path().extension() == ".jsonl")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RawMessage> messages;
    for (const auto& f : files) {
        std::ifstream is(f);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            messages.push_back(parse_archive_line(line));
        }
    }
    return messages;
}

inline void clean_stage(const PipelineConfig& cfg) {
    auto messages = read_crawled_messages(cfg.out_dir);
    ExtractFlags flags{cfg.capture_urls, cfg.capture_emojis, cfg.capture_mentions};
    const FeatureList features = feature_list(cfg);
    auto records = flatten(messages, features, flags);
    csv::Table t;
    t.header = clean_csv_header(features);
    for (const auto& r : records) t.rows.push_back(clean_csv_row(r, features));
    csv::write_file(cfg.out_dir + "/messages_clean.csv", t);
    log_line("info", "stage=clean records=" + std::to_string(records.size()));
}

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline void metrics_stage(const PipelineConfig& cfg) {
    csv::Table t = csv::read_file(cfg.out_dir + "/messages_clean.csv");
    auto records = read_clean_csv(t);
    auto ms = compute_metrics(records, {cfg.k_neighbors, cfg.viral_threshold});
    t.header.insert(t.header.end(), {"virality_ratio", "is_viral", "engagement_rate"});
    for (size_t i = 0; i < t.rows.size(); ++i) {
        t.rows[i].push_back(fmt6(ms[i].virality_ratio));
        t.rows[i].push_back(ms[i].is_viral ? "true" : "false");
        t.rows[i].push_back(fmt6(ms[i].engagement_rate));
    }
    csv::write_file(cfg.out_dir + "/messages_metrics.csv", t);
    log_line("info", "stage=metrics records=" + std::to_string(t.rows.size()));
}

inline void nlp_stage(const PipelineConfig& cfg) {
    csv::Table t = csv::read_file(cfg.out_dir + "/messages_metrics.csv");
    SentimentLexicon lexicon;
    if (!cfg.lexicon_file.empty()) lexicon = load_lexicon(cfg.lexicon_file);
    const int c_text = t.column("text");
    if (c_text < 0) throw std::runtime_error("metrics CSV lacks text column");
    t.header.insert(t.header.end(), {"sentences_count", "polarity", "subjectivity"});
    for (auto& row : t.rows) {
        const auto a = annotate_text(row[c_text], lexicon);
        row.push_back(std::to_string(a.sentences.size()));
        row.push_back(fmt6(a.polarity));
        row.push_back(fmt6(a.subjectivity));
    }
    csv::write_file(cfg.out_dir + "/messages_nlp.csv", t);
    log_line("info", "stage=nlp records=" + std::to_string(t.rows.size()));
}

inline void topics_stage(const PipelineConfig& cfg) {
    csv::Table t = csv::read_file(cfg.out_dir + "/messages_nlp.csv");
    auto records = read_clean_csv(t);
    EmbeddingProviderConfig provider;
    provider.dim = cfg.embedding_dim;
    provider.seed = cfg.seed;
    TopicModelConfig mc;
    mc.sample_ratio = cfg.extractor_sample_ratio;
    mc.reduced_dim = cfg.reduced_dim;
    mc.cluster_eps = cfg.cluster_eps;
    mc.cluster_min_points = cfg.cluster_min_points;
    mc.min_topic_size = cfg.min_topic_size;
    mc.n_keywords = cfg.n_keywords;
    mc.seed = cfg.seed;
    auto stopwords = load_stopwords(cfg.stopwords_file);
    TopicModel model = train_topic_model(records, provider, mc, stopwords);
    std::vector<std::string> warnings;
    model.descriptions = describe_topics(
        model, cfg.openai_endpoint, cfg.openai_key,
        cfg.openai_endpoint.empty() ? LlmTransport{} : http_llm_transport, &warnings);
    for (const auto& w : warnings) log_line("warn", "stage=topics msg=\"" + w + "\"");
    save_model(model, cfg.out_dir + "/topic_model.bin");
    log_line("info", "stage=topics topics=" + std::to_string(model.topic_keywords.size()) +
                         " trained_docs=" + std::to_string(model.training_labels.size()));
}

inline void report_stage(const PipelineConfig& cfg, RunManifest manifest) {
    csv::Table t = csv::read_file(cfg.out_dir + "/messages_nlp.csv");
    auto records = read_clean_csv(t);
    TopicModel model = load_model(cfg.out_dir + "/topic_model.bin");
    auto topics = assign_topics(model, records);
    t.header.push_back("topic_id");
    for (size_t i = 0; i < t.rows.size(); ++i)
        t.rows[i].push_back(std::to_string(topics[i]));

    csv::Table channels;
    const std::string channels_csv = cfg.out_dir + "/channels_list_details.csv";
    if (std::filesystem::exists(channels_csv)) channels = csv::read_file(channels_csv);
    else channels.header = details_csv_header();

    manifest.outputs.push_back("topic_model.bin");
    auto written = write_outputs(t, topic_infos(model), channels, manifest, cfg.out_dir);
    if (cfg.viewer_generate_viz) {
        std::vector<VizRecord> viz;
        for (size_t i = 0; i < records.size(); ++i)
            viz.push_back({records[i].date, topics[i]});
        auto files = render_visualizations(model, viz, cfg.out_dir);
        written.insert(written.end(), files.begin(), files.end());
    }
    log_line("info", "stage=report files=" + std::to_string(written.size()));
}

inline nlohmann::json config_snapshot(const PipelineConfig& cfg) {
    // secrets are recorded as presence booleans only
    return {{"api_id_present", !cfg.api_id.empty()},
            {"api_hash_present", !cfg.api_hash.empty()},
            {"openai_key_present", !cfg.openai_key.empty()},
            {"start_date", format_rfc3339(cfg.start_date)},
            {"end_date", format_rfc3339(cfg.end_date)},
            {"channels_file", cfg.channels_file},
            {"description", cfg.description},
            {"limit", cfg.limit ? nlohmann::json(*cfg.limit) : nlohmann::json()},
            {"capture_urls", cfg.capture_urls},
            {"capture_emojis", cfg.capture_emojis},
            {"capture_mentions", cfg.capture_mentions},
            {"k_neighbors", cfg.k_neighbors},
            {"viral_threshold", cfg.viral_threshold},
            {"extractor_sample_ratio", cfg.extractor_sample_ratio},
            {"viewer_generate_viz", cfg.viewer_generate_viz},
            {"provider", cfg.provider},
            {"provider_root", cfg.provider_root},
            {"seed", cfg.seed},
            {"out_dir", cfg.out_dir},
            {"snowball_rounds", cfg.snowball_rounds},
            {"lexicon_file", cfg.lexicon_file},
            {"stopwords_file", cfg.stopwords_file}};
}

// crawl -> clean -> metrics -> nlp -> topics -> report; every stage writes
// its file before the next starts, the manifest is written last.
inline RunManifest run_pipeline(const PipelineConfig& cfg) {
    RunManifest manifest;
    manifest.description = cfg.description;
    manifest.started_at = std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count();
    manifest.config_snapshot = config_snapshot(cfg);
    if (!cfg.channels_file.empty())
        manifest.input_digests[cfg.channels_file] = file_digest(cfg.channels_file);

    struct Stage {
        const char* name;
        std::function<void()> run;
    };
    RunManifest* mp = &manifest;
    const std::vector<Stage> stages = {
        {"crawl", [&] { crawl_stage(cfg); }},
        {"clean", [&] { clean_stage(cfg); }},
        {"metrics", [&] { metrics_stage(cfg); }},
        {"nlp", [&] { nlp_stage(cfg); }},
        {"topics", [&] { topics_stage(cfg); }},
        {"report",
         [&] {
             mp->finished_at = std::chrono::duration_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count();
             report_stage(cfg, *mp);
         }},
    };
    for (const auto& stage : stages) {
        try {
            stage.run();
        } catch (const std::exception& e) {
            throw StageError(stage.name, e.what());
        }
    }
    manifest.finished_at = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();
    return manifest;
}

}  // namespace tgpipe
