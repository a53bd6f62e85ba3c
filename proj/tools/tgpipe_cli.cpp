#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tgpipe/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCrawl = 3;
constexpr int kExitProcessing = 4;
constexpr int kExitOutput = 5;

struct RawDates {
    std::string start;
    std::string end;
};

void add_common_options(CLI::App& app, tgpipe::PipelineConfig& cfg, RawDates& dates) {
    app.add_option("--api_id", cfg.api_id, "Telegram API id (pass-through)")
        ->envname("TG_API_ID");
    app.add_option("--api_hash", cfg.api_hash, "Telegram API hash (pass-through)")
        ->envname("TG_API_HASH");
    app.add_option("--start_date,--start-date", dates.start, "Crawl window start (RFC-3339)");
    app.add_option("--end_date,--end-date", dates.end, "Crawl window end (RFC-3339)");
    app.add_option("--channels_file,--channels-file", cfg.channels_file,
                   "CSV with the channels to crawl");
    app.add_option("--openai_key", cfg.openai_key, "Key for topic descriptions")
        ->envname("OPENAI_API_KEY");
    app.add_option("--openai_endpoint", cfg.openai_endpoint,
                   "Chat-completions URL; empty keeps descriptions offline");
    app.add_option("--description", cfg.description, "Run description stored in the manifest");
    app.add_option_function<long long>(
           "--limit", [&cfg](const long long& v) { cfg.limit = v; },
           "Max messages per channel")
        ->check(CLI::PositiveNumber);
    app.add_option("--capture_urls", cfg.capture_urls, "Extract URLs (default true)");
    app.add_option("--capture_emojis", cfg.capture_emojis, "Extract emojis (default true)");
    app.add_option("--capture_mentions", cfg.capture_mentions, "Extract mentions (default true)");
    app.add_option("--k_neighbors", cfg.k_neighbors, "Neighbors for the virality ratio")
        ->check(CLI::PositiveNumber);
    app.add_option("--viral_threshold", cfg.viral_threshold, "Virality threshold")
        ->check(CLI::PositiveNumber);
    app.add_option("--extractor_sample_ratio", cfg.extractor_sample_ratio,
                   "Fraction of messages used to train the topic model, in (0,1]")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
    app.add_option("--viewer_generate_viz", cfg.viewer_generate_viz,
                   "Emit HTML visualizations (default true)");
    app.add_option("--provider", cfg.provider, "Channel source: archive or http")
        ->check(CLI::IsMember({"archive", "http"}));
    app.add_option("--provider_root,--provider-root", cfg.provider_root,
                   "Archive directory or provider base URL");
    app.add_option("--seed", cfg.seed, "Seed for sampling and the hashed embedder");
    app.add_option("--out_dir", cfg.out_dir, "Output directory");
    app.add_option("--snowball_rounds,--snowball-rounds", cfg.snowball_rounds,
                   "Snowball expansion rounds (0 = plain crawl)");
    app.add_option("--lexicon_file", cfg.lexicon_file, "Sentiment lexicon TSV");
    app.add_option("--stopwords_file", cfg.stopwords_file, "Stopword list for topic vocabulary");
    app.add_option("--features", cfg.features, "Comma-separated message fields to retain");
    app.add_option("--rate_limit", cfg.rate_limit_rps, "Max provider requests per second")
        ->check(CLI::PositiveNumber);
    app.add_option("--embedding_dim", cfg.embedding_dim, "Embedding dimension")
        ->check(CLI::PositiveNumber);
    app.add_option("--reduced_dim", cfg.reduced_dim, "Reduced dimension for clustering")
        ->check(CLI::PositiveNumber);
    app.add_option("--cluster_eps", cfg.cluster_eps, "DBSCAN eps")->check(CLI::PositiveNumber);
    app.add_option("--cluster_min_points", cfg.cluster_min_points, "DBSCAN min points")
        ->check(CLI::PositiveNumber);
    app.add_option("--min_topic_size", cfg.min_topic_size,
                   "Clusters below this size become outliers")
        ->check(CLI::PositiveNumber);
    app.add_option("--n_keywords", cfg.n_keywords, "Keywords per topic")
        ->check(CLI::PositiveNumber);
}

int resolve_dates(const RawDates& dates, tgpipe::PipelineConfig& cfg, bool required) {
    if (dates.start.empty() && dates.end.empty() && !required) return kExitOk;
    auto start = tgpipe::parse_timestamp(dates.start);
    auto end = tgpipe::parse_timestamp(dates.end);
    if (!start || !end) {
        std::cerr << "error: --start_date and --end_date must be RFC-3339 timestamps\n";
        return kExitUsage;
    }
    if (*start >= *end) {
        std::cerr << "error: start_date must be before end_date\n";
        return kExitUsage;
    }
    cfg.start_date = *start;
    cfg.end_date = *end;
    return kExitOk;
}

int stage_exit_code(const std::string& stage) {
    if (stage == "crawl") return kExitCrawl;
    if (stage == "report") return kExitOutput;
    return kExitProcessing;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Channel message pipeline: crawl, clean, score, topic-model, report"};
    app.require_subcommand(0, 1);

    tgpipe::PipelineConfig cfg;
    RawDates dates;
    add_common_options(app, cfg, dates);

    CLI::App* sub_run = app.add_subcommand("run", "Run the full pipeline");
    CLI::App* sub_crawl = app.add_subcommand("crawl", "Fetch channel histories and details");
    CLI::App* sub_clean = app.add_subcommand("clean", "Flatten messages and extract elements");
    CLI::App* sub_metrics = app.add_subcommand("metrics", "Compute engagement metrics");
    CLI::App* sub_nlp = app.add_subcommand("nlp", "Sentence and sentiment annotation");
    CLI::App* sub_topics = app.add_subcommand("topics", "Train the topic model");
    CLI::App* sub_report = app.add_subcommand("report", "Write final outputs and charts");
    // options live on the parent app; subcommands forward what they don't know
    for (CLI::App* sub : {sub_run, sub_crawl, sub_clean, sub_metrics, sub_nlp, sub_topics,
                          sub_report})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    const bool full_run = app.get_subcommands().empty() || sub_run->parsed();
    const bool needs_dates = full_run || sub_crawl->parsed();
    if (int rc = resolve_dates(dates, cfg, needs_dates); rc != kExitOk) return rc;

    try {
        if (full_run) {
            tgpipe::run_pipeline(cfg);
            return kExitOk;
        }
        if (sub_crawl->parsed()) tgpipe::crawl_stage(cfg);
        else if (sub_clean->parsed()) tgpipe::clean_stage(cfg);
        else if (sub_metrics->parsed()) tgpipe::metrics_stage(cfg);
        else if (sub_nlp->parsed()) tgpipe::nlp_stage(cfg);
        else if (sub_topics->parsed()) tgpipe::topics_stage(cfg);
        else if (sub_report->parsed()) {
            tgpipe::RunManifest manifest;
            manifest.description = cfg.description;
            manifest.started_at = manifest.finished_at =
                std::chrono::duration_cast<std::chrono::seconds>(
                    std::chrono::system_clock::now().time_since_epoch())
                    .count();
            manifest.config_snapshot = tgpipe::config_snapshot(cfg);
            tgpipe::report_stage(cfg, manifest);
        }
        return kExitOk;
    } catch (const tgpipe::StageError& e) {
        tgpipe::log_line("error", std::string("stage=") + e.stage + " msg=\"" + e.what() + "\"");
        return stage_exit_code(e.stage);
    } catch (const std::exception& e) {
        const std::string stage = sub_crawl->parsed() ? "crawl"
                                  : sub_report->parsed() ? "report"
                                                         : "processing";
        tgpipe::log_line("error", "stage=" + stage + " msg=\"" + std::string(e.what()) + "\"");
        return stage_exit_code(stage);
    }
}
