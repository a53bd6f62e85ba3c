#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgpipe/crawler.hpp"
#include "tgpipe/csv.hpp"
#include "tgpipe/embedder.hpp"
#include "tgpipe/time_util.hpp"
#include "tgpipe/topics.hpp"

namespace tgpipe {

struct RunManifest {
    std::string description;
    int64_t started_at = 0;
    int64_t finished_at = 0;
    nlohmann::json config_snapshot;
    std::map<std::string, std::string> input_digests;
    std::vector<std::string> outputs;
};

inline std::string file_digest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return "";
    uint64_t h = 14695981039346656037ULL;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount()) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + hex;
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    return {{"description", m.description},
            {"started_at", format_rfc3339(m.started_at)},
            {"finished_at", format_rfc3339(m.finished_at)},
            {"config", m.config_snapshot},
            {"input_digests", m.input_digests},
            {"outputs", m.outputs}};
}

struct TopicInfo {
    int topic_id = -1;
    int64_t size = 0;
    std::vector<std::pair<std::string, double>> keywords;
    std::string description;
};

inline std::vector<TopicInfo> topic_infos(const TopicModel& model) {
    std::vector<TopicInfo> infos;
    for (int id : model.topic_ids_with_outlier()) {
        TopicInfo info;
        info.topic_id = id;
        info.size = model.topic_sizes.at(id);
        if (auto it = model.topic_keywords.find(id); it != model.topic_keywords.end())
            info.keywords = it->second;
        if (auto it = model.descriptions.find(id); it != model.descriptions.end())
            info.description = it->second;
        else if (id == -1)
            info.description = "Outliers";
        infos.push_back(std::move(info));
    }
    return infos;
}

// "term:weight" pairs joined by ';', weights with 4 decimals.
inline std::string keywords_cell(const std::vector<std::pair<std::string, double>>& kws) {
    std::string s;
    for (const auto& [term, w] : kws) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", w);
        if (!s.empty()) s += ';';
        s += term;
        s += ':';
        s += buf;
    }
    return s;
}

namespace detail {

inline void require_writable_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::string probe = out_dir + "/.write_probe";
    std::ofstream os(probe);
    if (!os) throw SinkUnwritable("output directory not writable: " + out_dir);
    os.close();
    std::filesystem::remove(probe, ec);
}

}  // namespace detail

// Writes messages_annotated.csv, topic_info.csv, channels_list_details.csv
// and manifest.json (RFC-4180, UTF-8, header row each).
inline std::vector<std::string> write_outputs(const csv::Table& annotated,
                                              const std::vector<TopicInfo>& topics,
                                              const csv::Table& channels, RunManifest manifest,
                                              const std::string& out_dir) {
    detail::require_writable_dir(out_dir);
    std::vector<std::string> written;

    csv::write_file(out_dir + "/messages_annotated.csv", annotated);
    written.push_back("messages_annotated.csv");

    csv::Table tinfo;
    tinfo.header = {"topic_id", "size", "keywords", "description"};
    for (const auto& t : topics)
        tinfo.rows.push_back({std::to_string(t.topic_id), std::to_string(t.size),
                              keywords_cell(t.keywords), t.description});
    csv::write_file(out_dir + "/topic_info.csv", tinfo);
    written.push_back("topic_info.csv");

    csv::write_file(out_dir + "/channels_list_details.csv", channels);
    written.push_back("channels_list_details.csv");

    manifest.outputs.insert(manifest.outputs.end(), written.begin(), written.end());
    std::sort(manifest.outputs.begin(), manifest.outputs.end());
    manifest.outputs.erase(std::unique(manifest.outputs.begin(), manifest.outputs.end()),
                           manifest.outputs.end());
    std::ofstream os(out_dir + "/manifest.json", std::ios::binary | std::ios::trunc);
    if (!os) throw SinkUnwritable("cannot write manifest.json");
    os << manifest_to_json(manifest).dump(2) << "\n";
    written.push_back("manifest.json");
    return written;
}

// --- visualizations: self-contained HTML, inline SVG, embedded JSON data ---

namespace detail {

inline std::string html_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string html_page(const std::string& title, const nlohmann::json& data,
                             const std::string& svg) {
    std::string page = "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>";
    page += html_escape(title);
    page += "</title>\n<style>body{font-family:sans-serif;margin:2em}svg{background:#fff}</style>\n";
    page += "</head>\n<body>\n<h1>";
    page += html_escape(title);
    page += "</h1>\n";
    page += svg;
    page += "\n<script type=\"application/json\" id=\"chart-data\">\n";
    std::string dumped = data.dump(2);
    // keep the JSON block safe inside <script>
    size_t pos = 0;
    while ((pos = dumped.find("</", pos)) != std::string::npos) {
        dumped.replace(pos, 2, "<\\/");
        pos += 3;
    }
    page += dumped;
    page += "\n</script>\n</body>\n</html>\n";
    return page;
}

inline const char* topic_color(int i) {
    static const char* palette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ab"};
    return palette[i % 10];
}

inline double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0 || nb <= 0) return 1.0;
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

struct DendrogramMerge {
    int left;  // node id: 0..T-1 leaves (position in `topics`), then T+k internal
    int right;
    double distance;
};

// Agglomerative average linkage on cosine distance between topic c-TF-IDF
// rows. Ties merge the pair with the lower topic ids first.
inline std::vector<DendrogramMerge> topic_dendrogram(const TopicModel& model,
                                                     std::vector<int>& leaf_topics) {
    leaf_topics.clear();
    for (const auto& [id, _] : model.ctfidf)
        if (id >= 0) leaf_topics.push_back(id);
    std::sort(leaf_topics.begin(), leaf_topics.end());
    const int t = static_cast<int>(leaf_topics.size());
    std::vector<DendrogramMerge> merges;
    if (t <= 1) return merges;

    struct Cluster {
        int node;
        std::vector<int> members;  // leaf positions
        int min_topic;
    };
    std::vector<Cluster> clusters;
    for (int i = 0; i < t; ++i) clusters.push_back({i, {i}, leaf_topics[i]});

    std::vector<std::vector<double>> leaf_dist(t, std::vector<double>(t, 0.0));
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j)
            leaf_dist[i][j] = detail::cosine_distance(model.ctfidf.at(leaf_topics[i]),
                                                      model.ctfidf.at(leaf_topics[j]));

    int next_node = t;
    while (clusters.size() > 1) {
        size_t bi = 0, bj = 1;
        double best = -1;
        for (size_t i = 0; i < clusters.size(); ++i)
            for (size_t j = i + 1; j < clusters.size(); ++j) {
                double sum = 0;
                for (int a : clusters[i].members)
                    for (int b : clusters[j].members) sum += leaf_dist[a][b];
                const double d = sum / static_cast<double>(clusters[i].members.size() *
                                                           clusters[j].members.size());
                const bool better =
                    best < 0 || d < best ||
                    (d == best &&
                     std::min(clusters[i].min_topic, clusters[j].min_topic) <
                         std::min(clusters[bi].min_topic, clusters[bj].min_topic));
                if (better) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        Cluster merged;
        merged.node = next_node++;
        merged.members = clusters[bi].members;
        merged.members.insert(merged.members.end(), clusters[bj].members.begin(),
                              clusters[bj].members.end());
        merged.min_topic = std::min(clusters[bi].min_topic, clusters[bj].min_topic);
        merges.push_back({clusters[bi].node, clusters[bj].node, best});
        clusters.erase(clusters.begin() + static_cast<long>(bj));
        clusters.erase(clusters.begin() + static_cast<long>(bi));
        clusters.push_back(std::move(merged));
    }
    return merges;
}

// Per-record inputs the charts need.
struct VizRecord {
    int64_t date = 0;
    int topic_id = -1;
};

inline std::vector<std::string> render_visualizations(const TopicModel& model,
                                                      const std::vector<VizRecord>& records,
                                                      const std::string& out_dir) {
    detail::require_writable_dir(out_dir);
    std::vector<std::string> written;

    // (a) topics over time: per-topic message counts in daily UTC bins
    {
        std::set<std::string> day_set;
        std::map<int, std::map<std::string, int64_t>> counts;
        for (const auto& r : records) {
            const std::string day = format_date(r.date);
            day_set.insert(day);
            ++counts[r.topic_id][day];
        }
        std::vector<std::string> days(day_set.begin(), day_set.end());
        nlohmann::json data;
        data["days"] = days;
        nlohmann::json series = nlohmann::json::array();
        for (const auto& [topic, per_day] : counts) {
            nlohmann::json s;
            s["topic_id"] = topic;
            std::vector<int64_t> vals;
            for (const auto& d : days) {
                auto it = per_day.find(d);
                vals.push_back(it == per_day.end() ? 0 : it->second);
            }
            s["counts"] = vals;
            series.push_back(std::move(s));
        }
        data["series"] = series;

        const double w = 800, h = 400, pad = 50;
        int64_t maxc = 1;
        for (const auto& [_, per_day] : counts)
            for (const auto& [_d, c] : per_day) maxc = std::max(maxc, c);
        std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\">";
        int si = 0;
        for (const auto& s : series) {
            std::string pts;
            const auto& vals = s.at("counts");
            for (size_t i = 0; i < days.size(); ++i) {
                const double x =
                    pad + (days.size() > 1
                               ? (w - 2 * pad) * static_cast<double>(i) /
                                     static_cast<double>(days.size() - 1)
                               : (w - 2 * pad) / 2);
                const double y =
                    h - pad - (h - 2 * pad) * static_cast<double>(vals[i].get<int64_t>()) /
                                  static_cast<double>(maxc);
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", x, y);
                pts += buf;
            }
            svg += "<polyline fill=\"none\" stroke=\"";
            svg += detail::topic_color(si++);
            svg += "\" stroke-width=\"2\" points=\"" + pts + "\"/>";
        }
        svg += "</svg>";
        std::ofstream os(out_dir + "/viz_topics_over_time.html",
                         std::ios::binary | std::ios::trunc);
        if (!os) throw SinkUnwritable("cannot write viz_topics_over_time.html");
        os << detail::html_page("Topics over time", data, svg);
        written.push_back("viz_topics_over_time.html");
    }

    // (b) topic similarity dendrogram
    {
        std::vector<int> leaves;
        auto merges = topic_dendrogram(model, leaves);
        nlohmann::json data;
        data["leaf_topics"] = leaves;
        nlohmann::json jm = nlohmann::json::array();
        for (const auto& m : merges)
            jm.push_back({{"left", m.left}, {"right", m.right}, {"distance", m.distance}});
        data["merges"] = jm;

        const int t = static_cast<int>(leaves.size());
        const double h = std::max(100.0, 40.0 * t + 40.0), w = 800, pad = 60;
        double max_d = 1e-12;
        for (const auto& m : merges) max_d = std::max(max_d, m.distance);
        // node -> (x, y)
        std::map<int, std::pair<double, double>> pos;
        for (int i = 0; i < t; ++i)
            pos[i] = {pad, 40.0 + 40.0 * i};
        std::string svg_body;
        for (size_t k = 0; k < merges.size(); ++k) {
            const auto& m = merges[k];
            const auto [lx, ly] = pos[m.left];
            const auto [rx, ry] = pos[m.right];
            const double x = pad + (w - 2 * pad) * (m.distance / max_d);
            const double y = (ly + ry) / 2;
            char buf[256];
            std::snprintf(buf, sizeof(buf),
                          "<path fill=\"none\" stroke=\"#444\" d=\"M %.1f %.1f H %.1f V %.1f H "
                          "%.1f\"/>",
                          lx, ly, x, ry, rx);
            svg_body += buf;
            pos[t + static_cast<int>(k)] = {x, y};
        }
        for (int i = 0; i < t; ++i) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">T%d</text>",
                          pad - 6, 40.0 + 40.0 * i + 4, leaves[i]);
            svg_body += buf;
        }
        char head[128];
        std::snprintf(head, sizeof(head),
                      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">",
                      w, h);
        std::ofstream os(out_dir + "/viz_hierarchy.html", std::ios::binary | std::ios::trunc);
        if (!os) throw SinkUnwritable("cannot write viz_hierarchy.html");
        os << detail::html_page("Topic hierarchy", data, std::string(head) + svg_body + "</svg>");
        written.push_back("viz_hierarchy.html");
    }

    // (c) keyword bars: top keywords per topic, weights as in topic_info.csv
    {
        nlohmann::json data = nlohmann::json::array();
        std::string svg_all;
        for (const auto& [topic, kws] : model.topic_keywords) {
            if (topic < 0) continue;
            nlohmann::json jt;
            jt["topic_id"] = topic;
            jt["keywords"] = keywords_cell(kws);
            data.push_back(jt);

            double max_w = 1e-12;
            for (const auto& [_, wgt] : kws) max_w = std::max(max_w, wgt);
            const double bar_h = 18, label_w = 140, chart_w = 420;
            const double h = bar_h * kws.size() + 40;
            char buf[256];
            std::snprintf(buf, sizeof(buf),
                          "<h2>Topic %d</h2><svg xmlns=\"http://www.w3.org/2000/svg\" "
                          "width=\"600\" height=\"%.0f\">",
                          topic, h);
            svg_all += buf;
            for (size_t i = 0; i < kws.size(); ++i) {
                const double y = 10 + bar_h * i;
                const double bw = chart_w * kws[i].second / max_w;
                std::snprintf(buf, sizeof(buf),
                              "<text x=\"%.0f\" y=\"%.1f\" font-size=\"12\" "
                              "text-anchor=\"end\">%s</text>",
                              label_w - 6, y + 13, detail::html_escape(kws[i].first).c_str());
                svg_all += buf;
                std::snprintf(buf, sizeof(buf),
                              "<rect x=\"%.0f\" y=\"%.1f\" width=\"%.1f\" height=\"%.0f\" "
                              "fill=\"%s\"/>",
                              label_w, y, bw, bar_h - 4, detail::topic_color(topic));
                svg_all += buf;
            }
            svg_all += "</svg>";
        }
        std::ofstream os(out_dir + "/viz_keywords.html", std::ios::binary | std::ios::trunc);
        if (!os) throw SinkUnwritable("cannot write viz_keywords.html");
        os << detail::html_page("Topic keywords", data, svg_all);
        written.push_back("viz_keywords.html");
    }
    return written;
}

}  // namespace tgpipe
