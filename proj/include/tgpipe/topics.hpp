#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tgpipe/cleaner.hpp"
#include "tgpipe/ctfidf.hpp"
#include "tgpipe/dbscan.hpp"
#include "tgpipe/embedder.hpp"
#include "tgpipe/pca.hpp"

namespace tgpipe {

class TooFewDocuments : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TopicModelConfig {
    double sample_ratio = 1.0;  // (0, 1]
    int reduced_dim = 5;
    double cluster_eps = 0.5;
    int cluster_min_points = 10;
    int n_keywords = 10;
    uint64_t seed = 0;
    int min_topic_size = 10;
};

struct TopicModel {
    static constexpr int kFormatMajor = 1;
    static constexpr int kFormatMinor = 0;

    TopicModelConfig config;
    EmbeddingProviderConfig provider;
    std::set<std::string> stopwords;
    std::vector<std::string> vocabulary;  // sorted ascending
    Reduction reduction;
    // topic -> core points in reduced space (merged/outlier clusters excluded)
    std::map<int, std::vector<std::vector<double>>> core_points;
    // topic -> c-TF-IDF row over vocabulary; -1 included when outliers exist
    std::map<int, std::vector<double>> ctfidf;
    std::map<int, std::vector<std::pair<std::string, double>>> topic_keywords;
    std::map<int, int64_t> topic_sizes;  // includes -1; sums to training doc count
    std::map<int, std::vector<std::string>> representative_docs;  // up to 4 per topic
    std::map<int, std::string> descriptions;
    // (channel_id, message_id) of training docs -> assigned label
    std::map<std::pair<int64_t, int64_t>, int> training_labels;

    std::vector<int> topic_ids_with_outlier() const {
        std::vector<int> ids;
        for (const auto& [id, _] : topic_sizes) ids.push_back(id);
        std::sort(ids.begin(), ids.end());
        return ids;
    }
};

// Seeded uniform sample of m indices out of n, without replacement,
// returned ascending. Hand-rolled draw so the result is identical on
// every platform.
inline std::vector<size_t> sample_indices(size_t n, size_t m, uint64_t seed) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < m && i < n; ++i) {
        const size_t j = i + static_cast<size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(std::min(m, n));
    std::sort(idx.begin(), idx.end());
    return idx;
}

// embed -> reduce -> cluster -> merge small clusters into outliers ->
// c-TF-IDF -> keywords. Trains on a seeded ceil(n * sample_ratio) sample
// of the records with non-empty text.
inline TopicModel train_topic_model(const std::vector<CleanRecord>& records,
                                    const EmbeddingProviderConfig& provider,
                                    const TopicModelConfig& config,
                                    const std::set<std::string>& stopwords = {},
                                    EmbedTransport transport = {}) {
    std::vector<size_t> nonempty;
    for (size_t i = 0; i < records.size(); ++i)
        if (!records[i].text.empty()) nonempty.push_back(i);
    if (nonempty.size() < static_cast<size_t>(config.cluster_min_points))
        throw TooFewDocuments("train_topic_model: need at least " +
                              std::to_string(config.cluster_min_points) +
                              " non-empty documents, have " +
                              std::to_string(nonempty.size()));

    const size_t n = nonempty.size();
    const size_t m = static_cast<size_t>(
        std::ceil(static_cast<double>(n) * config.sample_ratio));
    std::vector<size_t> train_idx;
    for (size_t k : sample_indices(n, m, config.seed)) train_idx.push_back(nonempty[k]);

    std::vector<std::string> texts;
    texts.reserve(train_idx.size());
    for (size_t i : train_idx) texts.push_back(records[i].text);

    auto embedded = embed_texts(texts, provider, stopwords, transport);
    const int reduced_dim =
        std::min<int>(config.reduced_dim, static_cast<int>(std::min<size_t>(
                                              embedded.size(), embedded[0].size())));
    auto [points, reduction] = reduce_dims(embedded, reduced_dim);
    std::vector<int> labels =
        cluster_embeddings(points, config.cluster_eps, config.cluster_min_points);

    // merge clusters below the size floor into the outlier topic
    std::map<int, int64_t> sizes;
    for (int l : labels)
        if (l >= 0) ++sizes[l];
    for (int& l : labels)
        if (l >= 0 && sizes[l] < config.min_topic_size) l = -1;
    labels = renumber_by_size(labels);

    TopicModel model;
    model.config = config;
    model.provider = provider;
    model.stopwords = stopwords;

    std::set<std::string> vocab_set;
    std::vector<std::vector<std::string>> doc_tokens(texts.size());
    for (size_t i = 0; i < texts.size(); ++i) {
        doc_tokens[i] = topic_tokens(texts[i], stopwords);
        vocab_set.insert(doc_tokens[i].begin(), doc_tokens[i].end());
    }
    model.vocabulary.assign(vocab_set.begin(), vocab_set.end());
    model.reduction = std::move(reduction);

    int n_topics = 0;
    for (int l : labels) n_topics = std::max(n_topics, l + 1);
    for (size_t i = 0; i < labels.size(); ++i) ++model.topic_sizes[labels[i]];

    // core points per surviving topic
    {
        const double eps2 = config.cluster_eps * config.cluster_eps;
        for (size_t i = 0; i < points.size(); ++i) {
            if (labels[i] < 0) continue;
            size_t neighbor_count = 0;
            for (size_t j = 0; j < points.size(); ++j)
                if (detail::sq_dist(points[i], points[j]) <= eps2) ++neighbor_count;
            if (neighbor_count >= static_cast<size_t>(config.cluster_min_points))
                model.core_points[labels[i]].push_back(points[i]);
        }
    }

    // class pseudo-documents in topic order (-1 first when present)
    std::vector<int> class_ids;
    if (std::count(labels.begin(), labels.end(), -1)) class_ids.push_back(-1);
    for (int t = 0; t < n_topics; ++t) class_ids.push_back(t);

    if (!model.vocabulary.empty()) {
        std::vector<std::vector<std::string>> classes(class_ids.size());
        for (size_t i = 0; i < labels.size(); ++i) {
            const size_t c = static_cast<size_t>(
                std::find(class_ids.begin(), class_ids.end(), labels[i]) -
                class_ids.begin());
            auto& bucket = classes[c];
            bucket.insert(bucket.end(), doc_tokens[i].begin(), doc_tokens[i].end());
        }
        auto weights = ctfidf_weights(classes, model.vocabulary);
        for (size_t c = 0; c < class_ids.size(); ++c) {
            model.ctfidf[class_ids[c]] = weights[c];
            model.topic_keywords[class_ids[c]] =
                top_keywords(weights[c], model.vocabulary, config.n_keywords);
        }
    }

    // representative docs: nearest to the topic centroid in reduced space
    {
        std::map<int, std::vector<size_t>> members;
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] >= 0) members[labels[i]].push_back(i);
        for (const auto& [t, idx] : members) {
            std::vector<double> centroid(points[0].size(), 0.0);
            for (size_t i : idx)
                for (size_t d = 0; d < centroid.size(); ++d) centroid[d] += points[i][d];
            for (double& v : centroid) v /= static_cast<double>(idx.size());
            std::vector<size_t> order = idx;
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                const double da = detail::sq_dist(points[a], centroid);
                const double db = detail::sq_dist(points[b], centroid);
                if (da != db) return da < db;
                return a < b;
            });
            for (size_t k = 0; k < order.size() && k < 4; ++k)
                model.representative_docs[t].push_back(texts[order[k]]);
        }
    }

    for (size_t i = 0; i < train_idx.size(); ++i) {
        const CleanRecord& r = records[train_idx[i]];
        model.training_labels[{r.channel_id, r.message_id}] = labels[i];
    }
    return model;
}

// Nearest stored core point within eps wins; outside eps -> -1. Records
// seen during training keep their training label.
inline std::vector<int> assign_topics(const TopicModel& model,
                                      const std::vector<CleanRecord>& records,
                                      EmbedTransport transport = {}) {
    std::vector<int> out(records.size(), -1);
    std::vector<size_t> todo;
    std::vector<std::string> texts;
    for (size_t i = 0; i < records.size(); ++i) {
        auto it = model.training_labels.find({records[i].channel_id, records[i].message_id});
        if (it != model.training_labels.end()) {
            out[i] = it->second;
        } else {
            todo.push_back(i);
            texts.push_back(records[i].text);
        }
    }
    if (todo.empty()) return out;

    auto embedded = embed_texts(texts, model.provider, model.stopwords, transport);
    const double eps2 = model.config.cluster_eps * model.config.cluster_eps;
    for (size_t k = 0; k < todo.size(); ++k) {
        const auto p = project(model.reduction, embedded[k]);
        double best = eps2;
        int best_topic = -1;
        bool found = false;
        for (const auto& [topic, pts] : model.core_points) {
            for (const auto& q : pts) {
                const double d = detail::sq_dist(p, q);
                if (d > eps2) continue;
                if (!found || d < best) {
                    best = d;
                    best_topic = topic;
                    found = true;
                }
            }
        }
        out[todo[k]] = best_topic;
    }
    return out;
}

inline std::string offline_description(const std::vector<std::pair<std::string, double>>& keywords) {
    std::string s;
    for (const auto& [term, _] : keywords) {
        if (!s.empty()) s += ", ";
        s += term;
    }
    return s;
}

// Chat-completions hook; returns the description text or nullopt on failure.
using LlmTransport = std::function<std::optional<std::string>(
    const std::string& endpoint, const std::string& api_key, const std::string& system_prompt,
    const std::string& user_prompt)>;

// With an endpoint, one request per topic; on failure (or with no
// endpoint) falls back to the keyword join. The outlier topic is always
// "Outliers".
inline std::map<int, std::string> describe_topics(const TopicModel& model,
                                                  const std::string& llm_endpoint = "",
                                                  const std::string& api_key = "",
                                                  LlmTransport transport = {},
                                                  std::vector<std::string>* warnings = nullptr) {
    std::map<int, std::string> out;
    for (const auto& [topic, keywords] : model.topic_keywords) {
        if (topic == -1) {
            out[topic] = "Outliers";
            continue;
        }
        std::string desc;
        if (!llm_endpoint.empty() && transport) {
            std::string kw;
            for (const auto& [term, _] : keywords) {
                if (!kw.empty()) kw += ", ";
                kw += term;
            }
            std::string docs;
            if (auto it = model.representative_docs.find(topic);
                it != model.representative_docs.end())
                for (const auto& d : it->second) docs += d + "\n";
            auto resp = transport(
                llm_endpoint, api_key,
                "You label topics from keywords and sample documents with a short phrase.",
                "KEYWORDS: " + kw + "\nDOCS:\n" + docs);
            if (resp) {
                desc = *resp;
            } else if (warnings) {
                warnings->push_back("topic " + std::to_string(topic) +
                                    ": description endpoint unavailable, using keywords");
            }
        }
        if (desc.empty()) desc = offline_description(keywords);
        out[topic] = desc;
    }
    return out;
}

// --- model file (versioned JSON container) ---

inline nlohmann::json model_to_json(const TopicModel& m) {
    nlohmann::json j;
    j["format"] = "tgpipe-topic-model";
    j["version"] = {m.kFormatMajor, m.kFormatMinor};
    j["config"] = {{"sample_ratio", m.config.sample_ratio},
                   {"reduced_dim", m.config.reduced_dim},
                   {"cluster_eps", m.config.cluster_eps},
                   {"cluster_min_points", m.config.cluster_min_points},
                   {"n_keywords", m.config.n_keywords},
                   {"seed", m.config.seed},
                   {"min_topic_size", m.config.min_topic_size}};
    j["provider"] = {{"kind", EmbeddingProviderConfig::kind_name(m.provider.kind)},
                     {"dim", m.provider.dim},
                     {"endpoint", m.provider.endpoint},
                     {"seed", m.provider.seed}};
    j["stopwords"] = m.stopwords;
    j["vocabulary"] = m.vocabulary;
    j["mean"] = m.reduction.mean;
    j["basis"] = m.reduction.basis;
    auto keyed = [](const auto& map_in) {
        nlohmann::json o = nlohmann::json::object();
        for (const auto& [k, v] : map_in) o[std::to_string(k)] = v;
        return o;
    };
    j["core_points"] = keyed(m.core_points);
    j["ctfidf"] = keyed(m.ctfidf);
    {
        nlohmann::json o = nlohmann::json::object();
        for (const auto& [t, kws] : m.topic_keywords) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& [term, w] : kws) arr.push_back({{"term", term}, {"weight", w}});
            o[std::to_string(t)] = std::move(arr);
        }
        j["topic_keywords"] = std::move(o);
    }
    j["topic_sizes"] = keyed(m.topic_sizes);
    j["representative_docs"] = keyed(m.representative_docs);
    j["descriptions"] = keyed(m.descriptions);
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [key, label] : m.training_labels)
            arr.push_back({key.first, key.second, label});
        j["training_labels"] = std::move(arr);
    }
    return j;
}

inline TopicModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != "tgpipe-topic-model")
        throw ModelFormatError("not a topic model file");
    const auto version = j.at("version");
    if (version.at(0).get<int>() != TopicModel::kFormatMajor)
        throw ModelFormatError("unsupported model format major version");

    TopicModel m;
    const auto& c = j.at("config");
    m.config.sample_ratio = c.at("sample_ratio").get<double>();
    m.config.reduced_dim = c.at("reduced_dim").get<int>();
    m.config.cluster_eps = c.at("cluster_eps").get<double>();
    m.config.cluster_min_points = c.at("cluster_min_points").get<int>();
    m.config.n_keywords = c.at("n_keywords").get<int>();
    m.config.seed = c.at("seed").get<uint64_t>();
    m.config.min_topic_size = c.at("min_topic_size").get<int>();
    const auto& p = j.at("provider");
    m.provider.kind = p.at("kind").get<std::string>() == "remote"
                          ? EmbeddingProviderConfig::Kind::remote
                          : EmbeddingProviderConfig::Kind::hashed;
    m.provider.dim = p.at("dim").get<int>();
    m.provider.endpoint = p.at("endpoint").get<std::string>();
    m.provider.seed = p.at("seed").get<uint64_t>();
    m.stopwords = j.at("stopwords").get<std::set<std::string>>();
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    m.reduction.mean = j.at("mean").get<std::vector<double>>();
    m.reduction.basis = j.at("basis").get<std::vector<std::vector<double>>>();
    for (const auto& [k, v] : j.at("core_points").items())
        m.core_points[std::stoi(k)] = v.get<std::vector<std::vector<double>>>();
    for (const auto& [k, v] : j.at("ctfidf").items())
        m.ctfidf[std::stoi(k)] = v.get<std::vector<double>>();
    for (const auto& [k, v] : j.at("topic_keywords").items()) {
        auto& kws = m.topic_keywords[std::stoi(k)];
        for (const auto& e : v)
            kws.emplace_back(e.at("term").get<std::string>(), e.at("weight").get<double>());
    }
    for (const auto& [k, v] : j.at("topic_sizes").items())
        m.topic_sizes[std::stoi(k)] = v.get<int64_t>();
    for (const auto& [k, v] : j.at("representative_docs").items())
        m.representative_docs[std::stoi(k)] = v.get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("descriptions").items())
        m.descriptions[std::stoi(k)] = v.get<std::string>();
    for (const auto& e : j.at("training_labels"))
        m.training_labels[{e.at(0).get<int64_t>(), e.at(1).get<int64_t>()}] =
            e.at(2).get<int>();
    return m;
}

inline void save_model(const TopicModel& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write model file: " + path);
    os << model_to_json(m).dump();
}

inline TopicModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(std::string("corrupt model file: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace tgpipe
