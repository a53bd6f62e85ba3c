#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgpipe/cleaner.hpp"
#include "tgpipe/unicode.hpp"

namespace tgpipe {

class RemoteUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyTextList : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EmbeddingProviderConfig {
    enum class Kind { hashed, remote };
    Kind kind = Kind::hashed;
    int dim = 384;
    std::string endpoint;  // remote only
    uint64_t seed = 0;     // hashed only

    static const char* kind_name(Kind k) {
        return k == Kind::hashed ? "hashed" : "remote";
    }
};

inline uint64_t fnv1a64(std::string_view s, uint64_t seed = 0) {
    uint64_t h = 14695981039346656037ULL ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Topic-vocabulary tokenizer: Unicode words, lowercased, length >= 2 code
// points, minus stopwords; URL and @mention spans are masked out first so
// they stay in Elements rather than the vocabulary.
inline std::vector<std::string> topic_tokens(std::string_view text,
                                             const std::set<std::string>& stopwords = {}) {
    std::string masked(text);
    for (const auto& span : detail::find_url_spans(masked))
        for (size_t i = span.begin; i < span.end; ++i) masked[i] = ' ';
    for (size_t i = 0; i < masked.size(); ++i) {
        if (masked[i] != '@') continue;
        if (i > 0 && is_word_cp(static_cast<unsigned char>(masked[i - 1]))) continue;
        size_t j = i + 1;
        while (j < masked.size() &&
               (std::isalnum(static_cast<unsigned char>(masked[j])) || masked[j] == '_'))
            ++j;
        if (j - i - 1 >= 3 && j - i - 1 <= 32)
            for (size_t k = i; k < j; ++k) masked[k] = ' ';
        i = j - 1;
    }

    std::vector<std::string> out;
    for (auto& tok : word_tokens(masked)) {
        size_t cp_len = 0;
        for (size_t i = 0; i < tok.size(); ++cp_len) decode_utf8(tok, i);
        if (cp_len < 2) continue;
        if (stopwords.count(tok)) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

inline void l2_normalize(std::vector<double>& v) {
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 <= 0.0) {
        if (!v.empty()) v[0] = 1.0;  // canonical unit vector for empty content
        return;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
}

// Deterministic bag-of-tokens embedding: token hash picks a bucket, hash
// bit 63 picks the sign, counts accumulate, rows are L2-normalized.
inline std::vector<double> hashed_embedding(std::string_view text, int dim, uint64_t seed,
                                            const std::set<std::string>& stopwords = {}) {
    std::vector<double> v(static_cast<size_t>(dim), 0.0);
    for (const auto& tok : topic_tokens(text, stopwords)) {
        const uint64_t h = fnv1a64(tok, seed);
        const size_t bucket = h % static_cast<uint64_t>(dim);
        v[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
    l2_normalize(v);
    return v;
}

// HTTP hook for the remote protocol: POST /embed {"texts":[...]} ->
// {"vectors":[[...]]}. Injected so tests can fake the transport; the real
// one lives in http_client.hpp.
using EmbedTransport = std::function<std::optional<nlohmann::json>(const std::string& endpoint,
                                                                   const nlohmann::json& body)>;

inline std::vector<std::vector<double>> embed_texts(
    const std::vector<std::string>& texts, const EmbeddingProviderConfig& provider,
    const std::set<std::string>& stopwords = {}, EmbedTransport transport = {},
    int max_retries = 3) {
    if (texts.empty()) throw EmptyTextList("embed_texts: no texts");
    std::vector<std::vector<double>> rows;
    rows.reserve(texts.size());
    if (provider.kind == EmbeddingProviderConfig::Kind::hashed) {
        for (const auto& t : texts)
            rows.push_back(hashed_embedding(t, provider.dim, provider.seed, stopwords));
        return rows;
    }
    if (!transport)
        throw RemoteUnavailable("remote embedding requested but no transport configured");
    nlohmann::json body{{"texts", texts}};
    std::optional<nlohmann::json> resp;
    for (int attempt = 0; attempt <= max_retries && !resp; ++attempt)
        resp = transport(provider.endpoint, body);
    if (!resp) throw RemoteUnavailable("embedding endpoint unreachable: " + provider.endpoint);
    for (const auto& vec : resp->at("vectors")) {
        std::vector<double> v = vec.get<std::vector<double>>();
        v.resize(static_cast<size_t>(provider.dim), 0.0);
        l2_normalize(v);
        rows.push_back(std::move(v));
    }
    if (rows.size() != texts.size())
        throw RemoteUnavailable("embedding endpoint returned wrong row count");
    return rows;
}

}  // namespace tgpipe
