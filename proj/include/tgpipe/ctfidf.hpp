#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgpipe {

class EmptyVocabulary : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Class-based TF-IDF over class-level pseudo-documents:
//   W(t,c) = tf(t,c) * log(1 + A / f(t))
// where tf(t,c) is the count of t in class c, f(t) the total count of t
// over all classes, and A the mean token count per class.
// classes[c] is the concatenated token multiset of class c; the returned
// matrix is classes x vocabulary.
inline std::vector<std::vector<double>> ctfidf_weights(
    const std::vector<std::vector<std::string>>& classes,
    const std::vector<std::string>& vocabulary) {
    if (vocabulary.empty()) throw EmptyVocabulary("ctfidf_weights: empty vocabulary");

    std::map<std::string, size_t> vocab_index;
    for (size_t j = 0; j < vocabulary.size(); ++j) vocab_index[vocabulary[j]] = j;

    const size_t n_classes = classes.size();
    std::vector<std::vector<double>> tf(n_classes,
                                        std::vector<double>(vocabulary.size(), 0.0));
    std::vector<double> f(vocabulary.size(), 0.0);
    double total_tokens = 0.0;
    for (size_t c = 0; c < n_classes; ++c) {
        total_tokens += static_cast<double>(classes[c].size());
        for (const auto& t : classes[c]) {
            auto it = vocab_index.find(t);
            if (it == vocab_index.end()) continue;
            tf[c][it->second] += 1.0;
            f[it->second] += 1.0;
        }
    }
    const double avg_tokens = n_classes ? total_tokens / static_cast<double>(n_classes) : 0.0;

    std::vector<std::vector<double>> w(n_classes,
                                       std::vector<double>(vocabulary.size(), 0.0));
    for (size_t c = 0; c < n_classes; ++c)
        for (size_t j = 0; j < vocabulary.size(); ++j)
            if (tf[c][j] > 0.0) w[c][j] = tf[c][j] * std::log(1.0 + avg_tokens / f[j]);
    return w;
}

// Top-k (term, weight) pairs of one weight row, weight descending, ties
// broken lexicographically by term. Zero-weight terms are skipped.
inline std::vector<std::pair<std::string, double>> top_keywords(
    const std::vector<double>& weights, const std::vector<std::string>& vocabulary,
    int k) {
    std::vector<size_t> idx;
    for (size_t j = 0; j < weights.size(); ++j)
        if (weights[j] > 0.0) idx.push_back(j);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        if (weights[a] != weights[b]) return weights[a] > weights[b];
        return vocabulary[a] < vocabulary[b];
    });
    if (idx.size() > static_cast<size_t>(k)) idx.resize(static_cast<size_t>(k));
    std::vector<std::pair<std::string, double>> out;
    out.reserve(idx.size());
    for (size_t j : idx) out.emplace_back(vocabulary[j], weights[j]);
    return out;
}

}  // namespace tgpipe
