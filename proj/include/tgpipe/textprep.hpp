#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tgpipe/unicode.hpp"

namespace tgpipe {

struct LexiconEntry {
    double polarity = 0.0;      // [-1, 1]
    double subjectivity = 0.0;  // [0, 1]
};

struct SentimentLexicon {
    std::map<std::string, LexiconEntry> entries;  // lowercase term -> scores
    std::set<std::string> negators;
    int negation_window = 3;
};

// TSV: term<TAB>polarity<TAB>subjectivity, with an optional
// "#negators: a b c" header line. '#' lines are comments.
inline SentimentLexicon load_lexicon(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open lexicon file: " + path);
    SentimentLexicon lex;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("#negators:", 0) == 0) {
                std::istringstream ss(line.substr(10));
                std::string w;
                while (ss >> w) lex.negators.insert(lower(w));
            }
            continue;
        }
        std::istringstream ss(line);
        std::string term, pol, subj;
        if (!std::getline(ss, term, '\t') || !std::getline(ss, pol, '\t') ||
            !std::getline(ss, subj))
            throw std::runtime_error("bad lexicon line: " + line);
        LexiconEntry e{std::stod(pol), std::stod(subj)};
        if (e.polarity < -1.0 || e.polarity > 1.0 || e.subjectivity < 0.0 ||
            e.subjectivity > 1.0)
            throw std::runtime_error("lexicon value out of range: " + line);
        lex.entries[lower(term)] = e;
    }
    return lex;
}

inline const std::set<std::string>& default_abbreviations() {
    static const std::set<std::string> abbrs = {
        "dr.", "dra.", "sr.", "sra.", "srta.", "prof.", "mr.", "mrs.", "ms.",
        "st.", "etc.", "vs.", "approx.", "aprox.", "p.ej.", "e.g.", "i.e.",
        "no.", "núm.", "art.", "fig.",
    };
    return abbrs;
}

namespace detail {

inline bool is_sentence_terminator(char32_t cp) {
    return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026;  // …
}

inline bool is_opening_punct(char32_t cp) {
    return cp == 0xBF || cp == 0xA1 ||  // ¿ ¡
           cp == '"' || cp == '\'' || cp == '(' || cp == '[' ||
           cp == 0xAB || cp == 0x201C || cp == 0x2018;  // « " '
}

inline bool is_space_cp(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0xA0;
}

}  // namespace detail

// Splits at `.` `!` `?` `…` followed by whitespace and a capital/digit
// (opening punctuation in between is skipped), and at newlines.
// Terms in `abbreviations` (lowercase, with trailing dot) never split.
inline std::vector<std::string> split_sentences(
    std::string_view text,
    const std::set<std::string>& abbreviations = default_abbreviations()) {
    const auto cps = to_codepoints(text);
    std::vector<std::string> sentences;
    std::vector<char32_t> cur;

    auto flush = [&] {
        size_t b = 0, e = cur.size();
        while (b < e && detail::is_space_cp(cur[b])) ++b;
        while (e > b && detail::is_space_cp(cur[e - 1])) --e;
        if (e > b) sentences.emplace_back(from_codepoints({cur.begin() + b, cur.begin() + e}));
        cur.clear();
    };

    for (size_t i = 0; i < cps.size(); ++i) {
        char32_t cp = cps[i];
        cur.push_back(cp);
        if (cp == '\n') {
            flush();
            continue;
        }
        if (!detail::is_sentence_terminator(cp)) continue;
        if (i + 1 < cps.size() && detail::is_sentence_terminator(cps[i + 1]))
            continue;  // keep "?!" or "..." together, decide at the last one

        if (cp == '.') {
            // word immediately before the dot, lowercased, dot included
            std::vector<char32_t> w;
            for (size_t k = cur.size(); k-- > 0;) {
                if (detail::is_space_cp(cur[k])) break;
                w.insert(w.begin(), fold_lower(cur[k]));
            }
            if (abbreviations.count(from_codepoints(w))) continue;
        }

        size_t j = i + 1;
        bool saw_space = false;
        while (j < cps.size() && detail::is_space_cp(cps[j])) {
            if (cps[j] == '\n') break;  // newline rule handles it
            saw_space = true;
            ++j;
        }
        if (!saw_space) continue;
        while (j < cps.size() && detail::is_opening_punct(cps[j])) ++j;
        if (j < cps.size() && (is_upper(cps[j]) || is_digit_cp(cps[j]))) flush();
    }
    flush();
    return sentences;
}

struct SentimentScore {
    double polarity = 0.0;
    double subjectivity = 0.0;
};

// Average polarity/subjectivity of matched lexicon terms; a negator within
// negation_window tokens before a match flips that term's polarity sign.
// No matches -> (0, 0).
inline SentimentScore score(std::string_view text, const SentimentLexicon& lexicon) {
    const auto tokens = word_tokens(text);
    double pol_sum = 0.0, subj_sum = 0.0;
    int matched = 0;
    for (size_t i = 0; i < tokens.size(); ++i) {
        auto it = lexicon.entries.find(tokens[i]);
        if (it == lexicon.entries.end()) continue;
        double pol = it->second.polarity;
        const size_t lo = i >= static_cast<size_t>(lexicon.negation_window)
                              ? i - static_cast<size_t>(lexicon.negation_window)
                              : 0;
        for (size_t k = lo; k < i; ++k)
            if (lexicon.negators.count(tokens[k])) { pol = -pol; break; }
        pol_sum += pol;
        subj_sum += it->second.subjectivity;
        ++matched;
    }
    if (matched == 0) return {};
    return {std::clamp(pol_sum / matched, -1.0, 1.0),
            std::clamp(subj_sum / matched, 0.0, 1.0)};
}

struct TextAnnotation {
    std::vector<std::string> sentences;
    double polarity = 0.0;
    double subjectivity = 0.0;
};

inline TextAnnotation annotate_text(std::string_view text, const SentimentLexicon& lexicon) {
    TextAnnotation a;
    a.sentences = split_sentences(text);
    auto s = score(text, lexicon);
    a.polarity = s.polarity;
    a.subjectivity = s.subjectivity;
    return a;
}

}  // namespace tgpipe
