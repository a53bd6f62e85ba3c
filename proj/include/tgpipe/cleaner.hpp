#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tgpipe/csv.hpp"
#include "tgpipe/model.hpp"
#include "tgpipe/time_util.hpp"
#include "tgpipe/unicode.hpp"

namespace tgpipe {

struct ExtractFlags {
    bool capture_urls = true;
    bool capture_emojis = true;
    bool capture_mentions = true;
};

struct Elements {
    std::vector<std::string> urls;
    std::vector<std::string> domains;  // order-aligned with urls
    std::vector<std::string> emojis;
    std::vector<std::string> mentions;  // without leading '@'

    bool operator==(const Elements&) const = default;
};

// User-declared subset of RawMessage fields to retain past cleaning.
// channel_id, message_id, date and text are always kept.
struct FeatureList {
    std::vector<std::string> names;

    static FeatureList all() {
        return {{"channel_id", "message_id", "date", "text", "views", "forwards",
                 "replies_count", "fwd_from_channel_id", "edit_date"}};
    }

    bool has(std::string_view name) const {
        if (name == "channel_id" || name == "message_id" || name == "date" ||
            name == "text")
            return true;
        return std::find(names.begin(), names.end(), name) != names.end();
    }

    // Column order is canonical, filtered by membership.
    std::vector<std::string> columns() const {
        std::vector<std::string> cols;
        for (const char* f : {"channel_id", "message_id", "date", "text", "views",
                              "forwards", "replies_count", "fwd_from_channel_id",
                              "edit_date"})
            if (has(f)) cols.push_back(f);
        return cols;
    }
};

struct CleanRecord {
    int64_t channel_id = 0;
    int64_t message_id = 0;
    int64_t date = 0;
    std::string text;
    std::optional<int64_t> views;
    std::optional<int64_t> forwards;
    std::optional<int64_t> replies_count;
    std::optional<int64_t> fwd_from_channel_id;
    std::optional<int64_t> edit_date;
    Elements elements;
    std::string media_kind = "none";
    int64_t reactions_total = 0;
};

namespace detail {

inline bool is_url_trailing_punct(char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' ||
           c == '?' || c == ')';
}

struct Span {
    size_t begin, end;
};

inline bool in_spans(const std::vector<Span>& spans, size_t pos) {
    for (const auto& s : spans)
        if (pos >= s.begin && pos < s.end) return true;
    return false;
}

inline std::string domain_of(std::string_view url) {
    size_t start = url.find("://");
    start = (start == std::string_view::npos) ? 0 : start + 3;
    size_t end = url.find_first_of("/?#", start);
    std::string_view host = url.substr(start, end == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : end - start);
    if (size_t at = host.rfind('@'); at != std::string_view::npos)
        host = host.substr(at + 1);
    if (size_t colon = host.find(':'); colon != std::string_view::npos)
        host = host.substr(0, colon);
    std::string d = lower(host);
    if (d.rfind("www.", 0) == 0) d = d.substr(4);
    return d;
}

inline std::vector<Span> find_url_spans(std::string_view text) {
    std::vector<Span> spans;
    size_t pos = 0;
    while ((pos = text.find("://", pos)) != std::string_view::npos) {
        size_t scheme_begin;
        if (pos >= 4 && text.substr(pos - 4, 4) == "http")
            scheme_begin = pos - 4;
        else if (pos >= 5 && text.substr(pos - 5, 5) == "https")
            scheme_begin = pos - 5;
        else {
            pos += 3;
            continue;
        }
        if (scheme_begin > 0 && is_word_cp(static_cast<unsigned char>(text[scheme_begin - 1]))) {
            pos += 3;
            continue;
        }
        size_t end = pos + 3;
        while (end < text.size() &&
               !std::isspace(static_cast<unsigned char>(text[end])) &&
               static_cast<unsigned char>(text[end]) >= 0x20 &&
               static_cast<unsigned char>(text[end]) < 0x80)
            ++end;
        while (end > pos + 3 && is_url_trailing_punct(text[end - 1])) --end;
        if (end > pos + 3) spans.push_back({scheme_begin, end});
        pos = end;
    }
    return spans;
}

}  // namespace detail

// Extracts URLs (+ registrable domains), emojis and @mentions in order of
// appearance, duplicates preserved. Disabled flags yield empty lists.
inline Elements extract_elements(std::string_view text, const ExtractFlags& flags = {}) {
    Elements out;
    const auto url_spans = detail::find_url_spans(text);
    if (flags.capture_urls) {
        for (const auto& s : url_spans) {
            std::string url(text.substr(s.begin, s.end - s.begin));
            out.domains.push_back(detail::domain_of(url));
            out.urls.push_back(std::move(url));
        }
    }

    if (flags.capture_mentions) {
        for (size_t i = 0; i < text.size(); ++i) {
            if (text[i] != '@' || detail::in_spans(url_spans, i)) continue;
            if (i > 0 && is_word_cp(static_cast<unsigned char>(text[i - 1]))) continue;
            size_t j = i + 1;
            while (j < text.size()) {
                char c = text[j];
                if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ++j;
                else break;
            }
            size_t len = j - (i + 1);
            if (len >= 3 && len <= 32)
                out.mentions.emplace_back(text.substr(i + 1, len));
            i = j - 1;
        }
    }

    if (flags.capture_emojis) {
        size_t i = 0;
        while (i < text.size()) {
            size_t start = i;
            char32_t cp = decode_utf8(text, i);
            if (!is_emoji_base(cp) || detail::in_spans(url_spans, start)) continue;
            size_t end = i;
            bool regional = (cp >= 0x1F1E6 && cp <= 0x1F1FF);
            // Attach modifiers, a flag's second regional indicator, and
            // ZWJ-joined continuations so the sequence stays one emoji.
            while (end < text.size()) {
                size_t k = end;
                char32_t next = decode_utf8(text, k);
                if (is_emoji_modifier(next)) {
                    end = k;
                } else if (regional && next >= 0x1F1E6 && next <= 0x1F1FF) {
                    end = k;
                    regional = false;
                } else if (next == kZwj) {
                    size_t k2 = k;
                    if (k2 < text.size()) {
                        char32_t joined = decode_utf8(text, k2);
                        if (is_emoji_base(joined)) { end = k2; continue; }
                    }
                    break;
                } else {
                    break;
                }
            }
            out.emojis.emplace_back(text.substr(start, end - start));
            i = end;
        }
    }
    return out;
}

// Provider media tag + MIME type -> simplified media kind.
inline std::string simplify_media(const std::optional<MediaDescriptor>& d) {
    if (!d) return "none";
    const std::string hint = lower(d->kind_hint);
    const std::string mime = d->mime_type ? lower(*d->mime_type) : "";
    if (hint == "photo") return "photo";
    if (hint == "video") return "video";
    if (hint == "voice" || hint == "audio") return "audio";
    if (hint == "document") {
        if (mime.rfind("video/", 0) == 0) return "video";
        if (mime.rfind("audio/", 0) == 0) return "audio";
        return "document";
    }
    if (hint == "webpage") return "link_preview";
    if (hint == "poll") return "poll";
    return "other";
}

inline std::vector<CleanRecord> flatten(const std::vector<RawMessage>& messages,
                                        const FeatureList& features,
                                        const ExtractFlags& flags = {}) {
    std::vector<CleanRecord> out;
    out.reserve(messages.size());
    for (const auto& m : messages) {
        CleanRecord r;
        r.channel_id = m.channel_id;
        r.message_id = m.message_id;
        r.date = m.date;
        r.text = m.text;
        if (features.has("views")) r.views = m.views;
        if (features.has("forwards")) r.forwards = m.forwards;
        if (features.has("replies_count")) r.replies_count = m.replies_count;
        if (features.has("fwd_from_channel_id")) r.fwd_from_channel_id = m.fwd_from_channel_id;
        if (features.has("edit_date")) r.edit_date = m.edit_date;
        r.elements = extract_elements(m.text, flags);
        r.media_kind = simplify_media(m.media);
        for (const auto& rx : m.reactions) r.reactions_total += rx.count;
        out.push_back(std::move(r));
    }
    return out;
}

// --- cleaned CSV (list cells are JSON array strings) ---

inline std::vector<std::string> clean_csv_header(const FeatureList& features) {
    auto cols = features.columns();
    for (const char* c : {"urls", "domains", "emojis", "mentions", "media_kind",
                          "reactions_total"})
        cols.push_back(c);
    return cols;
}

namespace detail {

inline std::string json_list(const std::vector<std::string>& v) {
    return nlohmann::json(v).dump();
}

inline std::string opt_cell(const std::optional<int64_t>& v) {
    return v ? std::to_string(*v) : "";
}

}  // namespace detail

inline std::vector<std::string> clean_csv_row(const CleanRecord& r,
                                              const FeatureList& features) {
    std::vector<std::string> row;
    for (const auto& col : features.columns()) {
        if (col == "channel_id") row.push_back(std::to_string(r.channel_id));
        else if (col == "message_id") row.push_back(std::to_string(r.message_id));
        else if (col == "date") row.push_back(format_rfc3339(r.date));
        else if (col == "text") row.push_back(r.text);
        else if (col == "views") row.push_back(detail::opt_cell(r.views));
        else if (col == "forwards") row.push_back(detail::opt_cell(r.forwards));
        else if (col == "replies_count") row.push_back(detail::opt_cell(r.replies_count));
        else if (col == "fwd_from_channel_id") row.push_back(detail::opt_cell(r.fwd_from_channel_id));
        else if (col == "edit_date")
            row.push_back(r.edit_date ? format_rfc3339(*r.edit_date) : "");
    }
    row.push_back(detail::json_list(r.elements.urls));
    row.push_back(detail::json_list(r.elements.domains));
    row.push_back(detail::json_list(r.elements.emojis));
    row.push_back(detail::json_list(r.elements.mentions));
    row.push_back(r.media_kind);
    row.push_back(std::to_string(r.reactions_total));
    return row;
}

// Reads records back from a cleaned (or downstream) CSV; empty cells stay
// absent, preserving the absent-vs-zero distinction.
inline std::vector<CleanRecord> read_clean_csv(const csv::Table& t) {
    auto col = [&](const char* name) { return t.column(name); };
    const int c_ch = col("channel_id"), c_id = col("message_id"), c_date = col("date"),
              c_text = col("text"), c_views = col("views"), c_fwd = col("forwards"),
              c_rep = col("replies_count"), c_src = col("fwd_from_channel_id"),
              c_edit = col("edit_date"), c_urls = col("urls"), c_dom = col("domains"),
              c_emo = col("emojis"), c_men = col("mentions"), c_media = col("media_kind"),
              c_rt = col("reactions_total");
    if (c_ch < 0 || c_id < 0 || c_date < 0 || c_text < 0)
        throw std::runtime_error("cleaned CSV missing required columns");

    auto opt_int = [&](const std::vector<std::string>& row, int c) -> std::optional<int64_t> {
        if (c < 0 || row[c].empty()) return std::nullopt;
        return std::stoll(row[c]);
    };
    auto list_cell = [&](const std::vector<std::string>& row, int c) {
        std::vector<std::string> v;
        if (c >= 0 && !row[c].empty()) v = nlohmann::json::parse(row[c]).get<std::vector<std::string>>();
        return v;
    };

    std::vector<CleanRecord> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        CleanRecord r;
        r.channel_id = std::stoll(row[c_ch]);
        r.message_id = std::stoll(row[c_id]);
        r.date = *parse_timestamp(row[c_date]);
        r.text = row[c_text];
        r.views = opt_int(row, c_views);
        r.forwards = opt_int(row, c_fwd);
        r.replies_count = opt_int(row, c_rep);
        r.fwd_from_channel_id = opt_int(row, c_src);
        if (c_edit >= 0 && !row[c_edit].empty()) r.edit_date = *parse_timestamp(row[c_edit]);
        r.elements.urls = list_cell(row, c_urls);
        r.elements.domains = list_cell(row, c_dom);
        r.elements.emojis = list_cell(row, c_emo);
        r.elements.mentions = list_cell(row, c_men);
        if (c_media >= 0) r.media_kind = row[c_media];
        if (c_rt >= 0 && !row[c_rt].empty()) r.reactions_total = std::stoll(row[c_rt]);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace tgpipe
