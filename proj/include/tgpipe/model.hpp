#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgpipe/time_util.hpp"

namespace tgpipe {

using json = nlohmann::json;

struct MediaDescriptor {
    std::string kind_hint;  // provider tag: "photo", "document", "webpage", ...
    std::optional<std::string> mime_type;
    std::optional<double> duration_s;

    bool operator==(const MediaDescriptor&) const = default;
};

struct Reaction {
    std::string emoji;
    int64_t count = 0;

    bool operator==(const Reaction&) const = default;
};

struct RawMessage {
    int64_t message_id = 0;
    int64_t channel_id = 0;
    int64_t date = 0;  // Unix seconds UTC
    std::string text;
    std::optional<int64_t> views;
    std::optional<int64_t> forwards;
    std::optional<int64_t> replies_count;
    std::vector<Reaction> reactions;
    std::optional<MediaDescriptor> media;
    std::optional<int64_t> fwd_from_channel_id;
    std::optional<int64_t> edit_date;

    bool operator==(const RawMessage&) const = default;
};

struct SimilarChannel {
    int64_t id = 0;
    std::string title;
    std::string username;

    bool operator==(const SimilarChannel&) const = default;
};

struct ChannelDetails {
    int64_t channel_id = 0;
    std::string username;
    std::string title;
    std::string url;
    int64_t subscribers = 0;
    int64_t created_at = 0;
    std::string description;
    std::vector<int64_t> pinned_message_ids;
    std::vector<SimilarChannel> similar_channels;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedLine : public ParseError {
public:
    using ParseError::ParseError;
};

class MissingField : public ParseError {
public:
    using ParseError::ParseError;
};

class BadTimestamp : public ParseError {
public:
    using ParseError::ParseError;
};

namespace detail {

inline int64_t timestamp_field(const json& j, const char* name) {
    const json& v = j.at(name);
    std::optional<int64_t> ts;
    if (v.is_number_integer()) ts = v.get<int64_t>();
    else if (v.is_string()) ts = parse_timestamp(v.get<std::string>());
    if (!ts) throw BadTimestamp(std::string("unparseable timestamp in field '") + name + "'");
    return *ts;
}

template <typename T>
std::optional<T> opt_field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace detail

// One JSONL archive line -> RawMessage. Unrecognized fields are ignored;
// absent engagement counters stay absent rather than becoming 0.
inline RawMessage parse_archive_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw MalformedLine(std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedLine("line is not a JSON object");
    for (const char* req : {"message_id", "channel_id", "date"})
        if (!j.contains(req)) throw MissingField(std::string("missing field '") + req + "'");

    RawMessage m;
    try {
        m.message_id = j.at("message_id").get<int64_t>();
        m.channel_id = j.at("channel_id").get<int64_t>();
        m.date = detail::timestamp_field(j, "date");
        if (auto it = j.find("text"); it != j.end() && !it->is_null())
            m.text = it->get<std::string>();
        m.views = detail::opt_field<int64_t>(j, "views");
        m.forwards = detail::opt_field<int64_t>(j, "forwards");
        m.replies_count = detail::opt_field<int64_t>(j, "replies_count");
        if (auto it = j.find("reactions"); it != j.end() && it->is_array()) {
            for (const auto& r : *it)
                m.reactions.push_back({r.at("emoji").get<std::string>(),
                                       r.at("count").get<int64_t>()});
        }
        if (auto it = j.find("media"); it != j.end() && it->is_object()) {
            MediaDescriptor d;
            d.kind_hint = it->value("kind_hint", std::string());
            d.mime_type = detail::opt_field<std::string>(*it, "mime_type");
            d.duration_s = detail::opt_field<double>(*it, "duration_s");
            m.media = std::move(d);
        }
        m.fwd_from_channel_id = detail::opt_field<int64_t>(j, "fwd_from_channel_id");
        if (auto it = j.find("edit_date"); it != j.end() && !it->is_null())
            m.edit_date = detail::timestamp_field(j, "edit_date");
    } catch (const BadTimestamp&) {
        throw;
    } catch (const json::exception& e) {
        throw MalformedLine(std::string("bad field type: ") + e.what());
    }
    return m;
}

inline json message_to_json(const RawMessage& m) {
    json j;
    j["message_id"] = m.message_id;
    j["channel_id"] = m.channel_id;
    j["date"] = format_rfc3339(m.date);
    j["text"] = m.text;
    if (m.views) j["views"] = *m.views;
    if (m.forwards) j["forwards"] = *m.forwards;
    if (m.replies_count) j["replies_count"] = *m.replies_count;
    if (!m.reactions.empty()) {
        json arr = json::array();
        for (const auto& r : m.reactions)
            arr.push_back({{"emoji", r.emoji}, {"count", r.count}});
        j["reactions"] = std::move(arr);
    }
    if (m.media) {
        json d;
        d["kind_hint"] = m.media->kind_hint;
        if (m.media->mime_type) d["mime_type"] = *m.media->mime_type;
        if (m.media->duration_s) d["duration_s"] = *m.media->duration_s;
        j["media"] = std::move(d);
    }
    if (m.fwd_from_channel_id) j["fwd_from_channel_id"] = *m.fwd_from_channel_id;
    if (m.edit_date) j["edit_date"] = format_rfc3339(*m.edit_date);
    return j;
}

inline std::string serialize_message(const RawMessage& m) {
    return message_to_json(m).dump();
}

// Reports every violated RawMessage invariant, not just the first.
inline std::vector<std::string> validate_message(
    const RawMessage& m,
    int64_t now = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::system_clock::now().time_since_epoch()).count()) {
    std::vector<std::string> violations;
    if (m.message_id <= 0) violations.push_back("message_id must be positive");
    if (m.date < 0) violations.push_back("date before 1970-01-01");
    if (m.date > now + 86400) violations.push_back("date in future");
    if (m.views && *m.views < 0) violations.push_back("views must be non-negative");
    if (m.forwards && *m.forwards < 0) violations.push_back("forwards must be non-negative");
    if (m.replies_count && *m.replies_count < 0)
        violations.push_back("replies_count must be non-negative");
    for (const auto& r : m.reactions)
        if (r.count < 1) { violations.push_back("reaction count >= 1"); break; }
    if (m.media && m.media->kind_hint.empty())
        violations.push_back("media kind_hint must be non-empty");
    if (m.media && m.media->duration_s && *m.media->duration_s < 0)
        violations.push_back("media duration_s must be non-negative");
    return violations;
}

inline json channel_details_to_json(const ChannelDetails& c) {
    json j;
    j["channel_id"] = c.channel_id;
    j["username"] = c.username;
    j["title"] = c.title;
    j["url"] = c.url;
    j["subscribers"] = c.subscribers;
    j["created_at"] = format_rfc3339(c.created_at);
    j["description"] = c.description;
    j["pinned_message_ids"] = c.pinned_message_ids;
    json sim = json::array();
    for (const auto& s : c.similar_channels)
        sim.push_back({{"id", s.id}, {"title", s.title}, {"username", s.username}});
    j["similar_channels"] = std::move(sim);
    return j;
}

inline ChannelDetails channel_details_from_json(const json& j) {
    ChannelDetails c;
    c.channel_id = j.at("channel_id").get<int64_t>();
    c.username = j.value("username", std::string());
    c.title = j.value("title", std::string());
    c.url = j.value("url", std::string());
    if (c.url.empty() && !c.username.empty()) c.url = "https://t.me/" + c.username;
    c.subscribers = j.value("subscribers", int64_t{0});
    if (j.contains("created_at")) c.created_at = detail::timestamp_field(j, "created_at");
    c.description = j.value("description", std::string());
    if (auto it = j.find("pinned_message_ids"); it != j.end())
        c.pinned_message_ids = it->get<std::vector<int64_t>>();
    std::set<int64_t> seen;
    if (auto it = j.find("similar_channels"); it != j.end()) {
        for (const auto& s : *it) {
            SimilarChannel sc{s.at("id").get<int64_t>(),
                              s.value("title", std::string()),
                              s.value("username", std::string())};
            if (seen.insert(sc.id).second) c.similar_channels.push_back(std::move(sc));
        }
    }
    return c;
}

}  // namespace tgpipe
