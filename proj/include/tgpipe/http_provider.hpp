#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "tgpipe/crawler.hpp"
#include "tgpipe/embedder.hpp"
#include "tgpipe/model.hpp"
#include "tgpipe/topics.hpp"

// httplib.h must come after the headers above: it drags in <resolv.h>,
// whose `_res` macro would otherwise mangle identifiers in the linear
// algebra code included via topics.hpp.
#include <httplib.h>
#ifdef _res
#undef _res
#endif

namespace tgpipe {

// Generic HTTP channel source:
//   GET /channels/{key}                     -> ChannelDetails JSON
//   GET /channels/{key}/messages?since=&until=&offset_id=&limit=
//       -> {"messages":[...], "next_offset_id": int|null}
// 404 -> ChannelNotFound, 429 {"retry_after": n} -> FloodWait.
class HttpProvider : public HistoryProvider {
public:
    explicit HttpProvider(std::string base_url) : base_(std::move(base_url)) {
        if (!base_.empty() && base_.back() == '/') base_.pop_back();
    }

    ChannelDetails get_details(const std::string& key) override {
        return channel_details_from_json(get_json("/channels/" + key));
    }

    HistoryPage get_messages(const std::string& key, int64_t since, int64_t until,
                             int64_t offset_id, int64_t limit) override {
        nlohmann::json j = get_json("/channels/" + key + "/messages?since=" +
                                    std::to_string(since) + "&until=" + std::to_string(until) +
                                    "&offset_id=" + std::to_string(offset_id) +
                                    "&limit=" + std::to_string(limit));
        HistoryPage page;
        for (const auto& m : j.at("messages")) page.messages.push_back(parse_archive_line(m.dump()));
        if (j.contains("next_offset_id") && !j.at("next_offset_id").is_null())
            page.next_offset_id = j.at("next_offset_id").get<int64_t>();
        return page;
    }

private:
    nlohmann::json get_json(const std::string& path) {
        httplib::Client client(base_);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(30, 0);
        auto res = client.Get(path);
        if (!res) throw ProviderUnavailable("no response from " + base_ + path);
        if (res->status == 404) throw ChannelNotFound("404 for " + path);
        if (res->status == 429) {
            int retry_after = 1;
            try {
                retry_after = nlohmann::json::parse(res->body).value("retry_after", 1);
            } catch (const nlohmann::json::exception&) {
            }
            throw FloodWait(retry_after);
        }
        if (res->status != 200)
            throw ProviderUnavailable("status " + std::to_string(res->status) + " for " + path);
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderUnavailable(std::string("bad JSON from provider: ") + e.what());
        }
    }

    std::string base_;
};

// POST {endpoint} with {"texts": [...]}; endpoint is a full URL whose path
// defaults to /embed.
inline std::optional<nlohmann::json> http_embed_transport(const std::string& endpoint,
                                                          const nlohmann::json& body) {
    auto slash = endpoint.find('/', endpoint.find("://") + 3);
    const std::string base = slash == std::string::npos ? endpoint : endpoint.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/embed" : endpoint.substr(slash);
    httplib::Client client(base);
    client.set_connection_timeout(5, 0);
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res || res->status != 200) return std::nullopt;
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

// Chat-completions request; returns the first choice's message content.
inline std::optional<std::string> http_llm_transport(const std::string& endpoint,
                                                     const std::string& api_key,
                                                     const std::string& system_prompt,
                                                     const std::string& user_prompt) {
    auto slash = endpoint.find('/', endpoint.find("://") + 3);
    const std::string base = slash == std::string::npos ? endpoint : endpoint.substr(0, slash);
    const std::string path =
        slash == std::string::npos ? "/v1/chat/completions" : endpoint.substr(slash);
    httplib::Client client(base);
    client.set_connection_timeout(5, 0);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    nlohmann::json body{{"model", "gpt-4o-mini"},
                        {"messages",
                         {{{"role", "system"}, {"content", system_prompt}},
                          {{"role", "user"}, {"content", user_prompt}}}}};
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res || res->status != 200) return std::nullopt;
    try {
        nlohmann::json j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

}  // namespace tgpipe
