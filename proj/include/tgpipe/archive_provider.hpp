#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgpipe/crawler.hpp"
#include "tgpipe/model.hpp"

namespace tgpipe {

// Replays a crawl from disk: <root>/channels.json holds an array of
// channel detail objects, <root>/messages_<channel_id>.jsonl the archives.
class ArchiveProvider : public HistoryProvider {
public:
    explicit ArchiveProvider(std::string root) : root_(std::move(root)) {
        const std::string index = root_ + "/channels.json";
        if (!std::filesystem::exists(index))
            throw ProviderUnavailable("archive index missing: " + index);
        std::ifstream is(index);
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ProviderUnavailable(std::string("corrupt archive index: ") + e.what());
        }
        for (const auto& entry : j) {
            ChannelDetails d = channel_details_from_json(entry);
            by_id_[d.channel_id] = d;
            if (!d.username.empty()) by_username_[d.username] = d.channel_id;
        }
    }

    ChannelDetails get_details(const std::string& key) override { return lookup(key); }

    HistoryPage get_messages(const std::string& key, int64_t since, int64_t until,
                             int64_t /*offset_id*/, int64_t /*limit*/) override {
        const ChannelDetails d = lookup(key);
        HistoryPage page;
        const std::string path =
            root_ + "/messages_" + std::to_string(d.channel_id) + ".jsonl";
        std::ifstream is(path);
        if (!is) return page;  // channel known, archive empty
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            RawMessage m = parse_archive_line(line);
            if (m.date >= since && m.date < until) page.messages.push_back(std::move(m));
        }
        return page;
    }

private:
    ChannelDetails lookup(const std::string& key) const {
        if (!key.empty() && (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-')) {
            try {
                auto it = by_id_.find(std::stoll(key));
                if (it != by_id_.end()) return it->second;
            } catch (const std::exception&) {
            }
        }
        if (auto it = by_username_.find(key); it != by_username_.end())
            return by_id_.at(it->second);
        throw ChannelNotFound("channel not in archive: " + key);
    }

    std::string root_;
    std::map<int64_t, ChannelDetails> by_id_;
    std::map<std::string, int64_t> by_username_;
};

}  // namespace tgpipe
