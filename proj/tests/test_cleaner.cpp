#include <doctest.h>

#include "tgpipe/cleaner.hpp"

using namespace tgpipe;

TEST_CASE("extract_elements: urls, domains, mentions, emojis") {
    auto e = extract_elements("see https://t.me/x and http://a.example.org/p @bob 🔥");
    CHECK(e.urls == std::vector<std::string>{"https://t.me/x", "http://a.example.org/p"});
    CHECK(e.domains == std::vector<std::string>{"t.me", "a.example.org"});
    CHECK(e.mentions == std::vector<std::string>{"bob"});
    CHECK(e.emojis == std::vector<std::string>{"🔥"});
}

TEST_CASE("flags disable their lists") {
    ExtractFlags flags;
    flags.capture_urls = false;
    auto e = extract_elements("see https://t.me/x and http://a.example.org/p @bob 🔥", flags);
    CHECK(e.urls.empty());
    CHECK(e.domains.empty());
    CHECK(e.mentions == std::vector<std::string>{"bob"});
    CHECK(e.emojis == std::vector<std::string>{"🔥"});
}

TEST_CASE("empty text") {
    auto e = extract_elements("");
    CHECK(e.urls.empty());
    CHECK(e.domains.empty());
    CHECK(e.emojis.empty());
    CHECK(e.mentions.empty());
}

TEST_CASE("url trailing punctuation and www stripping") {
    auto e = extract_elements("go to https://www.Example.COM/path?q=1, now!");
    REQUIRE(e.urls.size() == 1);
    CHECK(e.urls[0] == "https://www.Example.COM/path?q=1");
    CHECK(e.domains[0] == "example.com");
}

TEST_CASE("duplicates and order preserved") {
    auto e = extract_elements("@ana then @bob then @ana again");
    CHECK(e.mentions == std::vector<std::string>{"ana", "bob", "ana"});
}

TEST_CASE("mention username rules") {
    auto e = extract_elements("@ab too short, a@host no, @valid_name yes, @x_23 yes");
    CHECK(e.mentions == std::vector<std::string>{"valid_name", "x_23"});
}

TEST_CASE("emoji sequences stay whole") {
    auto e = extract_elements("fam 👨‍👩‍👧 flag 🇪🇸 tone 👍🏽 two 🔥🔥");
    CHECK(e.emojis == std::vector<std::string>{"👨‍👩‍👧", "🇪🇸", "👍🏽", "🔥", "🔥"});
}

TEST_CASE("extraction completeness: removing matches leaves none") {
    const std::string texts[] = {
        "mix https://a.b/c @user_one 😀 text",
        "@first @second https://x.org 🎉🎉 end",
        "nothing here",
    };
    for (const auto& t : texts) {
        auto e = extract_elements(t);
        std::string stripped = t;
        auto erase_all = [&stripped](const std::string& s) {
            size_t pos;
            while ((pos = stripped.find(s)) != std::string::npos)
                stripped.erase(pos, s.size());
        };
        for (const auto& u : e.urls) erase_all(u);
        for (const auto& m : e.mentions) erase_all("@" + m);
        for (const auto& em : e.emojis) erase_all(em);
        auto again = extract_elements(stripped);
        CHECK(again.urls.empty());
        CHECK(again.mentions.empty());
        CHECK(again.emojis.empty());
    }
}

TEST_CASE("simplify_media mapping") {
    CHECK(simplify_media(std::nullopt) == "none");
    CHECK(simplify_media(MediaDescriptor{"photo", {}, {}}) == "photo");
    CHECK(simplify_media(MediaDescriptor{"video", {}, {}}) == "video");
    CHECK(simplify_media(MediaDescriptor{"document", "video/mp4", {}}) == "video");
    CHECK(simplify_media(MediaDescriptor{"document", "audio/ogg", {}}) == "audio");
    CHECK(simplify_media(MediaDescriptor{"voice", {}, {}}) == "audio");
    CHECK(simplify_media(MediaDescriptor{"document", "application/pdf", {}}) == "document");
    CHECK(simplify_media(MediaDescriptor{"webpage", {}, {}}) == "link_preview");
    CHECK(simplify_media(MediaDescriptor{"poll", {}, {}}) == "poll");
    CHECK(simplify_media(MediaDescriptor{"sticker", {}, {}}) == "other");
}

TEST_CASE("flatten sums reactions and honors the feature list") {
    RawMessage m;
    m.message_id = 1;
    m.channel_id = 2;
    m.date = 100;
    m.text = "hola";
    m.views = 50;
    m.reactions = {{"👍", 3}, {"❤", 2}};

    auto all = flatten({m}, FeatureList::all());
    REQUIRE(all.size() == 1);
    CHECK(all[0].reactions_total == 5);
    CHECK(all[0].views == 50);

    FeatureList minimal;  // implicit core fields only
    auto rec = flatten({m}, minimal);
    CHECK_FALSE(rec[0].views.has_value());
    CHECK(rec[0].text == "hola");
    auto header = clean_csv_header(minimal);
    for (const auto& col : header) CHECK(col != "views");
}

TEST_CASE("flatten preserves count and order") {
    std::vector<RawMessage> msgs;
    for (int i = 0; i < 10; ++i) {
        RawMessage m;
        m.message_id = 10 - i;
        m.channel_id = 1;
        m.date = 1000 + i;
        msgs.push_back(m);
    }
    auto recs = flatten(msgs, FeatureList::all());
    REQUIRE(recs.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(recs[i].message_id == 10 - i);
}

TEST_CASE("dropping a feature leaves other columns untouched") {
    RawMessage m;
    m.message_id = 1;
    m.channel_id = 2;
    m.date = 100;
    m.forwards = 9;
    m.views = 77;

    FeatureList with{{"views", "forwards"}};
    FeatureList without{{"forwards"}};
    auto a = flatten({m}, with);
    auto b = flatten({m}, without);
    CHECK(a[0].forwards == b[0].forwards);
    CHECK(a[0].media_kind == b[0].media_kind);
}

TEST_CASE("clean CSV round-trip keeps absent fields absent") {
    RawMessage m;
    m.message_id = 4;
    m.channel_id = 9;
    m.date = 1722470400;
    m.text = "hola, \"mundo\"\ncon salto";
    m.forwards = 0;

    auto features = FeatureList::all();
    auto recs = flatten({m}, features);
    csv::Table t;
    t.header = clean_csv_header(features);
    t.rows.push_back(clean_csv_row(recs[0], features));

    auto back = read_clean_csv(t);
    REQUIRE(back.size() == 1);
    CHECK(back[0].text == m.text);
    CHECK_FALSE(back[0].views.has_value());
    REQUIRE(back[0].forwards.has_value());
    CHECK(*back[0].forwards == 0);
}
