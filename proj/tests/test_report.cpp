#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sys/stat.h>
#include <unistd.h>

#include "tgpipe/report.hpp"

using namespace tgpipe;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("tgpipe_report_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return std::string(std::istreambuf_iterator<char>(is), {});
}

TopicModel demo_model() {
    TopicModel m;
    m.vocabulary = {"gol", "liga", "luz", "precio", "receta", "sal"};
    // three real topics + outliers; 0/1 close to each other, 2 far away
    m.ctfidf[-1] = {0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    m.ctfidf[0] = {0.0, 0.0, 2.0, 1.9, 0.0, 0.0};
    m.ctfidf[1] = {0.0, 0.1, 1.8, 2.1, 0.0, 0.0};
    m.ctfidf[2] = {2.0, 1.5, 0.0, 0.0, 0.0, 0.0};
    m.topic_sizes = {{-1, 4}, {0, 20}, {1, 12}, {2, 8}};
    m.topic_keywords[-1] = {{"sal", 0.1}};
    m.topic_keywords[0] = {{"luz", 2.0}, {"precio", 1.9}};
    m.topic_keywords[1] = {{"precio", 2.1}, {"luz", 1.8}};
    m.topic_keywords[2] = {{"gol", 2.0}, {"liga", 1.5}};
    m.descriptions = {{0, "Electricidad"}, {2, "Fútbol"}};
    return m;
}

}  // namespace

TEST_CASE("topic_infos covers every topic including outliers") {
    auto infos = topic_infos(demo_model());
    REQUIRE(infos.size() == 4);
    CHECK(infos[0].topic_id == -1);
    CHECK(infos[0].description == "Outliers");
    CHECK(infos[0].size == 4);
    CHECK(infos[1].topic_id == 0);
    CHECK(infos[1].description == "Electricidad");
    CHECK(infos[2].description.empty());  // no description provided for topic 1
    CHECK(infos[3].size == 8);
}

TEST_CASE("keywords_cell formatting") {
    CHECK(keywords_cell({}) == "");
    CHECK(keywords_cell({{"luz", 2.0}}) == "luz:2.0000");
    CHECK(keywords_cell({{"luz", 2.0}, {"precio", 1.95}}) == "luz:2.0000;precio:1.9500");
    CHECK(keywords_cell({{"a", 0.12345}}) == "a:0.1235");  // 4 decimals, rounded
}

TEST_CASE("write_outputs produces the four tabular artifacts") {
    const std::string dir = temp_dir("outputs");
    csv::Table annotated;
    annotated.header = {"channel_id", "message_id", "date", "text", "topic_id"};
    annotated.rows = {{"101", "1", "2024-08-01T00:00:00+00:00", "hola, \"amigo\"", "0"},
                      {"101", "2", "2024-08-02T00:00:00+00:00", "línea\ncon salto", "-1"}};
    csv::Table channels;
    channels.header = {"id", "channel_name"};
    channels.rows = {{"101", "Alpha"}};
    RunManifest manifest;
    manifest.description = "demo run";
    manifest.started_at = 1722470400;
    manifest.finished_at = 1722470460;
    manifest.config_snapshot = {{"provider", "archive"}};

    auto written = write_outputs(annotated, topic_infos(demo_model()), channels, manifest, dir);
    for (const char* f : {"messages_annotated.csv", "topic_info.csv",
                          "channels_list_details.csv", "manifest.json"})
        CHECK(fs::exists(dir + "/" + f));
    CHECK(written.size() == 4);

    auto back = csv::read_file(dir + "/messages_annotated.csv");
    CHECK(back.header == annotated.header);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0][3] == "hola, \"amigo\"");  // quoting round-trips
    CHECK(back.rows[1][3] == "línea\ncon salto");

    auto tinfo = csv::read_file(dir + "/topic_info.csv");
    CHECK(tinfo.header == std::vector<std::string>{"topic_id", "size", "keywords",
                                                   "description"});
    REQUIRE(tinfo.rows.size() == 4);
    CHECK(tinfo.rows[0][0] == "-1");
    CHECK(tinfo.rows[1][2] == "luz:2.0000;precio:1.9000");

    auto j = nlohmann::json::parse(slurp(dir + "/manifest.json"));
    CHECK(j.at("description") == "demo run");
    CHECK(j.at("started_at") == "2024-08-01T00:00:00+00:00");
    CHECK(j.at("config").at("provider") == "archive");
    auto outs = j.at("outputs").get<std::vector<std::string>>();
    CHECK(std::count(outs.begin(), outs.end(), "topic_info.csv") == 1);
}

TEST_CASE("unwritable output directory raises SinkUnwritable") {
    if (::geteuid() == 0) return;  // root bypasses permission bits
    const std::string dir = temp_dir("readonly");
    ::chmod(dir.c_str(), 0555);
    RunManifest manifest;
    CHECK_THROWS_AS(write_outputs({}, {}, {}, manifest, dir), SinkUnwritable);
    ::chmod(dir.c_str(), 0755);
}

TEST_CASE("dendrogram merges the closest topics first") {
    auto model = demo_model();
    std::vector<int> leaves;
    auto merges = topic_dendrogram(model, leaves);
    CHECK(leaves == std::vector<int>{0, 1, 2});  // outlier row excluded
    REQUIRE(merges.size() == 2);
    // topics 0 and 1 are nearly parallel, 2 is orthogonal to both
    CHECK(std::min(merges[0].left, merges[0].right) == 0);
    CHECK(std::max(merges[0].left, merges[0].right) == 1);
    CHECK(merges[0].distance < merges[1].distance);
    CHECK(merges[1].left == 2);   // remaining leaf
    CHECK(merges[1].right == 3);  // first internal node
}

TEST_CASE("dendrogram edge cases") {
    TopicModel single;
    single.ctfidf[0] = {1.0, 0.0};
    std::vector<int> leaves;
    CHECK(topic_dendrogram(single, leaves).empty());
    CHECK(leaves == std::vector<int>{0});

    // identical rows: zero-distance merge, lower ids first
    TopicModel same;
    same.ctfidf[0] = {1.0, 1.0};
    same.ctfidf[1] = {1.0, 1.0};
    same.ctfidf[2] = {1.0, 1.0};
    auto merges = topic_dendrogram(same, leaves);
    REQUIRE(merges.size() == 2);
    CHECK(merges[0].distance == doctest::Approx(0.0));
    CHECK(merges[0].left == 0);
    CHECK(merges[0].right == 1);
}

TEST_CASE("visualizations are self-contained HTML") {
    const std::string dir = temp_dir("viz");
    std::vector<VizRecord> records;
    for (int day = 0; day < 5; ++day)
        for (int k = 0; k <= day; ++k)
            records.push_back({1722470400 + day * 86400, day % 2});
    records.push_back({1722470400, -1});

    auto written = render_visualizations(demo_model(), records, dir);
    REQUIRE(written.size() == 3);
    for (const auto& f : written) {
        const std::string html = slurp(dir + "/" + f);
        CHECK(html.rfind("<!DOCTYPE html>", 0) == 0);
        CHECK(html.find("<svg") != std::string::npos);
        CHECK(html.find("chart-data") != std::string::npos);
        // self-contained: no external fetches (the SVG xmlns is an
        // identifier, not a fetched resource)
        std::string stripped = html;
        for (size_t pos;
             (pos = stripped.find("http://www.w3.org/2000/svg")) != std::string::npos;)
            stripped.erase(pos, 26);
        CHECK(stripped.find("http://") == std::string::npos);
        CHECK(stripped.find("https://") == std::string::npos);
        CHECK(stripped.find("src=") == std::string::npos);
        CHECK(stripped.find("<link") == std::string::npos);
        CHECK(html.find("</html>") != std::string::npos);
    }

    // the embedded data reflects the daily bins
    const std::string html = slurp(dir + "/viz_topics_over_time.html");
    const auto open = html.find("id=\"chart-data\">");
    const auto start = html.find('\n', open) + 1;
    const auto end = html.find("</script>", start);
    std::string payload = html.substr(start, end - start);
    size_t pos = 0;
    while ((pos = payload.find("<\\/", pos)) != std::string::npos) payload.replace(pos, 3, "</");
    auto data = nlohmann::json::parse(payload);
    CHECK(data.at("days").size() == 5);
    CHECK(data.at("days")[0] == "2024-08-01");
    int64_t total = 0;
    for (const auto& s : data.at("series"))
        for (const auto& c : s.at("counts")) total += c.get<int64_t>();
    CHECK(total == static_cast<int64_t>(records.size()));
}

TEST_CASE("file digest is stable and content-sensitive") {
    const std::string dir = temp_dir("digest");
    std::ofstream(dir + "/a.txt") << "hello";
    std::ofstream(dir + "/b.txt") << "hello";
    std::ofstream(dir + "/c.txt") << "hellx";
    CHECK(file_digest(dir + "/a.txt") == file_digest(dir + "/b.txt"));
    CHECK(file_digest(dir + "/a.txt") != file_digest(dir + "/c.txt"));
    CHECK(file_digest(dir + "/a.txt").rfind("fnv1a64:", 0) == 0);
    CHECK(file_digest(dir + "/missing.txt").empty());
}
