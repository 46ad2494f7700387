#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "enrichkit/cli.hpp"

using namespace enrichkit;

namespace {

/// Location of the bundled fixture pack, passed in by the test harness.
std::filesystem::path fixtures_dir() {
    const char* env = std::getenv("ENRICHKIT_FIXTURES");
    if (env == nullptr || *env == '\0') {
        throw std::runtime_error("ENRICHKIT_FIXTURES must point at the fixture pack");
    }
    return std::filesystem::path(env);
}

struct temp_dir {
    std::filesystem::path path;

    temp_dir() {
        path = std::filesystem::temp_directory_path() /
               ("enrichkit_cli_test_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~temp_dir() { std::filesystem::remove_all(path); }
};

struct cli_result {
    int exit_code = 0;
    std::string out;
    std::string err;
};

cli_result run(const std::vector<std::string>& args, const std::string& stdin_text = "") {
    std::istringstream in(stdin_text);
    std::ostringstream out;
    std::ostringstream err;
    cli_result r;
    r.exit_code = run_cli(args, in, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open ", p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string cache_arg() { return (fixtures_dir() / "cache").string(); }

} // namespace

TEST_CASE("usage problems exit with the usage code") {
    const cli_result missing = run({"enrich", "--mapping", "whatever.jsonl"});
    CHECK(missing.exit_code == exit_usage);
    CHECK(missing.err.find("--input") != std::string::npos);

    CHECK(run({"evaluate", "--enriched", "x", "--judgments", "y", "--k", "0"}).exit_code ==
          exit_usage);
    CHECK(run({"--definitely-not-a-flag"}).exit_code == exit_usage);
    CHECK(run({}).exit_code == exit_usage);
    CHECK(run({"cache"}).exit_code == exit_usage);
}

TEST_CASE("help succeeds and names the subcommands") {
    const cli_result r = run({"--help"});
    CHECK(r.exit_code == exit_ok);
    CHECK(r.out.find("enrich") != std::string::npos);
    CHECK(r.out.find("evaluate") != std::string::npos);
    CHECK(r.out.find("wikify") != std::string::npos);
    CHECK(r.out.find("cache") != std::string::npos);
}

TEST_CASE("a missing mapping file is fatal and the error names the path") {
    temp_dir dir;
    const cli_result r = run({"enrich", "--input", (fixtures_dir() / "explanations.jsonl").string(),
                              "--mapping", "/nonexistent/mapping.jsonl", "--cache-dir", cache_arg(),
                              "--offline", "--out", (dir.path / "out.jsonl").string()});
    CHECK(r.exit_code == exit_fatal);
    CHECK(r.err.find("/nonexistent/mapping.jsonl") != std::string::npos);
}

TEST_CASE("enrich reproduces the golden corpus byte for byte") {
    temp_dir dir;
    const std::filesystem::path out_file = dir.path / "enriched.jsonl";
    const cli_result r = run({"enrich", "--input", (fixtures_dir() / "explanations.jsonl").string(),
                              "--mapping", (fixtures_dir() / "table1.jsonl").string(), "--cache-dir",
                              cache_arg(), "--offline", "--out", out_file.string()});
    CHECK(r.exit_code == exit_ok);
    CHECK(r.out == "enriched 12 of 12 records\n");
    CHECK(read_file(out_file) == read_file(fixtures_dir() / "golden" / "enriched.jsonl"));
    // A clean run writes no failure sidecar.
    CHECK_FALSE(std::filesystem::exists(dir.path / "enriched.errors.jsonl"));
}

TEST_CASE("evaluate reproduces the golden report files byte for byte") {
    temp_dir dir;
    const std::filesystem::path report = dir.path / "report.json";
    const std::filesystem::path table = dir.path / "report.txt";
    const cli_result r =
        run({"evaluate", "--enriched", (fixtures_dir() / "golden" / "enriched.jsonl").string(),
             "--judgments", (fixtures_dir() / "judgments.jsonl").string(), "--k", "1,3", "--report",
             report.string(), "--table", table.string()});
    CHECK(r.exit_code == exit_ok);
    const std::string golden_table = read_file(fixtures_dir() / "golden" / "report.txt");
    CHECK(r.out == golden_table);
    CHECK(read_file(table) == golden_table);
    CHECK(read_file(report) == read_file(fixtures_dir() / "golden" / "report.json"));
}

TEST_CASE("a partially failing corpus exits partial and writes the sidecar") {
    temp_dir dir;
    const std::filesystem::path out_file = dir.path / "partial.jsonl";
    const std::filesystem::path errors_file = dir.path / "partial_errors.jsonl";
    const cli_result r =
        run({"enrich", "--input", (fixtures_dir() / "explanations_partial.jsonl").string(),
             "--mapping", (fixtures_dir() / "table1.jsonl").string(), "--cache-dir", cache_arg(),
             "--offline", "--out", out_file.string(), "--errors", errors_file.string()});
    CHECK(r.exit_code == exit_partial);
    CHECK(r.out == "enriched 1 of 2 records (1 failed)\n");

    const std::string sidecar = read_file(errors_file);
    CHECK(sidecar ==
          "{\"error\":\"explanation 'exp-92': no concept mapping for keyword 'Unknown Feature'\","
          "\"explanation_id\":\"exp-92\"}\n");

    // The surviving record still lands in the output file.
    std::istringstream lines(read_file(out_file));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        ++count;
        CHECK(nlohmann::json::parse(line)["explanation"]["explanation_id"] == "exp-91");
    }
    CHECK(count == 1);
}

TEST_CASE("the default sidecar path derives from the output file") {
    temp_dir dir;
    const std::filesystem::path out_file = dir.path / "partial.jsonl";
    const cli_result r =
        run({"enrich", "--input", (fixtures_dir() / "explanations_partial.jsonl").string(),
             "--mapping", (fixtures_dir() / "table1.jsonl").string(), "--cache-dir", cache_arg(),
             "--offline", "--out", out_file.string()});
    CHECK(r.exit_code == exit_partial);
    CHECK(std::filesystem::exists(dir.path / "partial.errors.jsonl"));
}

TEST_CASE("cache stats matches the fixture manifest") {
    const nlohmann::json manifest =
        nlohmann::json::parse(read_file(fixtures_dir() / "manifest.json"));
    std::string expected;
    for (const auto& [bucket, count] : manifest["buckets"].items()) {
        expected += bucket + '\t' + std::to_string(count.get<std::size_t>()) + '\n';
    }

    const cli_result r = run({"cache", "stats", "--cache-dir", cache_arg()});
    CHECK(r.exit_code == exit_ok);
    CHECK(r.out == expected);
}

TEST_CASE("cache clear empties one bucket and leaves the others") {
    temp_dir dir;
    const std::filesystem::path copy = dir.path / "cache";
    std::filesystem::copy(fixtures_dir() / "cache", copy, std::filesystem::copy_options::recursive);

    const cli_result cleared = run({"cache", "clear", "--source", "wikifier", "--cache-dir", copy.string()});
    CHECK(cleared.exit_code == exit_ok);
    CHECK(cleared.out == "removed 25 entries\n");

    const cli_result stats = run({"cache", "stats", "--cache-dir", copy.string()});
    CHECK(stats.out == "dataset\t7\nkg_entity\t21\nmedia_event\t7\nwikifier\t0\n");
}

TEST_CASE("wikify replays recorded annotations offline") {
    const cli_result car = run({"wikify", "--text", "Car Sales Demand", "--cache-dir", cache_arg(),
                                "--offline"});
    CHECK(car.exit_code == exit_ok);
    CHECK(car.out == "Car\tCar\tother\t0.900\nDemand\tDemand\tother\t0.850\n");

    const cli_result pmi = run({"wikify", "--text", "Purchasing Managers' Index", "--cache-dir",
                                cache_arg(), "--offline"});
    CHECK(pmi.exit_code == exit_ok);
    CHECK(pmi.out == "Manager_(Gaelic_games)\tManager (Gaelic games)\tother\t0.860\n");
}

TEST_CASE("wikify reads stdin when --text is absent") {
    const cli_result r =
        run({"wikify", "--cache-dir", cache_arg(), "--offline"}, "Car Sales Demand\n");
    CHECK(r.exit_code == exit_ok);
    CHECK(r.out == "Car\tCar\tother\t0.900\nDemand\tDemand\tother\t0.850\n");

    CHECK(run({"wikify", "--cache-dir", cache_arg(), "--offline"}, "").exit_code == exit_usage);
}

TEST_CASE("an offline cache miss is fatal and names the query") {
    const cli_result r = run({"wikify", "--text", "Never recorded text", "--cache-dir", cache_arg(),
                              "--offline"});
    CHECK(r.exit_code == exit_fatal);
    CHECK(r.err.find("offline cache miss") != std::string::npos);
    CHECK(r.err.find("Never recorded text") != std::string::npos);
}
