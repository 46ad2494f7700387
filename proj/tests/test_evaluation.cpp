#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "enrichkit/errors.hpp"
#include "enrichkit/evaluation.hpp"
#include "enrichkit/model.hpp"

using namespace enrichkit;

namespace {

ranked_entry make_entry(std::string id, int rank) {
    ranked_entry e;
    e.candidate.candidate_id = std::move(id);
    e.rank = rank;
    e.distance = 0.1 * rank;
    return e;
}

std::vector<ranked_entry> make_list(std::vector<std::string> ids) {
    std::vector<ranked_entry> out;
    int rank = 1;
    for (auto& id : ids) out.push_back(make_entry(std::move(id), rank++));
    return out;
}

/// Enriched record with the given per-section entry ids; emergent ids
/// get a count of 1 each.
enriched_explanation make_enriched(std::string id, std::vector<std::string> media,
                                   std::vector<std::string> emergent = {},
                                   std::vector<std::string> datasets = {},
                                   std::vector<std::string> kg = {}) {
    enriched_explanation e;
    e.explanation.explanation_id = std::move(id);
    e.ranked_media = make_list(std::move(media));
    for (auto& c : emergent) {
        e.emergent_concepts.push_back(concept_frequency{std::move(c), 1});
    }
    e.ranked_datasets = make_list(std::move(datasets));
    e.ranked_kg = make_list(std::move(kg));
    return e;
}

judgment_set judge_all(const std::vector<enriched_explanation>& enriched,
                       const std::set<std::string>& relevant_ids) {
    judgment_set judgments;
    for (const auto& e : enriched) {
        for (const auto section : all_report_sections()) {
            for (const auto& id : section_entry_ids(e, section)) {
                relevance_judgment j;
                j.explanation_id = e.explanation.explanation_id;
                j.candidate_id = id;
                j.section = section;
                j.relevant = relevant_ids.count(id) != 0;
                judgments.add(j);
            }
        }
    }
    return judgments;
}

} // namespace

TEST_CASE("section names round-trip and have display labels") {
    for (const auto section : all_report_sections()) {
        CHECK(report_section_from_string(to_string(section)) == section);
        CHECK_FALSE(display_name(section).empty());
    }
    CHECK(to_string(report_section::media_keywords_concepts) == "media_keywords_concepts");
    CHECK(display_name(report_section::media_keywords_concepts) == "Media Keywords & Concepts");
    CHECK_THROWS_AS(report_section_from_string("nonsense"), decode_error);
    CHECK(all_report_sections().size() == 4);
}

TEST_CASE("section_entry_ids walks the right list") {
    const auto e = make_enriched("exp-1", {"m1", "m2"}, {"Electric_vehicle"}, {"d1"}, {"k1", "k2"});
    CHECK(section_entry_ids(e, report_section::media_events) == std::vector<std::string>{"m1", "m2"});
    CHECK(section_entry_ids(e, report_section::media_keywords_concepts) ==
          std::vector<std::string>{"Electric_vehicle"});
    CHECK(section_entry_ids(e, report_section::datasets) == std::vector<std::string>{"d1"});
    CHECK(section_entry_ids(e, report_section::kg) == std::vector<std::string>{"k1", "k2"});
}

TEST_CASE("judgment_set stores one verdict per triple") {
    judgment_set judgments;
    relevance_judgment j;
    j.explanation_id = "exp-1";
    j.candidate_id = "m1";
    j.section = report_section::media_events;
    j.relevant = true;
    judgments.add(j);

    CHECK(judgments.is_judged("exp-1", report_section::media_events, "m1"));
    CHECK(judgments.is_relevant("exp-1", report_section::media_events, "m1"));
    // The same candidate id under another section is a separate triple.
    CHECK_FALSE(judgments.is_judged("exp-1", report_section::datasets, "m1"));
    CHECK_FALSE(judgments.is_relevant("exp-1", report_section::datasets, "m1"));
    CHECK_THROWS_AS(judgments.add(j), duplicate_id_error);

    j.section = report_section::datasets;
    j.relevant = false;
    judgments.add(j);
    CHECK(judgments.is_judged("exp-1", report_section::datasets, "m1"));
    CHECK_FALSE(judgments.is_relevant("exp-1", report_section::datasets, "m1"));
    CHECK(judgments.size() == 2);
}

TEST_CASE("judgment jsonl round-trips through load") {
    const auto file = std::filesystem::temp_directory_path() /
                      ("enrichkit_eval_judgments_" + std::to_string(::getpid()) + ".jsonl");
    {
        std::ofstream out(file);
        out << R"({"candidate_id":"m1","explanation_id":"exp-1","relevant":true,"section":"media_events"})"
            << "\n";
        out << R"({"candidate_id":"d1","explanation_id":"exp-1","relevant":false,"section":"datasets"})"
            << "\n";
    }
    const auto judgments = judgment_set::load_jsonl(file);
    CHECK(judgments.size() == 2);
    CHECK(judgments.is_relevant("exp-1", report_section::media_events, "m1"));
    CHECK_FALSE(judgments.is_relevant("exp-1", report_section::datasets, "d1"));
    std::filesystem::remove(file);
}

TEST_CASE("precision_at_k hand cases") {
    const std::vector<std::string> ids = {"a", "b", "c", "d"};
    const std::set<std::string> relevant = {"a", "c"};
    CHECK(precision_at_k(ids, relevant, 1) == 1.0);
    CHECK(precision_at_k(ids, relevant, 2) == 0.5);
    CHECK(precision_at_k(ids, relevant, 3) == doctest::Approx(2.0 / 3.0));
    CHECK(precision_at_k(ids, relevant, 4) == 0.5);

    // Shorter lists divide by the list length, not k.
    const std::vector<std::string> two = {"a", "c"};
    CHECK(precision_at_k(two, relevant, 3) == 1.0);
    CHECK(precision_at_k(two, {}, 3) == 0.0);

    CHECK_THROWS_AS(precision_at_k(ids, relevant, 0), precondition_error);
    CHECK_THROWS_AS(precision_at_k(std::vector<std::string>{}, relevant, 1), precondition_error);
}

TEST_CASE("precision_at_k against a brute-force oracle") {
    std::mt19937 rng(404);
    std::uniform_int_distribution<int> len_dist(1, 10);
    std::uniform_int_distribution<int> k_dist(0, 1);
    std::uniform_int_distribution<int> coin(0, 1);
    const std::array<int, 2> k_options = {1, 3};

    for (int trial = 0; trial < 1000; ++trial) {
        const int n = len_dist(rng);
        std::vector<std::string> ids;
        std::set<std::string> relevant;
        for (int i = 0; i < n; ++i) {
            ids.push_back("c" + std::to_string(i));
            if (coin(rng)) relevant.insert(ids.back());
        }
        const int k = k_options[static_cast<std::size_t>(k_dist(rng))];

        const int cut = std::min<int>(k, n);
        int hits = 0;
        for (int i = 0; i < cut; ++i) {
            hits += relevant.count(ids[static_cast<std::size_t>(i)]) != 0 ? 1 : 0;
        }
        const double expected = static_cast<double>(hits) / static_cast<double>(cut);
        CHECK(precision_at_k(ids, relevant, k) == expected);
    }
}

TEST_CASE("average precision skips empty sections and averages the rest") {
    std::vector<enriched_explanation> enriched;
    enriched.push_back(make_enriched("exp-1", {"m1", "m2", "m3"}));
    enriched.push_back(make_enriched("exp-2", {"m4"}));
    enriched.push_back(make_enriched("exp-3", {}));
    const auto judgments = judge_all(enriched, {"m1", "m3", "m4"});

    // exp-1 P@3 = 2/3, exp-2 P@3 = 1/1; exp-3 has no media list.
    const auto ap = average_precision_at_k(enriched, report_section::media_events, judgments, 3);
    REQUIRE(ap.has_value());
    CHECK(*ap == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0));

    // No explanation has datasets: the average does not exist.
    CHECK_FALSE(
        average_precision_at_k(enriched, report_section::datasets, judgments, 3).has_value());
}

TEST_CASE("strict mode lists every unjudged entry inside the prefix") {
    std::vector<enriched_explanation> enriched;
    enriched.push_back(make_enriched("exp-1", {"m1", "m2"}));
    judgment_set judgments;
    relevance_judgment j;
    j.explanation_id = "exp-1";
    j.candidate_id = "m1";
    j.section = report_section::media_events;
    j.relevant = true;
    judgments.add(j);

    try {
        average_precision_at_k(enriched, report_section::media_events, judgments, 3);
        FAIL("expected judgment_gap_error");
    } catch (const judgment_gap_error& e) {
        const std::string message = e.what();
        CHECK(message.find("m2") != std::string::npos);
        CHECK(message.find("exp-1") != std::string::npos);
        CHECK(message.find("m1") == std::string::npos);
    }

    // The gap is invisible at k = 1 because m2 sits outside the prefix.
    CHECK(average_precision_at_k(enriched, report_section::media_events, judgments, 1) == 1.0);

    // Lenient mode scores the gap as not relevant.
    const auto lenient = average_precision_at_k(enriched, report_section::media_events, judgments, 3,
                                                judgment_mode::lenient);
    REQUIRE(lenient.has_value());
    CHECK(*lenient == 0.5);
}

TEST_CASE("rde hand cases") {
    std::vector<enriched_explanation> enriched;
    enriched.push_back(make_enriched("exp-1", {"e1"}));
    enriched.push_back(make_enriched("exp-2", {"e1"}));
    enriched.push_back(make_enriched("exp-3", {"e2"}));

    // Pool at k = 1 is [e1, e1, e2]: two distinct over three entries.
    const auto counts = rde_counts_at_k(enriched, report_section::media_events, 1);
    CHECK(counts.total == 3);
    CHECK(counts.unique == 2);
    const auto rde = rde_at_k(enriched, report_section::media_events, 1);
    REQUIRE(rde.has_value());
    CHECK(*rde == 2.0 / 3.0);

    // All lists identical: unique stays 1 per pool position.
    CHECK_FALSE(rde_at_k(enriched, report_section::kg, 3).has_value());

    std::vector<enriched_explanation> all_same;
    all_same.push_back(make_enriched("exp-1", {"e1", "e2"}));
    all_same.push_back(make_enriched("exp-2", {"e1", "e2"}));
    const auto same = rde_at_k(all_same, report_section::media_events, 2);
    REQUIRE(same.has_value());
    CHECK(*same == 0.5);

    // Fully distinct lists score 1.
    std::vector<enriched_explanation> distinct;
    distinct.push_back(make_enriched("exp-1", {"a"}));
    distinct.push_back(make_enriched("exp-2", {"b"}));
    CHECK(*rde_at_k(distinct, report_section::media_events, 1) == 1.0);
}

TEST_CASE("rde is permutation invariant and shrinks under duplication") {
    std::vector<enriched_explanation> enriched;
    enriched.push_back(make_enriched("exp-1", {"a", "b"}));
    enriched.push_back(make_enriched("exp-2", {"c", "a"}));
    enriched.push_back(make_enriched("exp-3", {"d"}));

    std::vector<enriched_explanation> shuffled = {enriched[2], enriched[0], enriched[1]};
    CHECK(rde_at_k(enriched, report_section::media_events, 2) ==
          rde_at_k(shuffled, report_section::media_events, 2));

    // Appending a copy of an existing list can only lower the ratio.
    std::vector<enriched_explanation> duplicated = enriched;
    auto copy = enriched[0];
    copy.explanation.explanation_id = "exp-4";
    duplicated.push_back(copy);
    CHECK(*rde_at_k(duplicated, report_section::media_events, 2) <
          *rde_at_k(enriched, report_section::media_events, 2));
}

TEST_CASE("rde against a brute-force oracle") {
    std::mt19937 rng(505);
    std::uniform_int_distribution<int> pool_dist(1, 20);
    std::uniform_int_distribution<int> len_dist(0, 4);
    std::uniform_int_distribution<int> id_dist(0, 6);
    std::uniform_int_distribution<int> k_dist(1, 3);

    for (int trial = 0; trial < 1000; ++trial) {
        const int n_expl = pool_dist(rng);
        std::vector<enriched_explanation> enriched;
        for (int i = 0; i < n_expl; ++i) {
            const int len = len_dist(rng);
            std::vector<std::string> ids;
            std::set<std::string> used;
            while (static_cast<int>(ids.size()) < len) {
                const std::string id = "e" + std::to_string(id_dist(rng));
                if (used.insert(id).second) ids.push_back(id);
            }
            enriched.push_back(make_enriched("exp-" + std::to_string(i), std::move(ids)));
        }
        const int k = k_dist(rng);

        std::vector<std::string> pool;
        for (const auto& e : enriched) {
            const auto ids = section_entry_ids(e, report_section::media_events);
            for (std::size_t i = 0; i < std::min<std::size_t>(ids.size(), static_cast<std::size_t>(k));
                 ++i) {
                pool.push_back(ids[i]);
            }
        }
        const auto counts = rde_counts_at_k(enriched, report_section::media_events, k);
        CHECK(counts.total == pool.size());
        CHECK(counts.unique == std::set<std::string>(pool.begin(), pool.end()).size());
        const auto rde = rde_at_k(enriched, report_section::media_events, k);
        if (pool.empty()) {
            CHECK_FALSE(rde.has_value());
        } else {
            REQUIRE(rde.has_value());
            CHECK(*rde == static_cast<double>(counts.unique) / static_cast<double>(counts.total));
        }
    }
}

TEST_CASE("build_report crosses every section with every k") {
    std::vector<enriched_explanation> enriched;
    enriched.push_back(make_enriched("exp-1", {"m1", "m2"}, {"Electric_vehicle"}, {"d1"}, {"k1"}));
    enriched.push_back(make_enriched("exp-2", {"m1"}, {}, {"d2"}, {"k1"}));
    const auto judgments = judge_all(enriched, {"m1", "d1", "k1", "Electric_vehicle"});

    const auto report = build_report(enriched, judgments, {1, 3, 1});
    CHECK(report.ks == std::vector<int>{1, 3});
    REQUIRE(report.sections.size() == 4);

    for (std::size_t i = 0; i < report.sections.size(); ++i) {
        CHECK(report.sections[i].section == all_report_sections()[i]);
        REQUIRE(report.sections[i].cells.size() == 2);
        CHECK(report.sections[i].cells[0].k == 1);
        CHECK(report.sections[i].cells[1].k == 3);
    }

    const auto& media = report.sections[0];
    CHECK(media.cells[0].explanations == 2);
    CHECK(media.cells[0].average_precision == 1.0);
    // Pool at k = 1 is [m1, m1].
    CHECK(media.cells[0].total_entries == 2);
    CHECK(media.cells[0].unique_entries == 1);
    CHECK(media.cells[0].rde == 0.5);
    // At k = 3: exp-1 P = 1/2, exp-2 P = 1.
    CHECK(media.cells[1].average_precision == doctest::Approx(0.75));
    CHECK(media.cells[1].total_entries == 3);
    CHECK(media.cells[1].unique_entries == 2);

    const auto& emergent = report.sections[1];
    CHECK(emergent.cells[0].explanations == 1);
    CHECK(emergent.cells[0].average_precision == 1.0);
    CHECK(emergent.cells[0].rde == 1.0);

    const auto& kg = report.sections[3];
    CHECK(kg.cells[0].rde == 0.5);

    CHECK_THROWS_AS(build_report(enriched, judgments, {}), precondition_error);
    CHECK_THROWS_AS(build_report(enriched, judgments, {0}), precondition_error);
}

TEST_CASE("report json uses null for missing metrics") {
    std::vector<enriched_explanation> enriched;
    enriched.push_back(make_enriched("exp-1", {"m1"}));
    const auto judgments = judge_all(enriched, {"m1"});

    const auto report = build_report(enriched, judgments, {1});
    const auto j = to_json(report);
    CHECK(j["ks"] == nlohmann::json::array({1}));
    REQUIRE(j["sections"].size() == 4);
    CHECK(j["sections"][0]["section"] == "media_events");
    const auto& media_cell = j["sections"][0]["metrics"][0];
    CHECK(media_cell["k"] == 1);
    CHECK(media_cell["average_precision"] == 1.0);
    CHECK(media_cell["rde"] == 1.0);
    CHECK(media_cell["explanations"] == 1);
    CHECK(media_cell["total_entries"] == 1);
    CHECK(media_cell["unique_entries"] == 1);

    // The dataset section is empty everywhere: metrics are null.
    const auto& ds_cell = j["sections"][2]["metrics"][0];
    CHECK(ds_cell["average_precision"].is_null());
    CHECK(ds_cell["rde"].is_null());
    CHECK(ds_cell["explanations"] == 0);
}

TEST_CASE("rendered table shows every section with n/a for missing values") {
    std::vector<enriched_explanation> enriched;
    enriched.push_back(make_enriched("exp-1", {"m1"}));
    const auto judgments = judge_all(enriched, {"m1"});
    const auto table = render_report_table(build_report(enriched, judgments, {1, 3}));

    CHECK(table.find("Media Events") != std::string::npos);
    CHECK(table.find("Media Keywords & Concepts") != std::string::npos);
    CHECK(table.find("External Datasets") != std::string::npos);
    CHECK(table.find("Knowledge Graph") != std::string::npos);
    CHECK(table.find("Average Precision") != std::string::npos);
    CHECK(table.find("RDE") != std::string::npos);
    CHECK(table.find("K=1") != std::string::npos);
    CHECK(table.find("K=3") != std::string::npos);
    CHECK(table.find("1.000") != std::string::npos);
    CHECK(table.find("n/a") != std::string::npos);
}
