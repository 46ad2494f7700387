// Regenerates the bundled fixture pack: the keyword mapping table, a small
// explanation corpus, recorded connector payloads, and golden outputs.
// Every ranked list, emergent set, and report cell the goldens contain is
// re-derived here through the real connectors and pipeline, then checked
// against hand-computed values before anything is written. A failed check
// aborts the run with nothing half-written outside the target directory.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "enrichkit/cache.hpp"
#include "enrichkit/concepts.hpp"
#include "enrichkit/connectors.hpp"
#include "enrichkit/errors.hpp"
#include "enrichkit/evaluation.hpp"
#include "enrichkit/jsonl.hpp"
#include "enrichkit/model.hpp"
#include "enrichkit/pipeline.hpp"
#include "enrichkit/similarity.hpp"
#include "enrichkit/wikify.hpp"

namespace fs = std::filesystem;
using namespace enrichkit;

namespace {

void check(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error("fixture invariant violated: " + what);
}

void check_close(double got, double want, const std::string& what) {
    if (std::fabs(got - want) >= 1e-12) {
        throw std::runtime_error("fixture invariant violated: " + what + " (got " +
                                 std::to_string(got) + ", want " + std::to_string(want) + ")");
    }
}

/// Distance stored for a candidate sharing `hits` of the `total` concepts
/// in reference-union-candidate; written in the exact form the ranker uses
/// so comparisons below can be bitwise.
double expected_distance(int hits, int total) {
    return 1.0 - static_cast<double>(hits) / static_cast<double>(total);
}

/// Every seeded cache entry carries the same recording timestamp so the
/// pack's bytes are stable across regenerations.
instant fixture_instant() { return parse_instant("2021-06-01T00:00:00Z"); }

source_query make_source_query(const concept_set& concepts, int limit, source_kind kind) {
    source_query q;
    q.concepts = concepts.ids();
    q.limit = limit;
    q.kind = kind;
    return q;
}

std::string label_of(const std::string& concept_id) {
    std::string label = concept_id;
    for (char& c : label) {
        if (c == '_') c = ' ';
    }
    return label;
}

// ---------------------------------------------------------------------------
// Payload builders. Shapes mirror what the live services return; the decoders
// in the connector layer are the single source of truth for field names.

struct annotation_spec {
    std::string id;
    double page_rank = 0.0;
    std::vector<std::string> classes;
};

nlohmann::json wikifier_payload(const std::vector<annotation_spec>& annotations) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& ann : annotations) {
        // The connector layer drops wikified annotations below its salience
        // floor of 0.8; a seeded value under that would silently vanish.
        check(ann.page_rank >= 0.8 && ann.page_rank <= 1.0,
              "wikifier pageRank for '" + ann.id + "' must lie in [0.8,1]");
        nlohmann::json a{{"title", label_of(ann.id)},
                         {"url", "https://en.wikipedia.org/wiki/" + ann.id},
                         {"pageRank", ann.page_rank}};
        if (!ann.classes.empty()) a["classes"] = ann.classes;
        list.push_back(std::move(a));
    }
    return nlohmann::json{{"annotations", std::move(list)}};
}

struct media_concept_spec {
    std::string uri;
    double score = 0.0;
    std::string type;  // empty means the generic wiki type
};

struct media_event_spec {
    std::string id;
    std::string title;
    std::string summary;
    std::string date;  // empty means the event carries no date
    std::optional<double> relevance;
    bool annotated = true;
    std::vector<media_concept_spec> concepts;
};

nlohmann::json media_payload(const std::vector<media_event_spec>& events) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : events) {
        nlohmann::json item{{"id", e.id}, {"title", e.title}};
        if (!e.summary.empty()) item["summary"] = e.summary;
        if (!e.date.empty()) item["date"] = e.date;
        if (e.relevance) item["relevance"] = *e.relevance;
        if (e.annotated) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& c : e.concepts) {
                check(c.score >= 0.0 && c.score <= 1.0,
                      "media concept score for '" + c.uri + "' must lie in [0,1]");
                nlohmann::json cj{{"uri", c.uri}, {"score", c.score}};
                if (!c.type.empty()) cj["type"] = c.type;
                arr.push_back(std::move(cj));
            }
            item["concepts"] = std::move(arr);
        }
        list.push_back(std::move(item));
    }
    return nlohmann::json{{"events", std::move(list)}};
}

struct dataset_spec {
    std::string id;
    std::string title;
    std::string notes;
    std::string publisher;
    std::string created;  // empty means no creation date
};

nlohmann::json dataset_payload(const std::vector<dataset_spec>& rows) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& d : rows) {
        nlohmann::json item{{"id", d.id}, {"title", d.title}, {"notes", d.notes}};
        if (!d.publisher.empty()) item["organization"] = nlohmann::json{{"title", d.publisher}};
        if (!d.created.empty()) item["metadata_created"] = d.created;
        list.push_back(std::move(item));
    }
    return nlohmann::json{{"result", nlohmann::json{{"results", std::move(list)}}}};
}

struct kg_entity_spec {
    std::string id;
    std::string name;
    std::string description;
    std::vector<std::string> types;
};

nlohmann::json kg_payload(const std::vector<std::pair<const kg_entity_spec*, double>>& rows) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [entity, score] : rows) {
        nlohmann::json result{{"@id", entity->id},
                              {"name", entity->name},
                              {"description", entity->description},
                              {"@type", entity->types}};
        list.push_back(nlohmann::json{{"result", std::move(result)}, {"resultScore", score}});
    }
    return nlohmann::json{{"itemListElement", std::move(list)}};
}

/// The text a connector wikifies for a dataset row: title plus notes plus
/// the publisher line, exactly as the dataset connector assembles it.
std::string dataset_text(const dataset_spec& d) {
    std::string body = d.notes;
    if (!d.publisher.empty()) body += "\nPublisher: " + d.publisher;
    return candidate_wikify_text(d.title, body);
}

std::string entity_text(const kg_entity_spec& e) {
    return candidate_wikify_text(e.name, e.description);
}

std::string event_text(const media_event_spec& e) {
    return candidate_wikify_text(e.title, e.summary);
}

// ---------------------------------------------------------------------------
// Fixture corpus definition.

struct mapping_row {
    std::string keyword;
    std::vector<std::pair<std::string, std::string>> concepts;  // id, label
};

std::vector<mapping_row> table1_rows() {
    return {
        {"Car Sales Demand", {{"Car", "Car"}, {"Demand", "Demand"}}},
        {"New Car Sales", {{"Car", "Car"}, {"Sales", "Sales"}}},
        {"Vehicle Sales", {{"Vehicle", "Vehicle"}}},
        {"Car Demand", {{"Car", "Car"}, {"Demand", "Demand"}}},
        {"Automotive Industry", {{"Automotive_industry", "Automotive Industry"}}},
        {"Global GDP Projection",
         {{"Gross_domestic_product", "Gross Domestic Product"},
          {"Gross_world_product", "Gross World Product"}}},
        {"Global Economic Outlook", {{"Economy", "Economy"}, {"World_economy", "World economy"}}},
        {"Economic Forecast", {{"Forecasting", "Forecasting"}, {"Economy", "Economy"}}},
        {"Unemployment Rate", {{"Unemployment", "Unemployment"}}},
        {"Unemployment Numbers", {{"Unemployment", "Unemployment"}}},
        {"Unemployment Report", {{"Unemployment", "Unemployment"}}},
        {"Employment Growth", {{"Employment", "Employment"}}},
        {"Long-term Unemployment", {{"Unemployment", "Unemployment"}}},
        {"Purchasing Managers' Index", {{"Manager_(Gaelic_games)", "Manager (Gaelic games)"}}},
    };
}

feature_keyword make_keyword(const std::string& phrase) {
    feature_keyword kw;
    kw.phrase = phrase;
    kw.canonical_id = normalize_label(phrase);
    return kw;
}

explanation_record make_record(const std::string& id, const std::string& product,
                               const std::string& period,
                               const std::vector<std::string>& phrases) {
    explanation_record rec;
    rec.explanation_id = id;
    rec.product_id = product;
    rec.period = period;
    for (const auto& p : phrases) rec.feature_keywords.push_back(make_keyword(p));
    return rec;
}

/// One explanation group: the records sharing a reference set, the media
/// payload recorded for that set, and the hand-computed expectations for
/// every derived list. Distances are given as (hits, total) pairs through
/// expected_distance so they match the ranker bit for bit.
struct group_plan {
    std::string label;
    std::vector<media_event_spec> events;
    std::vector<std::pair<std::string, double>> media_order;
    std::vector<std::pair<std::string, int>> emergent;
    std::vector<std::string> anchor;
    std::vector<dataset_spec> datasets;
    std::vector<std::pair<std::string, double>> dataset_order;
    std::vector<std::pair<std::string, double>> kg_order;
};

void check_ranked(const std::vector<ranked_entry>& got,
                  const std::vector<std::pair<std::string, double>>& want,
                  const std::string& what) {
    check(got.size() == want.size(), what + ": expected " + std::to_string(want.size()) +
                                         " entries, got " + std::to_string(got.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
        check(got[i].candidate.candidate_id == want[i].first,
              what + ": rank " + std::to_string(i + 1) + " is '" +
                  got[i].candidate.candidate_id + "', expected '" + want[i].first + "'");
        check(got[i].rank == static_cast<int>(i) + 1, what + ": rank field at " + std::to_string(i));
        check(got[i].distance == want[i].second,
              what + ": distance of '" + want[i].first + "' is " +
                  std::to_string(got[i].distance) + ", expected " + std::to_string(want[i].second));
    }
}

void check_emergent(const std::vector<concept_frequency>& got,
                    const std::vector<std::pair<std::string, int>>& want, const std::string& what) {
    check(got.size() == want.size(), what + ": emergent length");
    for (std::size_t i = 0; i < got.size(); ++i) {
        check(got[i].concept_id == want[i].first && got[i].count == want[i].second,
              what + ": emergent entry " + std::to_string(i) + " is '" + got[i].concept_id + "':" +
                  std::to_string(got[i].count) + ", expected '" + want[i].first + "':" +
                  std::to_string(want[i].second));
    }
}

}  // namespace

int main(int argc, char** argv) try {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("fixtures");
    fs::remove_all(out);
    fs::create_directories(out / "golden");

    // ------------------------------------------------------------------
    // Mapping table and explanation corpus.

    {
        jsonl_writer writer(out / "table1.jsonl");
        for (const auto& row : table1_rows()) {
            nlohmann::json concepts = nlohmann::json::array();
            for (const auto& [id, label] : row.concepts) {
                concepts.push_back(nlohmann::json{{"id", id}, {"label", label}});
            }
            writer.write(nlohmann::json{{"keyword", row.keyword}, {"concepts", std::move(concepts)}});
        }
        writer.close();
    }
    const keyword_concept_mapping mapping = keyword_concept_mapping::load_jsonl(out / "table1.jsonl");
    check(mapping.entries().size() == 14, "mapping table must hold 14 entries");

    const std::vector<explanation_record> records = {
        make_record("exp-01", "prod-56", "2021-03", {"Car Sales Demand", "New Car Sales"}),
        make_record("exp-02", "prod-56", "2021-04", {"Car Sales Demand", "New Car Sales"}),
        make_record("exp-03", "prod-56", "2021-05", {"Car Sales Demand", "New Car Sales"}),
        make_record("exp-04", "prod-57", "2021-03", {"Vehicle Sales", "Automotive Industry"}),
        make_record("exp-05", "prod-57", "2021-04", {"Vehicle Sales", "Automotive Industry"}),
        make_record("exp-06", "prod-58", "2021-03", {"Global GDP Projection", "Global Economic Outlook"}),
        make_record("exp-07", "prod-58", "2021-04", {"Global GDP Projection", "Global Economic Outlook"}),
        make_record("exp-08", "prod-59", "2021-03", {"Unemployment Rate", "Employment Growth"}),
        make_record("exp-09", "prod-59", "2021-04", {"Unemployment Rate", "Employment Growth"}),
        make_record("exp-10", "prod-60", "2021-03", {"Economic Forecast"}),
        make_record("exp-11", "prod-61", "2021-03", {"Purchasing Managers' Index"}),
        make_record("exp-12", "prod-62", "2021-03", {"Car Demand", "Long-term Unemployment"}),
    };
    {
        jsonl_writer writer(out / "explanations.jsonl");
        for (const auto& rec : records) writer.write(to_json(rec));
        writer.close();
    }
    {
        // Partial corpus: one record replaying already-cached queries and
        // one whose keyword has no mapping, for exercising partial failure.
        jsonl_writer writer(out / "explanations_partial.jsonl");
        writer.write(to_json(make_record("exp-91", "prod-56", "2021-06",
                                         {"Car Sales Demand", "New Car Sales"})));
        writer.write(to_json(make_record("exp-92", "prod-99", "2021-06", {"Unknown Feature"})));
        writer.close();
    }

    // ------------------------------------------------------------------
    // Group definitions. Events shared between groups are defined once so
    // both payloads embed byte-identical records.

    const media_event_spec m_a1{"m-a1",
                                "EV demand lifts new car sales",
                                "Sales of new cars rose as electric vehicle demand accelerated.",
                                "2021-02-03",
                                0.92,
                                true,
                                {{"Car", 0.9, ""}, {"Demand", 0.85, ""}, {"Electric_vehicle", 0.9, ""}}};
    const media_event_spec m_c1{"m-c1",
                                "World economy growth forecast cut",
                                "Forecasters trimmed world economy growth projections.",
                                "2021-04-05",
                                0.95,
                                true,
                                {{"World_economy", 0.9, ""}, {"Economy", 0.85, ""}, {"Forecasting", 0.82, ""}}};

    const dataset_spec ds_a1{"ds-a1", "New passenger car registrations",
                             "Monthly new passenger car registrations by country.", "Eurostat",
                             "2021-01-15"};
    const dataset_spec ds_a2{"ds-a2", "Electric vehicle charging points",
                             "Number of public charging points.", "Open Data EU", "2020-11-02"};
    const dataset_spec ds_gdp{"ds-gdp", "Quarterly GDP statistics",
                              "Seasonally adjusted quarterly gross domestic product.", "Eurostat",
                              "2020-06-30"};
    const dataset_spec ds_b1{"ds-b1", "Motor vehicle production statistics",
                             "Annual motor vehicle production volumes.", "OICA", ""};
    const dataset_spec ds_b2{"ds-b2", "Global supply chain pressure index",
                             "Composite index of supply chain stress.", "NY Fed", "2021-02-01"};
    const dataset_spec ds_c2{"ds-c2", "Harmonised index of consumer prices",
                             "Monthly consumer price inflation.", "Eurostat", "2020-01-10"};
    const dataset_spec ds_d1{"ds-d1", "Monthly unemployment statistics",
                             "Unemployment rates by age and sex.", "Eurostat", "2021-03-05"};
    const dataset_spec ds_d2{"ds-d2", "Labour force survey",
                             "Quarterly labour force participation data.", "Eurostat", ""};
    const dataset_spec ds_e1{"ds-e1", "Economic sentiment indicator",
                             "Monthly economic sentiment survey results.", "European Commission",
                             "2021-04-20"};
    const dataset_spec ds_f1{"ds-f1", "Industrial production index",
                             "Monthly industrial production volumes.", "Eurostat", "2021-05-12"};
    const std::vector<const dataset_spec*> all_datasets = {&ds_a1, &ds_a2, &ds_gdp, &ds_b1, &ds_b2,
                                                           &ds_c2, &ds_d1, &ds_d2, &ds_e1, &ds_f1};

    const kg_entity_spec kg_rivian{"kg:/g/rivian", "Rivian",
                                   "American electric vehicle manufacturer.",
                                   {"Corporation", "Organization", "Thing"}};
    const kg_entity_spec kg_polestar{"kg:/g/polestar", "Polestar",
                                     "Swedish electric performance car brand.",
                                     {"Corporation", "Organization", "Thing"}};
    const kg_entity_spec kg_vinfast{"kg:/g/vinfast", "VinFast",
                                    "Vietnamese automobile manufacturer.",
                                    {"Corporation", "Organization", "Thing"}};
    const kg_entity_spec kg_faurecia{"kg:/g/faurecia", "Faurecia", "French automotive supplier.",
                                     {"Corporation", "Organization", "Thing"}};
    const kg_entity_spec kg_flinkster{"kg:/g/flinkster", "Flinkster", "German carsharing company.",
                                      {"Corporation", "Organization", "Thing"}};
    const kg_entity_spec kg_plug{"kg:/g/plug_power", "Plug Power",
                                 "Developer of hydrogen fuel cell systems to replace conventional batteries.",
                                 {"Corporation", "Organization", "Thing"}};
    const kg_entity_spec kg_boa{"kg:/g/bank_of_america", "Bank of America",
                                "American multinational investment bank.",
                                {"Corporation", "Organization", "Thing"}};
    const kg_entity_spec kg_db{"kg:/g/deutsche_bank", "Deutsche Bank",
                               "German multinational investment bank.",
                               {"Corporation", "Organization", "Thing"}};
    const kg_entity_spec kg_denison{"kg:/g/denison", "Edward Fulton Denison",
                                    "American economist who pioneered the measurement of the United "
                                    "States Gross Domestic Product.",
                                    {"Person", "Thing"}};
    const std::vector<const kg_entity_spec*> all_entities = {
        &kg_rivian, &kg_polestar, &kg_vinfast, &kg_faurecia, &kg_flinkster,
        &kg_plug,   &kg_boa,      &kg_db,      &kg_denison};

    // Knowledge-graph responses per query concept; concepts absent from
    // this map return an empty item list.
    const std::map<std::string, std::vector<std::pair<const kg_entity_spec*, double>>> kg_results = {
        {"Car", {{&kg_rivian, 120.0}, {&kg_flinkster, 60.0}}},
        {"Demand", {{&kg_db, 70.0}}},
        {"Sales", {{&kg_polestar, 90.0}}},
        {"Electric_vehicle", {{&kg_rivian, 140.0}, {&kg_polestar, 95.0}, {&kg_plug, 80.0}}},
        {"Automotive_industry", {{&kg_faurecia, 110.0}, {&kg_vinfast, 75.0}}},
        {"Economy", {{&kg_boa, 85.0}, {&kg_db, 70.0}}},
        {"Gross_domestic_product", {{&kg_denison, 100.0}}},
        {"Semiconductor", {}},
        {"Supply_chain", {}},
        {"Vehicle", {}},
        {"Gross_world_product", {}},
        {"World_economy", {}},
        {"Forecasting", {}},
        {"Inflation", {}},
        {"Employment", {}},
        {"Labour_economics", {}},
        {"Unemployment", {}},
        {"Sport", {}},
        {"Manager_(Gaelic_games)", {}},
        {"Manufacturing", {}},
        {"Price", {}},
    };

    std::vector<group_plan> groups;
    {
        group_plan a;
        a.label = "group A";
        a.events = {
            m_a1,
            {"m-a2",
             "Car sales climb as chip supply recovers",
             "New car sales improved after semiconductor deliveries resumed.",
             "2021-02-10",
             0.88,
             true,
             {{"Car", 0.88, ""}, {"Sales", 0.84, ""}, {"Semiconductor", 0.82, ""}}},
            {"m-a3",
             "Angela Merkel opens Germany auto show",
             "The chancellor toured the Germany auto show ahead of new model launches.",
             "2021-02-17",
             0.75,
             true,
             {{"Car", 0.8, ""},
              {"Angela_Merkel", 0.88, "person"},
              {"Germany", 0.85, "loc"},
              {"Automotive_industry", 0.83, ""}}},
            {"m-a4",
             "Electric vehicle demand outpaces supply",
             "Battery electric vehicle demand keeps climbing while car makers race to expand output.",
             "",
             std::nullopt,
             false,
             {}},
            {"m-a5",
             "Gaelic football championship preview",
             "Counties name their squads for the championship opener.",
             "2021-02-21",
             0.5,
             true,
             {{"Dublin", 0.9, "loc"}}},
        };
        a.media_order = {{"m-a1", expected_distance(2, 4)},
                         {"m-a2", expected_distance(2, 4)},
                         {"m-a4", expected_distance(2, 4)},
                         {"m-a3", expected_distance(1, 4)},
                         {"m-a5", expected_distance(0, 3)}};
        a.emergent = {{"Electric_vehicle", 2}, {"Automotive_industry", 1}, {"Semiconductor", 1}};
        a.anchor = {"Automotive_industry", "Car", "Demand", "Electric_vehicle", "Sales", "Semiconductor"};
        a.datasets = {ds_a1, ds_a2, ds_gdp};
        a.dataset_order = {{"ds-a1", expected_distance(2, 6)},
                           {"ds-a2", expected_distance(1, 6)},
                           {"ds-gdp", expected_distance(0, 7)}};
        a.kg_order = {{"kg:/g/rivian", expected_distance(2, 6)},
                      {"kg:/g/polestar", expected_distance(2, 6)},
                      {"kg:/g/vinfast", expected_distance(2, 6)},
                      {"kg:/g/faurecia", expected_distance(1, 6)},
                      {"kg:/g/flinkster", expected_distance(1, 7)},
                      {"kg:/g/plug_power", expected_distance(0, 8)},
                      {"kg:/g/deutsche_bank", expected_distance(0, 7)}};
        groups.push_back(std::move(a));

        group_plan b;
        b.label = "group B";
        b.events = {
            {"m-b1",
             "Automotive industry output rebounds",
             "Factories across the automotive industry raised output this quarter.",
             "2021-03-02",
             0.9,
             true,
             {{"Automotive_industry", 0.92, ""}, {"Supply_chain", 0.85, ""}}},
            {"m-b2",
             "Vehicle production halted by chip shortage",
             "Several vehicle plants paused lines for lack of semiconductors.",
             "2021-03-09",
             0.8,
             true,
             {{"Vehicle", 0.9, ""}, {"Semiconductor", 0.88, ""}, {"Supply_chain", 0.8, ""}}},
            {"m-b3",
             "Elon Musk comments on vehicle market",
             "The executive weighed in on used vehicle prices.",
             "2021-03-16",
             0.7,
             true,
             {{"Elon_Musk", 0.95, "person"}, {"Vehicle", 0.85, ""}, {"Car", 0.8, ""}}},
            {"m-b4",
             "Supply chain woes hit automotive industry",
             "Parts shortages ripple through the automotive industry.",
             "2021-03-20",
             std::nullopt,
             false,
             {}},
        };
        b.media_order = {{"m-b1", expected_distance(1, 3)},
                         {"m-b3", expected_distance(1, 3)},
                         {"m-b4", expected_distance(1, 3)},
                         {"m-b2", expected_distance(1, 4)}};
        b.emergent = {{"Supply_chain", 3}, {"Car", 1}, {"Semiconductor", 1}};
        b.anchor = {"Automotive_industry", "Car", "Semiconductor", "Supply_chain", "Vehicle"};
        b.datasets = {ds_b1, ds_b2};
        b.dataset_order = {{"ds-b1", expected_distance(2, 5)}, {"ds-b2", expected_distance(1, 5)}};
        b.kg_order = {{"kg:/g/vinfast", expected_distance(2, 5)},
                      {"kg:/g/faurecia", expected_distance(1, 5)},
                      {"kg:/g/rivian", expected_distance(1, 6)},
                      {"kg:/g/flinkster", expected_distance(1, 6)}};
        groups.push_back(std::move(b));

        group_plan c;
        c.label = "group C";
        c.events = {
            m_c1,
            {"m-c2",
             "GDP rebounds in major economies",
             "Quarterly gross domestic product rose across major economies.",
             "2021-04-12",
             0.85,
             true,
             {{"Gross_domestic_product", 0.92, ""}, {"Economy", 0.84, ""}}},
            {"m-c3",
             "Inflation weighs on world economy",
             "Rising prices slow the world economy recovery.",
             "2021-04-19",
             0.8,
             true,
             {{"Inflation", 0.9, ""}, {"World_economy", 0.8, ""}}},
            {"m-c4",
             "Germany economy update",
             "New figures sketch the Germany economy this spring.",
             "2021-04-26",
             0.6,
             true,
             {{"Germany", 0.9, "loc"}, {"Economy", 0.82, ""}}},
        };
        c.media_order = {{"m-c2", expected_distance(2, 4)},
                         {"m-c1", expected_distance(2, 5)},
                         {"m-c4", expected_distance(1, 4)},
                         {"m-c3", expected_distance(1, 5)}};
        c.emergent = {{"Forecasting", 1}, {"Inflation", 1}};
        c.anchor = {"Economy", "Forecasting", "Gross_domestic_product", "Gross_world_product",
                    "Inflation", "World_economy"};
        c.datasets = {ds_gdp, ds_c2};
        c.dataset_order = {{"ds-c2", expected_distance(1, 6)}, {"ds-gdp", expected_distance(1, 6)}};
        c.kg_order = {{"kg:/g/denison", expected_distance(1, 6)},
                      {"kg:/g/bank_of_america", expected_distance(0, 7)},
                      {"kg:/g/deutsche_bank", expected_distance(0, 7)}};
        groups.push_back(std::move(c));

        group_plan d;
        d.label = "group D";
        d.events = {
            {"m-d1",
             "Unemployment rate falls",
             "The unemployment rate edged lower as the economy reopened.",
             "2021-05-04",
             0.9,
             true,
             {{"Unemployment", 0.92, ""}, {"Economy", 0.8, ""}}},
            {"m-d2",
             "Employment growth beats expectations",
             "Employers added jobs at the fastest pace in years.",
             "2021-05-11",
             0.85,
             true,
             {{"Employment", 0.9, ""}, {"Labour_economics", 0.82, ""}}},
            {"m-d3",
             "Jobless claims rise in Europe",
             "Unemployment claims ticked up across Europe.",
             "2021-05-18",
             0.7,
             true,
             {{"Unemployment", 0.88, ""}, {"Europe", 0.85, "loc"}}},
        };
        d.media_order = {{"m-d3", expected_distance(1, 2)},
                         {"m-d1", expected_distance(1, 3)},
                         {"m-d2", expected_distance(1, 3)}};
        d.emergent = {{"Economy", 1}, {"Labour_economics", 1}};
        d.anchor = {"Economy", "Employment", "Labour_economics", "Unemployment"};
        d.datasets = {ds_d1, ds_d2};
        d.dataset_order = {{"ds-d2", expected_distance(2, 4)}, {"ds-d1", expected_distance(1, 4)}};
        d.kg_order = {{"kg:/g/bank_of_america", expected_distance(0, 5)},
                      {"kg:/g/deutsche_bank", expected_distance(0, 5)}};
        groups.push_back(std::move(d));

        group_plan e;
        e.label = "group E";
        e.events = {
            {"m-e1",
             "Economic forecast revised upward",
             "Economists lifted their forecast for the economy.",
             "2021-06-07",
             0.9,
             true,
             {{"Economy", 0.9, ""}, {"Forecasting", 0.88, ""}}},
            m_c1,
            {"m-e2",
             "Sports season forecast",
             "Pundits forecast the coming sport season.",
             "2021-06-14",
             0.4,
             true,
             {{"Forecasting", 0.8, ""}, {"Sport", 0.85, ""}}},
        };
        e.media_order = {{"m-e1", expected_distance(2, 2)},
                         {"m-c1", expected_distance(2, 3)},
                         {"m-e2", expected_distance(1, 3)}};
        e.emergent = {{"Sport", 1}, {"World_economy", 1}};
        e.anchor = {"Economy", "Forecasting", "Sport", "World_economy"};
        e.datasets = {ds_e1, ds_gdp};
        e.dataset_order = {{"ds-e1", expected_distance(1, 4)}, {"ds-gdp", expected_distance(0, 5)}};
        e.kg_order = {{"kg:/g/bank_of_america", expected_distance(0, 5)},
                      {"kg:/g/deutsche_bank", expected_distance(0, 5)}};
        groups.push_back(std::move(e));

        group_plan f;
        f.label = "group F";
        f.events = {
            {"m-f1",
             "Factory activity survey signals expansion",
             "Purchasing managers report rising new orders across factories.",
             "2021-07-05",
             0.8,
             false,
             {}},
            {"m-f2",
             "Manufacturing orders drop",
             "Manufacturing orders fell for a second month.",
             "2021-07-12",
             0.9,
             true,
             {{"Manufacturing", 0.9, ""}}},
        };
        f.media_order = {{"m-f2", expected_distance(0, 2)}, {"m-f1", expected_distance(0, 3)}};
        f.emergent = {{"Manufacturing", 2}, {"Economy", 1}};
        f.anchor = {"Economy", "Manager_(Gaelic_games)", "Manufacturing"};
        f.datasets = {ds_f1};
        f.dataset_order = {{"ds-f1", expected_distance(1, 3)}};
        f.kg_order = {{"kg:/g/bank_of_america", expected_distance(0, 4)},
                      {"kg:/g/deutsche_bank", expected_distance(0, 4)}};
        groups.push_back(std::move(f));

        group_plan g;
        g.label = "group G";
        g.events = {
            {"m-g1",
             "Unemployment dents car demand",
             "Car demand softened where unemployment stayed high.",
             "2021-08-02",
             0.85,
             true,
             {{"Unemployment", 0.9, ""}, {"Car", 0.85, ""}, {"Demand", 0.8, ""}}},
            m_a1,
            {"m-g2",
             "Used car prices soar as demand shifts",
             "Scarce new cars push buyers to the used market.",
             "2021-08-09",
             std::nullopt,
             false,
             {}},
        };
        g.media_order = {{"m-g1", expected_distance(3, 3)},
                         {"m-a1", expected_distance(2, 4)},
                         {"m-g2", expected_distance(2, 4)}};
        g.emergent = {{"Electric_vehicle", 1}, {"Price", 1}};
        g.anchor = {"Car", "Demand", "Electric_vehicle", "Price", "Unemployment"};
        g.datasets = {};
        g.dataset_order = {};
        g.kg_order = {{"kg:/g/rivian", expected_distance(2, 5)},
                      {"kg:/g/polestar", expected_distance(2, 5)},
                      {"kg:/g/flinkster", expected_distance(1, 6)},
                      {"kg:/g/plug_power", expected_distance(0, 7)},
                      {"kg:/g/deutsche_bank", expected_distance(0, 6)}};
        groups.push_back(std::move(g));
    }

    // Index of the first record of each group; the remaining records of a
    // group share its reference set and therefore its cached queries.
    const std::vector<std::size_t> group_first = {0, 3, 5, 7, 9, 10, 11};
    check(group_first.size() == groups.size(), "one representative record per group");

    // ------------------------------------------------------------------
    // Cache seeding. Wikifier entries must exist before the connectors run
    // because annotation-less candidates are wikified during decoding.

    cache_store cache(out / "cache");
    const auto seed = [&cache](const std::string& bucket, const std::string& hash,
                               const nlohmann::json& payload) {
        cache.put({bucket, hash, payload.dump(), fixture_instant()});
    };
    const auto seed_wikifier = [&](const std::string& text,
                                   const std::vector<annotation_spec>& annotations) {
        seed("wikifier", wikifier_request_hash({text}), wikifier_payload(annotations));
    };

    // Texts wikified for annotation-less media events.
    std::map<std::string, std::vector<annotation_spec>> event_annotations;
    for (const auto& g : groups) {
        for (const auto& e : g.events) {
            if (e.annotated) continue;
            event_annotations.emplace(e.id, std::vector<annotation_spec>{});
        }
    }
    event_annotations["m-a4"] = {{"Electric_vehicle", 0.95, {}}, {"Demand", 0.9, {}}, {"Car", 0.85, {}}};
    event_annotations["m-b4"] = {{"Supply_chain", 0.9, {}}, {"Automotive_industry", 0.85, {}}};
    event_annotations["m-f1"] = {{"Manufacturing", 0.9, {}}, {"Economy", 0.82, {}}};
    event_annotations["m-g2"] = {{"Car", 0.93, {}}, {"Demand", 0.88, {}}, {"Price", 0.84, {}}};
    for (const auto& g : groups) {
        for (const auto& e : g.events) {
            if (e.annotated) continue;
            const auto it = event_annotations.find(e.id);
            check(it != event_annotations.end() && !it->second.empty(),
                  "annotation-less event '" + e.id + "' needs a wikifier seed");
            seed_wikifier(event_text(e), it->second);
        }
    }

    // Texts wikified for dataset rows.
    const std::map<std::string, std::vector<annotation_spec>> dataset_annotations = {
        {"ds-a1", {{"Car", 0.92, {}}, {"Sales", 0.85, {}}}},
        {"ds-a2", {{"Electric_vehicle", 0.9, {}}}},
        {"ds-gdp", {{"Gross_domestic_product", 0.94, {}}}},
        {"ds-b1", {{"Vehicle", 0.9, {}}, {"Automotive_industry", 0.86, {}}}},
        {"ds-b2", {{"Supply_chain", 0.91, {}}}},
        {"ds-c2", {{"Inflation", 0.9, {}}}},
        {"ds-d1", {{"Unemployment", 0.93, {}}}},
        {"ds-d2", {{"Labour_economics", 0.88, {}}, {"Employment", 0.84, {}}}},
        {"ds-e1", {{"Economy", 0.87, {}}}},
        {"ds-f1", {{"Manufacturing", 0.9, {}}}},
    };
    for (const dataset_spec* d : all_datasets) {
        seed_wikifier(dataset_text(*d), dataset_annotations.at(d->id));
    }

    // Texts wikified for knowledge-graph entities. The Denison annotation
    // carries the upstream person class so the filter removes it.
    const std::map<std::string, std::vector<annotation_spec>> entity_annotations = {
        {"kg:/g/rivian", {{"Electric_vehicle", 0.93, {}}, {"Car", 0.82, {}}}},
        {"kg:/g/polestar", {{"Electric_vehicle", 0.9, {}}, {"Car", 0.85, {}}}},
        {"kg:/g/vinfast", {{"Car", 0.9, {}}, {"Automotive_industry", 0.83, {}}}},
        {"kg:/g/faurecia", {{"Automotive_industry", 0.88, {}}}},
        {"kg:/g/flinkster", {{"Carsharing", 0.9, {}}, {"Car", 0.81, {}}}},
        {"kg:/g/plug_power", {{"Fuel_cell", 0.9, {}}, {"Electric_battery", 0.82, {}}}},
        {"kg:/g/bank_of_america", {{"Bank", 0.9, {}}}},
        {"kg:/g/deutsche_bank", {{"Bank", 0.92, {}}}},
        {"kg:/g/denison",
         {{"Edward_Fulton_Denison", 0.95, {"human"}}, {"Gross_domestic_product", 0.85, {}}}},
    };
    for (const kg_entity_spec* e : all_entities) {
        seed_wikifier(entity_text(*e), entity_annotations.at(e->id));
    }

    // Free-text lookups replayed by the wikify command.
    seed_wikifier("Car Sales Demand", {{"Car", 0.9, {}}, {"Demand", 0.85, {}}});
    seed_wikifier("Purchasing Managers' Index", {{"Manager_(Gaelic_games)", 0.86, {}}});

    // Knowledge-graph payloads, one per query concept.
    for (const auto& [concept_id, rows] : kg_results) {
        concept_set single;
        single.insert(concept_id);
        const pipeline_config defaults;
        seed("kg_entity",
             query_hash(make_source_query(single, defaults.kg_limit, source_kind::kg_entity)),
             kg_payload(rows));
    }

    // ------------------------------------------------------------------
    // Per-group seeding and verification of the derived lists. The media
    // payload is recorded under the group's reference-set query; the
    // dataset payload under the anchor-set query computed from it.

    const pipeline_config cfg;
    concept_catalog catalog;
    for (const auto& entry : mapping.entries()) {
        for (const auto& item : entry.concepts) catalog.observe(item);
    }
    const classification_map classes = classification_map::defaults();
    wikifier_options wopt;
    cached_wikifier_client wikifier(cache, classes, wopt);
    connector_options copt;
    media_event_connector media(cache, wikifier, catalog, copt, nullptr);
    const jaccard_ranker ranker;

    std::set<std::string> anchor_union;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const group_plan& g = groups[gi];
        const explanation_record& rep = records[group_first[gi]];
        const concept_set reference = build_reference_concepts(rep, mapping, cfg);

        const source_query media_query =
            make_source_query(reference, cfg.media_limit, source_kind::media_event);
        seed("media_event", query_hash(media_query), media_payload(g.events));

        const auto ranked = ranker.rank(reference, media.query(media_query));
        check_ranked(ranked, g.media_order, g.label + " media ranking");

        const auto emergent = emergent_concepts(ranked, cfg.top_n, cfg.max_m, reference, catalog,
                                                cfg.emergent_exclude_reference);
        check_emergent(emergent, g.emergent, g.label);

        concept_set anchor = reference;
        for (const auto& freq : emergent) anchor.insert(freq.concept_id);
        check(anchor.ids() == g.anchor, g.label + ": anchor set mismatch");
        for (const auto& id : anchor.ids()) anchor_union.insert(id);

        seed("dataset", query_hash(make_source_query(anchor, cfg.dataset_limit, source_kind::dataset)),
             dataset_payload(g.datasets));
    }
    {
        // Every anchor concept must have a recorded graph response and no
        // recorded response may be unreachable.
        std::set<std::string> kg_keys;
        for (const auto& [concept_id, rows] : kg_results) kg_keys.insert(concept_id);
        check(kg_keys == anchor_union, "knowledge-graph seeds must cover exactly the anchor concepts");
    }

    // ------------------------------------------------------------------
    // Full offline pipeline run over the corpus, mirroring the command
    // line stack, followed by the golden outputs.

    concept_catalog run_catalog;
    for (const auto& entry : mapping.entries()) {
        for (const auto& item : entry.concepts) run_catalog.observe(item);
    }
    cached_wikifier_client run_wikifier(cache, classes, wopt);
    media_event_connector run_media(cache, run_wikifier, run_catalog, copt, nullptr);
    dataset_catalog_connector run_datasets(cache, run_wikifier, run_catalog, copt, nullptr);
    knowledge_graph_connector run_kg(cache, run_wikifier, run_catalog, copt, nullptr);
    const enrichment_pipeline pipeline(run_media, run_datasets, run_kg, run_catalog, ranker);

    const corpus_result result = pipeline.enrich_corpus(records, mapping, cfg, corpus_options{});
    check(result.errors.empty(), "corpus enrichment must succeed for every record");
    check(result.enriched.size() == records.size(), "corpus enrichment must keep every record");

    for (std::size_t gi = 0, ri = 0; gi < groups.size(); ++gi) {
        const group_plan& g = groups[gi];
        const std::size_t next_first =
            gi + 1 < groups.size() ? group_first[gi + 1] : records.size();
        for (; ri < next_first; ++ri) {
            const enriched_explanation& e = result.enriched[ri];
            const std::string what = g.label + " record " + e.explanation.explanation_id;
            check_ranked(e.ranked_media, g.media_order, what + " media");
            check_emergent(e.emergent_concepts, g.emergent, what);
            check_ranked(e.ranked_datasets, g.dataset_order, what + " datasets");
            check_ranked(e.ranked_kg, g.kg_order, what + " graph");
        }
    }

    // Filter guarantee: no person or place concept survives into any
    // candidate set or the emergent list.
    const auto check_filtered = [&](const concept_set& s, const std::string& what) {
        for (const auto& id : s.ids()) {
            const concept_class c = run_catalog.classification_of(id);
            check(c != concept_class::person && c != concept_class::place,
                  what + " contains excluded concept '" + id + "'");
        }
    };
    for (const auto& e : result.enriched) {
        const std::string who = e.explanation.explanation_id;
        check_filtered(e.reference_concepts, who + " reference set");
        for (const auto& r : e.ranked_media) check_filtered(r.candidate.concepts, who + " media candidate");
        for (const auto& r : e.ranked_datasets) check_filtered(r.candidate.concepts, who + " dataset candidate");
        for (const auto& r : e.ranked_kg) check_filtered(r.candidate.concepts, who + " graph candidate");
        for (const auto& freq : e.emergent_concepts) {
            const concept_class c = run_catalog.classification_of(freq.concept_id);
            check(c != concept_class::person && c != concept_class::place,
                  who + " emergent list contains excluded concept '" + freq.concept_id + "'");
        }
    }

    {
        jsonl_writer writer(out / "golden" / "enriched.jsonl");
        for (const auto& e : result.enriched) writer.write(to_json(e));
        writer.close();
    }

    // ------------------------------------------------------------------
    // Judgments: one verdict per listed entry, relevance chosen per the
    // rules below so each report cell lands on a hand-checkable ratio.

    const std::set<std::string> irrelevant_media = {"m-a5", "m-e2"};
    const std::set<std::string> irrelevant_emergent = {"Sport"};
    const std::set<std::string> relevant_graph = {"kg:/g/rivian",    "kg:/g/polestar",
                                                  "kg:/g/vinfast",   "kg:/g/faurecia",
                                                  "kg:/g/flinkster", "kg:/g/plug_power"};
    const std::set<std::string> group_a_records = {"exp-01", "exp-02", "exp-03"};

    judgment_set judgments;
    {
        jsonl_writer writer(out / "judgments.jsonl");
        for (const auto& e : result.enriched) {
            const std::string& who = e.explanation.explanation_id;
            for (const report_section section : all_report_sections()) {
                for (const std::string& id : section_entry_ids(e, section)) {
                    bool relevant = true;
                    switch (section) {
                        case report_section::media_events:
                            relevant = irrelevant_media.count(id) == 0;
                            break;
                        case report_section::media_keywords_concepts:
                            relevant = irrelevant_emergent.count(id) == 0;
                            break;
                        case report_section::datasets:
                            relevant = !(id == "ds-gdp" && group_a_records.count(who) != 0);
                            break;
                        case report_section::kg:
                            relevant = relevant_graph.count(id) != 0;
                            break;
                    }
                    const relevance_judgment j{who, id, section, relevant};
                    judgments.add(j);
                    writer.write(to_json(j));
                }
            }
        }
        writer.close();
    }

    // ------------------------------------------------------------------
    // Report goldens, checked cell by cell against hand-derived ratios.

    const evaluation_report report = build_report(result.enriched, judgments, {1, 3});
    check(report.ks == std::vector<int>({1, 3}), "report must carry ks {1,3}");

    struct cell_expectation {
        report_section section;
        int k;
        double average_precision;
        double rde;
        std::size_t explanations;
        std::size_t total;
        std::size_t unique;
    };
    const std::vector<cell_expectation> expected_cells = {
        {report_section::media_events, 1, 1.0, 7.0 / 12.0, 12, 12, 7},
        {report_section::media_events, 3, 35.0 / 36.0, 18.0 / 35.0, 12, 35, 18},
        {report_section::media_keywords_concepts, 1, 11.0 / 12.0, 6.0 / 12.0, 12, 12, 6},
        {report_section::media_keywords_concepts, 3, 23.0 / 24.0, 13.0 / 29.0, 12, 29, 13},
        {report_section::datasets, 1, 1.0, 6.0 / 11.0, 11, 11, 6},
        {report_section::datasets, 3, 10.0 / 11.0, 10.0 / 24.0, 11, 24, 10},
        {report_section::kg, 1, 6.0 / 12.0, 4.0 / 12.0, 12, 12, 4},
        {report_section::kg, 3, 6.0 / 12.0, 8.0 / 32.0, 12, 32, 8},
    };
    for (const auto& want : expected_cells) {
        const metric_cell* got = nullptr;
        for (const auto& section : report.sections) {
            if (section.section != want.section) continue;
            for (const auto& cell : section.cells) {
                if (cell.k == want.k) got = &cell;
            }
        }
        const std::string what =
            std::string(to_string(want.section)) + " at k=" + std::to_string(want.k);
        check(got != nullptr, what + ": missing report cell");
        check(got->average_precision.has_value() && got->rde.has_value(), what + ": empty cell");
        check_close(*got->average_precision, want.average_precision, what + ": average precision");
        check_close(*got->rde, want.rde, what + ": diversity ratio");
        check(got->explanations == want.explanations, what + ": explanation count");
        check(got->total_entries == want.total && got->unique_entries == want.unique,
              what + ": pool counts");
    }

    {
        jsonl_writer writer(out / "golden" / "report.json");
        writer.write(to_json(report));
        writer.close();
    }
    {
        const std::string table = render_report_table(report);
        const fs::path path = out / "golden" / "report.txt";
        std::ofstream raw(path, std::ios::binary | std::ios::trunc);
        raw << table;
        raw.close();
        check(raw.good(), "report table write failed");
    }

    // ------------------------------------------------------------------
    // Manifest with the expected cache shape, used by the suite to verify
    // the pack on disk.

    const auto stats = cache.stats();
    nlohmann::json buckets = nlohmann::json::object();
    for (const auto& [bucket, count] : stats) buckets[bucket] = count;
    check(buckets == nlohmann::json({{"dataset", 7}, {"kg_entity", 21}, {"media_event", 7}, {"wikifier", 25}}),
          "cache bucket counts drifted from the plan: " + buckets.dump());

    const nlohmann::json manifest{
        {"buckets", buckets},
        {"explanations", records.size()},
        {"mapping_entries", mapping.entries().size()},
    };
    {
        std::ofstream raw(out / "manifest.json", std::ios::binary | std::ios::trunc);
        raw << manifest.dump(2) << '\n';
        raw.close();
        check(raw.good(), "manifest write failed");
    }

    std::cout << "fixture pack written to " << out.string() << " (" << records.size()
              << " explanations, " << stats.size() << " cache buckets)\n";
    return 0;
} catch (const std::exception& e) {
    std::cerr << "make-fixtures: " << e.what() << '\n';
    return 1;
}
