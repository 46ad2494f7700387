#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mutex>
#include <string>
#include <vector>

#include "enrichkit/concepts.hpp"
#include "enrichkit/connectors.hpp"
#include "enrichkit/errors.hpp"
#include "enrichkit/model.hpp"
#include "enrichkit/pipeline.hpp"
#include "enrichkit/similarity.hpp"

using namespace enrichkit;

namespace {

/// In-memory connector: serves a fixed candidate list up to the query
/// limit and records every query it sees.
class fake_connector final : public source_connector {
public:
    explicit fake_connector(source_kind kind) : kind_(kind) {}

    source_kind kind() const override { return kind_; }

    std::vector<enrichment_candidate> query(const source_query& q) override {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            queries.push_back(q);
        }
        if (!fail_message.empty()) {
            throw network_error(fail_message);
        }
        std::vector<enrichment_candidate> out;
        for (const auto& c : results) {
            if (out.size() == static_cast<std::size_t>(q.limit)) break;
            out.push_back(c);
        }
        return out;
    }

    std::vector<source_query> queries;
    std::vector<enrichment_candidate> results;
    std::string fail_message;

private:
    source_kind kind_;
    std::mutex mutex_;
};

enrichment_candidate make_candidate(std::string id, source_kind kind,
                                    std::initializer_list<std::string_view> concepts,
                                    std::optional<double> score = std::nullopt) {
    enrichment_candidate c;
    c.candidate_id = std::move(id);
    c.kind = kind;
    c.title = c.candidate_id;
    c.concepts = concept_set(concepts);
    c.source_score = score;
    return c;
}

wiki_concept make_concept(std::string id, concept_class cls = concept_class::other) {
    wiki_concept c;
    c.concept_id = std::move(id);
    c.label = c.concept_id;
    c.salience = 0.9;
    c.classification = cls;
    return c;
}

keyword_concept_mapping test_mapping() {
    keyword_concept_mapping mapping;
    mapping.add("Car Sales Demand", {make_concept("Car"), make_concept("Demand"), make_concept("Sales")});
    mapping.add("Unemployment Rate", {make_concept("Unemployment")});
    mapping.add("PMI", {make_concept("Manager_(Gaelic_games)")});
    return mapping;
}

explanation_record make_record(std::string id, std::vector<std::string> phrases) {
    explanation_record rec;
    rec.explanation_id = std::move(id);
    rec.product_id = "prod-56";
    rec.period = "2021-03";
    for (auto& phrase : phrases) {
        rec.feature_keywords.push_back(feature_keyword::from_phrase(std::move(phrase)));
    }
    return rec;
}

/// Connectors, catalog, ranker, and pipeline wired for one test.
struct rig {
    fake_connector media{source_kind::media_event};
    fake_connector datasets{source_kind::dataset};
    fake_connector kg{source_kind::kg_entity};
    concept_catalog catalog;
    jaccard_ranker ranker;

    rig() {
        catalog.observe(make_concept("Electric_vehicle"));
        catalog.observe(make_concept("Oil"));
        catalog.observe(make_concept("Angela_Merkel", concept_class::person));
        catalog.observe(make_concept("Germany", concept_class::place));

        media.results = {
            make_candidate("m1", source_kind::media_event, {"Car", "Electric_vehicle"}, 0.8),
            make_candidate("m2", source_kind::media_event, {"Car", "Demand", "Electric_vehicle"}, 0.6),
            make_candidate("m3", source_kind::media_event, {"Oil"}, 0.9),
        };
        datasets.results = {
            make_candidate("d1", source_kind::dataset, {"Electric_vehicle"}),
            make_candidate("d2", source_kind::dataset, {"Car", "Sales"}),
        };
        kg.results = {
            make_candidate("k1", source_kind::kg_entity, {"Electric_vehicle", "Car"}, 150.0),
            make_candidate("k2", source_kind::kg_entity, {"Oil"}, 80.0),
        };
    }

    enrichment_pipeline pipeline() { return {media, datasets, kg, catalog, ranker}; }
};

pipeline_config small_config() {
    pipeline_config cfg;
    cfg.media_limit = 10;
    cfg.dataset_limit = 5;
    cfg.kg_limit = 5;
    cfg.top_n = 2;
    cfg.max_m = 2;
    return cfg;
}

} // namespace

TEST_CASE("pipeline_config validation names the offending field") {
    CHECK_NOTHROW(validate(pipeline_config{}));

    pipeline_config cfg;
    cfg.keyword_cutoff = 0;
    CHECK_THROWS_WITH_AS(validate(cfg), "keyword_cutoff must be >= 1", precondition_error);

    cfg = pipeline_config{};
    cfg.media_limit = 0;
    CHECK_THROWS_WITH_AS(validate(cfg), "media_limit must be >= 1", precondition_error);

    cfg = pipeline_config{};
    cfg.top_n = -1;
    CHECK_THROWS_WITH_AS(validate(cfg), "top_n must be >= 1", precondition_error);

    cfg = pipeline_config{};
    cfg.max_m = 0;
    CHECK_THROWS_WITH_AS(validate(cfg), "max_m must be >= 1", precondition_error);

    cfg = pipeline_config{};
    cfg.min_salience = 1.5;
    CHECK_THROWS_WITH_AS(validate(cfg), "min_salience must lie in [0,1]", precondition_error);
}

TEST_CASE("reference concepts honor the keyword cutoff") {
    const auto mapping = test_mapping();
    const auto rec = make_record("exp-1", {"Car Sales Demand", "Unemployment Rate"});

    pipeline_config cfg;
    CHECK(build_reference_concepts(rec, mapping, cfg) ==
          concept_set{"Car", "Demand", "Sales", "Unemployment"});

    cfg.keyword_cutoff = 1;
    CHECK(build_reference_concepts(rec, mapping, cfg) == concept_set{"Car", "Demand", "Sales"});

    // A cutoff past the end simply takes everything.
    cfg.keyword_cutoff = 10;
    CHECK(build_reference_concepts(rec, mapping, cfg) ==
          concept_set{"Car", "Demand", "Sales", "Unemployment"});
}

TEST_CASE("an unmapped keyword names both the keyword and the explanation") {
    const auto mapping = test_mapping();
    const auto rec = make_record("exp-9", {"Car Sales Demand", "Mystery Metric"});
    CHECK_THROWS_WITH_AS(build_reference_concepts(rec, mapping, pipeline_config{}),
                         "explanation 'exp-9': no concept mapping for keyword 'Mystery Metric'",
                         unmapped_keyword_error);

    // Keywords past the cutoff are never touched, mapped or not.
    pipeline_config cfg;
    cfg.keyword_cutoff = 1;
    CHECK_NOTHROW(build_reference_concepts(rec, mapping, cfg));
}

TEST_CASE("enrich runs all four steps against the right concept sets") {
    rig r;
    const auto mapping = test_mapping();
    const auto rec = make_record("exp-1", {"Car Sales Demand"});
    const auto cfg = small_config();

    const auto out = r.pipeline().enrich(rec, mapping, cfg);

    CHECK(out.explanation == rec);
    CHECK(out.reference_concepts == concept_set{"Car", "Demand", "Sales"});

    // Media ranked by distance to the reference set: m2 1-2/4, m1 1-1/4, m3 1.
    REQUIRE(out.ranked_media.size() == 3);
    CHECK(out.ranked_media[0].candidate.candidate_id == "m2");
    CHECK(out.ranked_media[0].distance == doctest::Approx(0.5));
    CHECK(out.ranked_media[0].rank == 1);
    CHECK(out.ranked_media[1].candidate.candidate_id == "m1");
    CHECK(out.ranked_media[1].distance == doctest::Approx(0.75));
    CHECK(out.ranked_media[2].candidate.candidate_id == "m3");
    CHECK(out.ranked_media[2].distance == doctest::Approx(1.0));

    // Top two media vote: Electric_vehicle appears twice and is not a
    // reference concept; Car and Demand are and drop out.
    REQUIRE(out.emergent_concepts.size() == 1);
    CHECK(out.emergent_concepts[0].concept_id == "Electric_vehicle");
    CHECK(out.emergent_concepts[0].count == 2);

    // Datasets are ranked against reference plus emergent, so a candidate
    // sharing only the emergent concept still scores below 1.
    REQUIRE(out.ranked_datasets.size() == 2);
    CHECK(out.ranked_datasets[0].candidate.candidate_id == "d2");
    CHECK(out.ranked_datasets[0].distance == doctest::Approx(0.5));
    CHECK(out.ranked_datasets[1].candidate.candidate_id == "d1");
    CHECK(out.ranked_datasets[1].distance == doctest::Approx(0.75));

    REQUIRE(out.ranked_kg.size() == 2);
    CHECK(out.ranked_kg[0].candidate.candidate_id == "k1");
    CHECK(out.ranked_kg[0].distance == doctest::Approx(0.5));
    CHECK(out.ranked_kg[1].candidate.candidate_id == "k2");
    CHECK(out.ranked_kg[1].distance == doctest::Approx(1.0));

    // Queries: media sees the reference set, the rest see the anchor.
    REQUIRE(r.media.queries.size() == 1);
    CHECK(r.media.queries[0].concepts == std::vector<std::string>{"Car", "Demand", "Sales"});
    CHECK(r.media.queries[0].limit == cfg.media_limit);
    CHECK(r.media.queries[0].kind == source_kind::media_event);

    REQUIRE(r.datasets.queries.size() == 1);
    CHECK(r.datasets.queries[0].concepts ==
          std::vector<std::string>{"Car", "Demand", "Electric_vehicle", "Sales"});
    CHECK(r.datasets.queries[0].limit == cfg.dataset_limit);

    REQUIRE(r.kg.queries.size() == 1);
    CHECK(r.kg.queries[0].concepts ==
          std::vector<std::string>{"Car", "Demand", "Electric_vehicle", "Sales"});
    CHECK(r.kg.queries[0].limit == cfg.kg_limit);
}

TEST_CASE("kg_emergent_only narrows the query but not the ranking anchor") {
    rig r;
    const auto mapping = test_mapping();
    const auto rec = make_record("exp-1", {"Car Sales Demand"});
    auto cfg = small_config();
    cfg.kg_emergent_only = true;

    const auto out = r.pipeline().enrich(rec, mapping, cfg);

    REQUIRE(r.kg.queries.size() == 1);
    CHECK(r.kg.queries[0].concepts == std::vector<std::string>{"Electric_vehicle"});

    // k1 shares Car and Electric_vehicle with the anchor even though the
    // query was emergent-only.
    REQUIRE(out.ranked_kg.size() == 2);
    CHECK(out.ranked_kg[0].candidate.candidate_id == "k1");
    CHECK(out.ranked_kg[0].distance == doctest::Approx(0.5));
}

TEST_CASE("kg_emergent_only falls back to the reference set when nothing emerges") {
    rig r;
    r.media.results.clear();
    const auto mapping = test_mapping();
    const auto rec = make_record("exp-1", {"Car Sales Demand"});
    auto cfg = small_config();
    cfg.kg_emergent_only = true;

    const auto out = r.pipeline().enrich(rec, mapping, cfg);
    CHECK(out.ranked_media.empty());
    CHECK(out.emergent_concepts.empty());
    REQUIRE(r.kg.queries.size() == 1);
    CHECK(r.kg.queries[0].concepts == std::vector<std::string>{"Car", "Demand", "Sales"});
}

TEST_CASE("step errors carry the explanation id and keep their type") {
    rig r;
    r.media.fail_message = "upstream down";
    const auto mapping = test_mapping();
    const auto rec = make_record("exp-7", {"Car Sales Demand"});

    CHECK_THROWS_WITH_AS(r.pipeline().enrich(rec, mapping, small_config()),
                         "explanation 'exp-7': upstream down", network_error);
}

TEST_CASE("corpus enrichment keeps input order and isolates failures") {
    rig r;
    const auto mapping = test_mapping();
    const std::vector<explanation_record> records = {
        make_record("exp-1", {"Car Sales Demand"}),
        make_record("exp-2", {"Mystery Metric"}),
        make_record("exp-3", {"PMI", "Unemployment Rate"}),
    };

    const auto result = r.pipeline().enrich_corpus(records, mapping, small_config());
    REQUIRE(result.enriched.size() == 2);
    CHECK(result.enriched[0].explanation.explanation_id == "exp-1");
    CHECK(result.enriched[1].explanation.explanation_id == "exp-3");
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].explanation_id == "exp-2");
    CHECK(result.errors[0].message ==
          "explanation 'exp-2': no concept mapping for keyword 'Mystery Metric'");
}

TEST_CASE("fail_fast rethrows the first record error") {
    rig r;
    const auto mapping = test_mapping();
    const std::vector<explanation_record> records = {
        make_record("exp-1", {"Car Sales Demand"}),
        make_record("exp-2", {"Mystery Metric"}),
    };
    corpus_options opts;
    opts.fail_fast = true;
    CHECK_THROWS_AS(r.pipeline().enrich_corpus(records, mapping, small_config(), opts),
                    unmapped_keyword_error);
}

TEST_CASE("parallel corpus enrichment equals the sequential result") {
    rig r;
    const auto mapping = test_mapping();
    std::vector<explanation_record> records;
    for (int i = 0; i < 12; ++i) {
        const std::string id = "exp-" + std::to_string(i);
        if (i % 4 == 2) {
            records.push_back(make_record(id, {"Mystery Metric"}));
        } else if (i % 2 == 0) {
            records.push_back(make_record(id, {"Car Sales Demand"}));
        } else {
            records.push_back(make_record(id, {"Unemployment Rate", "PMI"}));
        }
    }

    const auto sequential = r.pipeline().enrich_corpus(records, mapping, small_config());

    corpus_options opts;
    opts.parallelism = 4;
    rig r2;
    const auto parallel = r2.pipeline().enrich_corpus(records, mapping, small_config(), opts);
    CHECK(parallel.enriched == sequential.enriched);
    CHECK(parallel.errors == sequential.errors);

    rig r3;
    const auto again = r3.pipeline().enrich_corpus(records, mapping, small_config(), opts);
    CHECK(again.enriched == parallel.enriched);
    CHECK(again.errors == parallel.errors);
}

TEST_CASE("corpus options are validated") {
    rig r;
    const auto mapping = test_mapping();
    const std::vector<explanation_record> records;
    corpus_options opts;
    opts.parallelism = 0;
    CHECK_THROWS_AS(r.pipeline().enrich_corpus(records, mapping, small_config(), opts),
                    precondition_error);

    const auto result = r.pipeline().enrich_corpus(records, mapping, small_config());
    CHECK(result.enriched.empty());
    CHECK(result.errors.empty());
}
