#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "enrichkit/model.hpp"

namespace enrichkit {

/// The four ranked sections of an enriched explanation that get scored.
/// media_keywords_concepts is the emergent-concept list, evaluated with
/// concept ids standing in as candidate ids.
enum class report_section { media_events, media_keywords_concepts, datasets, kg };

std::string_view to_string(report_section s);
report_section report_section_from_string(std::string_view s);

/// Human-readable section label for rendered tables.
std::string_view display_name(report_section s);

/// All sections in report order.
std::span<const report_section> all_report_sections();

/// Ordered candidate ids of one section, best rank first.
std::vector<std::string> section_entry_ids(const enriched_explanation& e, report_section s);

/// One manual relevance verdict for a (explanation, candidate, section)
/// triple.
struct relevance_judgment {
    std::string explanation_id;
    std::string candidate_id;
    report_section section = report_section::media_events;
    bool relevant = false;

    bool operator==(const relevance_judgment&) const = default;
};

nlohmann::json to_json(const relevance_judgment& v);
relevance_judgment relevance_judgment_from_json(const nlohmann::json& j);

/// Judgment store keyed by (explanation, candidate, section); each triple
/// may carry at most one verdict.
class judgment_set {
public:
    static judgment_set load_jsonl(const std::filesystem::path& file);

    /// Throws duplicate_id_error when the triple already has a verdict.
    void add(relevance_judgment j);

    bool is_judged(std::string_view explanation_id, report_section section,
                   std::string_view candidate_id) const;
    bool is_relevant(std::string_view explanation_id, report_section section,
                     std::string_view candidate_id) const;

    std::size_t size() const { return entries_.size(); }

private:
    struct key {
        std::string explanation_id;
        std::string candidate_id;
        report_section section;

        auto operator<=>(const key&) const = default;
    };

    std::map<key, bool> entries_;
};

/// Unjudged entries handling: strict raises judgment_gap_error listing
/// them, lenient scores them as not relevant.
enum class judgment_mode { strict, lenient };

/// Relevant fraction of the first min(k, n) ids. The list must be
/// non-empty and k >= 1; callers exclude empty sections before averaging.
double precision_at_k(std::span<const std::string> entry_ids, const std::set<std::string>& relevant,
                      int k);

/// Mean of per-explanation precision_at_k over explanations whose section
/// is non-empty. Empty result (no qualifying explanation) is nullopt, not
/// zero. Strict mode raises judgment_gap_error listing every unjudged
/// entry inside the evaluated prefixes.
std::optional<double> average_precision_at_k(std::span<const enriched_explanation> enriched,
                                             report_section section, const judgment_set& judgments,
                                             int k, judgment_mode mode = judgment_mode::strict);

struct rde_counts {
    std::size_t total = 0;
    std::size_t unique = 0;
};

/// Pools the top-min(k, n) entry ids of the section across all
/// explanations. Explanations with empty sections contribute nothing.
rde_counts rde_counts_at_k(std::span<const enriched_explanation> enriched, report_section section,
                           int k);

/// unique / total over the pooled entries; nullopt on an empty pool.
std::optional<double> rde_at_k(std::span<const enriched_explanation> enriched,
                               report_section section, int k);

/// Metrics for one (section, k) pair. explanations counts the records
/// with a non-empty section; total/unique are the RDE pool counts.
struct metric_cell {
    int k = 0;
    std::optional<double> average_precision;
    std::optional<double> rde;
    std::size_t explanations = 0;
    std::size_t total_entries = 0;
    std::size_t unique_entries = 0;

    bool operator==(const metric_cell&) const = default;
};

struct section_report {
    report_section section = report_section::media_events;
    std::vector<metric_cell> cells;

    bool operator==(const section_report&) const = default;
};

struct evaluation_report {
    std::vector<int> ks;
    std::vector<section_report> sections;

    bool operator==(const evaluation_report&) const = default;
};

/// Full grid: every section crossed with every k. ks must be non-empty
/// and positive; duplicates collapse, first occurrence wins the order.
evaluation_report build_report(std::span<const enriched_explanation> enriched,
                               const judgment_set& judgments, std::vector<int> ks,
                               judgment_mode mode = judgment_mode::strict);

nlohmann::json to_json(const evaluation_report& report);

/// Fixed-width text table, one row per section and metric, one value
/// column per k. Empty cells render as "n/a".
std::string render_report_table(const evaluation_report& report);

} // namespace enrichkit
