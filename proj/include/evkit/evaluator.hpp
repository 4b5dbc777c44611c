#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evkit/vocab.hpp"

namespace evkit {

/// A prediction counts as correct when at least min_slots of its four
/// slots match the paired gold event.
struct MatchRule {
    int min_slots = 3;
};

/// Number of slots (0..4) whose normalized tokens agree.
int slot_match_count(const AaodEvent& pred, const AaodEvent& gold);

struct MatchResult {
    int matched = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairing;  // (pred index, gold index)
};

/// Maximum-cardinality one-to-one matching on the bipartite graph with
/// an edge wherever slot_match_count >= min_slots. Ties break
/// deterministically by higher slot count, then lexicographic tuple
/// order, so repeated runs pair identically.
MatchResult match_sets(const EventSet& preds, const EventSet& golds, const MatchRule& rule);

struct MonthScore {
    double precision = 0.0;
    double recall = 0.0;
    bool precision_defined = false;
    bool recall_defined = false;
    int matched = 0;
    int n_pred = 0;
    int n_gold = 0;
};

/// Per-month pooled scores plus their unweighted means. Empty months
/// (no predictions, no gold) score P = R = 1; a month with gold but no
/// predictions contributes R = 0 and is excluded from the precision
/// mean (and symmetrically for predictions without gold).
struct MonthlyReport {
    std::map<std::string, MonthScore> per_month;
    double overall_precision = 0.0;
    double overall_recall = 0.0;
};

struct MonthlySample {
    std::string month;
    EventSet preds;
    EventSet golds;
};

MonthlyReport monthly_report(const std::vector<MonthlySample>& samples, const MatchRule& rule);

}  // namespace evkit
