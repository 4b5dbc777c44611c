#include "evkit/evaluator.hpp"

#include <algorithm>
#include <numeric>

namespace evkit {

int slot_match_count(const AaodEvent& pred, const AaodEvent& gold) {
    const auto p = tuple_key(pred);
    const auto g = tuple_key(gold);
    int count = 0;
    for (std::size_t i = 0; i < 4; ++i) count += p[i] == g[i] ? 1 : 0;
    return count;
}

namespace {

struct Edge {
    std::size_t gold;
    int slots;
};

// Kuhn's augmenting-path matching. Preds are visited in (tuple,
// original index) order and adjacency lists in (slot count desc, gold
// tuple, original index) order, which fixes the tie-break.
bool augment(std::size_t pred, const std::vector<std::vector<Edge>>& adjacency,
             std::vector<char>& visited, std::vector<std::ptrdiff_t>& gold_owner,
             std::vector<std::ptrdiff_t>& pred_match) {
    for (const Edge& edge : adjacency[pred]) {
        if (visited[edge.gold]) continue;
        visited[edge.gold] = 1;
        if (gold_owner[edge.gold] < 0 ||
            augment(static_cast<std::size_t>(gold_owner[edge.gold]), adjacency, visited,
                    gold_owner, pred_match)) {
            gold_owner[edge.gold] = static_cast<std::ptrdiff_t>(pred);
            pred_match[pred] = static_cast<std::ptrdiff_t>(edge.gold);
            return true;
        }
    }
    return false;
}

}  // namespace

MatchResult match_sets(const EventSet& preds, const EventSet& golds, const MatchRule& rule) {
    if (rule.min_slots < 1 || rule.min_slots > 4)
        throw ValidationError("min_slots must be in [1, 4]");
    const std::size_t n_pred = preds.events.size();
    const std::size_t n_gold = golds.events.size();

    std::vector<std::array<std::string, 4>> pred_keys(n_pred), gold_keys(n_gold);
    for (std::size_t i = 0; i < n_pred; ++i) pred_keys[i] = tuple_key(preds.events[i]);
    for (std::size_t i = 0; i < n_gold; ++i) gold_keys[i] = tuple_key(golds.events[i]);

    std::vector<std::vector<Edge>> adjacency(n_pred);
    for (std::size_t p = 0; p < n_pred; ++p) {
        for (std::size_t g = 0; g < n_gold; ++g) {
            int slots = 0;
            for (std::size_t s = 0; s < 4; ++s) slots += pred_keys[p][s] == gold_keys[g][s];
            if (slots >= rule.min_slots) adjacency[p].push_back({g, slots});
        }
        std::sort(adjacency[p].begin(), adjacency[p].end(), [&](const Edge& a, const Edge& b) {
            if (a.slots != b.slots) return a.slots > b.slots;
            if (gold_keys[a.gold] != gold_keys[b.gold])
                return gold_keys[a.gold] < gold_keys[b.gold];
            return a.gold < b.gold;
        });
    }

    std::vector<std::size_t> pred_order(n_pred);
    std::iota(pred_order.begin(), pred_order.end(), std::size_t{0});
    std::sort(pred_order.begin(), pred_order.end(), [&](std::size_t a, std::size_t b) {
        if (pred_keys[a] != pred_keys[b]) return pred_keys[a] < pred_keys[b];
        return a < b;
    });

    std::vector<std::ptrdiff_t> gold_owner(n_gold, -1);
    std::vector<std::ptrdiff_t> pred_match(n_pred, -1);
    MatchResult result;
    for (std::size_t p : pred_order) {
        std::vector<char> visited(n_gold, 0);
        if (augment(p, adjacency, visited, gold_owner, pred_match)) ++result.matched;
    }
    for (std::size_t p = 0; p < n_pred; ++p)
        if (pred_match[p] >= 0)
            result.pairing.push_back({p, static_cast<std::size_t>(pred_match[p])});
    return result;
}

MonthlyReport monthly_report(const std::vector<MonthlySample>& samples, const MatchRule& rule) {
    // Pool all events of a month before matching.
    std::map<std::string, std::pair<EventSet, EventSet>> pooled;
    for (const MonthlySample& sample : samples) {
        auto& [preds, golds] = pooled[sample.month];
        preds.bucket = golds.bucket = sample.month;
        preds.events.insert(preds.events.end(), sample.preds.events.begin(),
                            sample.preds.events.end());
        golds.events.insert(golds.events.end(), sample.golds.events.begin(),
                            sample.golds.events.end());
    }

    MonthlyReport report;
    double precision_sum = 0.0, recall_sum = 0.0;
    int precision_months = 0, recall_months = 0;
    for (const auto& [month, sets] : pooled) {
        const auto& [preds, golds] = sets;
        MonthScore score;
        score.n_pred = static_cast<int>(preds.events.size());
        score.n_gold = static_cast<int>(golds.events.size());
        if (score.n_pred == 0 && score.n_gold == 0) {
            score.precision = score.recall = 1.0;  // correct silence
            score.precision_defined = score.recall_defined = true;
        } else {
            score.matched = match_sets(preds, golds, rule).matched;
            if (score.n_pred > 0) {
                score.precision = static_cast<double>(score.matched) / score.n_pred;
                score.precision_defined = true;
            }
            if (score.n_gold > 0) {
                score.recall = static_cast<double>(score.matched) / score.n_gold;
                score.recall_defined = true;
            }
        }
        if (score.precision_defined) {
            precision_sum += score.precision;
            ++precision_months;
        }
        if (score.recall_defined) {
            recall_sum += score.recall;
            ++recall_months;
        }
        report.per_month.emplace(month, score);
    }
    report.overall_precision = precision_months > 0 ? precision_sum / precision_months : 0.0;
    report.overall_recall = recall_months > 0 ? recall_sum / recall_months : 0.0;
    return report;
}

}  // namespace evkit
