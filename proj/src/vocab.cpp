#include "evkit/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <utility>

namespace evkit {

const char* slot_name(SlotKind kind) {
    switch (kind) {
        case SlotKind::Actor: return "actor";
        case SlotKind::Action: return "action";
        case SlotKind::Object: return "object";
        case SlotKind::Direction: return "direction";
    }
    return "?";
}

std::optional<SlotKind> slot_from_name(const std::string& name) {
    for (SlotKind k : kSlotKinds)
        if (name == slot_name(k)) return k;
    return std::nullopt;
}

std::string normalize_token(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    if (out.empty()) throw EmptyToken();
    return out;
}

const std::string& AaodEvent::slot(SlotKind kind) const {
    switch (kind) {
        case SlotKind::Actor: return actor;
        case SlotKind::Action: return action;
        case SlotKind::Object: return object;
        case SlotKind::Direction: return direction;
    }
    return actor;
}

std::string& AaodEvent::slot(SlotKind kind) {
    switch (kind) {
        case SlotKind::Actor: return actor;
        case SlotKind::Action: return action;
        case SlotKind::Object: return object;
        case SlotKind::Direction: return direction;
    }
    return actor;
}

AaodEvent normalized(const AaodEvent& e) {
    AaodEvent out = e;
    for (SlotKind k : kSlotKinds) out.slot(k) = normalize_token(e.slot(k));
    return out;
}

std::array<std::string, 4> tuple_key(const AaodEvent& e) {
    std::array<std::string, 4> key;
    for (std::size_t i = 0; i < 4; ++i) key[i] = normalize_token(e.slot(kSlotKinds[i]));
    return key;
}

void Vocabulary::add_token(SlotKind kind, const std::string& raw) {
    const std::string tok = normalize_token(raw);
    auto& set = lookup_[static_cast<std::size_t>(kind)];
    if (set.insert(tok).second) tokens_[static_cast<std::size_t>(kind)].push_back(tok);
}

void Vocabulary::add_rule(const CompositionRule& rule) {
    for (const SlotToken& op : rule.operands) {
        const std::string tok = normalize_token(op.token);
        if (!contains(op.slot, tok))
            throw ValidationError(std::string("rule operand '") + tok + "' not in " +
                                  slot_name(op.slot) + " allow-list");
    }
    CompositionRule stored = rule;
    for (SlotToken& op : stored.operands) op.token = normalize_token(op.token);
    if (stored.kind == CompositionRule::Kind::ForbidPair) {
        if (stored.operands.size() != 2)
            throw ValidationError("forbid_pair takes exactly two operands");
    } else {
        if (stored.operands.size() != 2 || stored.operands[1].slot != SlotKind::Direction)
            throw ValidationError(
                "require_direction takes a trigger operand and a direction operand");
    }
    rules_.push_back(std::move(stored));
}

bool Vocabulary::contains(SlotKind kind, const std::string& normalized_token) const {
    return lookup_[static_cast<std::size_t>(kind)].count(normalized_token) > 0;
}

const std::vector<std::string>& Vocabulary::tokens(SlotKind kind) const {
    return tokens_[static_cast<std::size_t>(kind)];
}

namespace {

bool rule_violated(const CompositionRule& rule, const AaodEvent& e) {
    if (rule.kind == CompositionRule::Kind::ForbidPair) {
        return e.slot(rule.operands[0].slot) == rule.operands[0].token &&
               e.slot(rule.operands[1].slot) == rule.operands[1].token;
    }
    // require_direction
    return e.slot(rule.operands[0].slot) == rule.operands[0].token &&
           e.direction != rule.operands[1].token;
}

}  // namespace

Verdict validate_event(const AaodEvent& e, const Vocabulary& v) {
    AaodEvent norm;
    try {
        norm = normalized(e);
    } catch (const EmptyToken&) {
        Verdict verdict;
        verdict.reason = "event has an empty slot";
        return verdict;
    }
    for (SlotKind k : kSlotKinds) {
        if (!v.contains(k, norm.slot(k))) {
            Verdict verdict;
            verdict.failed_slot = k;
            verdict.reason = std::string("token '") + norm.slot(k) + "' not in " + slot_name(k) +
                             " allow-list";
            return verdict;
        }
    }
    const auto& rules = v.rules();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (rule_violated(rules[i], norm)) {
            Verdict verdict;
            verdict.failed_rule = i;
            verdict.reason = "composition rule " + std::to_string(i) + " violated";
            return verdict;
        }
    }
    Verdict verdict;
    verdict.accepted = true;
    return verdict;
}

EventSet dedup_event_set(const EventSet& s) {
    EventSet out;
    out.bucket = s.bucket;
    std::vector<std::array<std::string, 4>> seen;
    for (const AaodEvent& e : s.events) {
        auto key = tuple_key(e);
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(std::move(key));
        out.events.push_back(e);
    }
    return out;
}

std::vector<VocabSuggestion> aggregate_suggestions(
    const std::vector<VocabSuggestion>& suggestions) {
    std::vector<VocabSuggestion> totals;
    for (const VocabSuggestion& s : suggestions) {
        const std::string tok = normalize_token(s.token);
        auto it = std::find_if(totals.begin(), totals.end(), [&](const VocabSuggestion& entry) {
            return entry.slot == s.slot && entry.token == tok;
        });
        if (it == totals.end())
            totals.push_back({s.slot, tok, s.score});
        else
            it->score += s.score;
    }
    return totals;
}

Vocabulary expand_vocabulary(const Vocabulary& v, const std::vector<VocabSuggestion>& suggestions,
                             double threshold) {
    Vocabulary out = v;
    bool added = false;
    for (const VocabSuggestion& entry : aggregate_suggestions(suggestions)) {
        if (entry.score < threshold) continue;
        if (out.contains(entry.slot, entry.token)) continue;
        out.add_token(entry.slot, entry.token);
        added = true;
    }
    if (added) out.set_version(v.version() + 1);
    return out;
}

}  // namespace evkit
