#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "evkit/errors.hpp"

namespace evkit {

/// The four slot roles of a structured event tuple, in fixed order.
enum class SlotKind { Actor = 0, Action = 1, Object = 2, Direction = 3 };

inline constexpr std::array<SlotKind, 4> kSlotKinds = {
    SlotKind::Actor, SlotKind::Action, SlotKind::Object, SlotKind::Direction};

const char* slot_name(SlotKind kind);
std::optional<SlotKind> slot_from_name(const std::string& name);

/// Case-fold, trim, and collapse internal whitespace to single spaces.
/// Deterministic and idempotent. Throws EmptyToken if nothing remains.
std::string normalize_token(const std::string& raw);

/// One structured event: actor/action/object/direction tokens plus a
/// timestamp on the series time axis and the process type it maps to.
struct AaodEvent {
    std::string actor;
    std::string action;
    std::string object;
    std::string direction;
    double time = 0.0;
    int type_index = 0;

    const std::string& slot(SlotKind kind) const;
    std::string& slot(SlotKind kind);
};

/// Event with all four slots normalized; slots must be non-empty.
AaodEvent normalized(const AaodEvent& e);

/// Normalized 4-tuple key used for dedup and matching.
std::array<std::string, 4> tuple_key(const AaodEvent& e);

struct SlotToken {
    SlotKind slot;
    std::string token;
};

/// Structural constraint over slot combinations.
///   ForbidPair: operands (a, b) -- reject events carrying both tokens.
///   RequireDirection: operands (trigger, required direction) -- events
///   carrying the trigger token must have the given direction.
struct CompositionRule {
    enum class Kind { ForbidPair, RequireDirection };
    Kind kind;
    std::vector<SlotToken> operands;
};

/// Restricted four-slot vocabulary with composition constraints and a
/// monotone version counter. Immutable in use: expansion returns a copy.
class Vocabulary {
  public:
    Vocabulary() = default;

    /// Appends the token (normalized) to the slot's allow-list if absent.
    void add_token(SlotKind kind, const std::string& raw);

    /// Validates operand tokens against the current allow-lists, then
    /// appends the rule. Throws ValidationError on unknown operands.
    void add_rule(const CompositionRule& rule);

    bool contains(SlotKind kind, const std::string& normalized_token) const;
    const std::vector<std::string>& tokens(SlotKind kind) const;
    const std::vector<CompositionRule>& rules() const { return rules_; }

    int version() const { return version_; }
    void set_version(int v) { version_ = v; }

  private:
    std::array<std::vector<std::string>, 4> tokens_;
    std::array<std::unordered_set<std::string>, 4> lookup_;
    std::vector<CompositionRule> rules_;
    int version_ = 0;
};

/// Accept/reject verdict; rejection names the first failing slot or rule.
struct Verdict {
    bool accepted = false;
    std::optional<SlotKind> failed_slot;     // token missing from allow-list
    std::optional<std::size_t> failed_rule;  // index into Vocabulary::rules()
    std::string reason;

    explicit operator bool() const { return accepted; }
};

/// Accept iff every slot token is in its allow-list and no composition
/// rule is violated. Slots are checked in AAOD order, then rules in
/// declaration order; the first violation is reported.
Verdict validate_event(const AaodEvent& e, const Vocabulary& v);

/// Ordered collection of events within one time bucket (an alignment
/// window, a document timestamp, or an evaluation month).
struct EventSet {
    std::vector<AaodEvent> events;
    std::string bucket;
};

/// Keeps the first occurrence (input order) of each normalized AAOD
/// tuple; output order preserves input order.
EventSet dedup_event_set(const EventSet& s);

struct VocabSuggestion {
    SlotKind slot;
    std::string token;
    double score = 0.0;
};

/// Sums scores per normalized (slot, token), keeping first-seen order.
std::vector<VocabSuggestion> aggregate_suggestions(
    const std::vector<VocabSuggestion>& suggestions);

/// Appends tokens whose aggregated score reaches the threshold, in
/// first-suggested order. The version is incremented by exactly 1 iff
/// at least one token was added.
Vocabulary expand_vocabulary(const Vocabulary& v, const std::vector<VocabSuggestion>& suggestions,
                             double threshold);

}  // namespace evkit
