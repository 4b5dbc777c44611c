#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evkit/vocab.hpp"

namespace evkit {

struct Document {
    std::string id;
    double time = 0.0;  // position on the series time axis
    std::string body;
};

struct BackendOutput {
    std::vector<AaodEvent> candidates;
    std::vector<VocabSuggestion> suggestions;
};

/// Extraction backend contract: given a document and the vocabulary in
/// force this round, propose candidate events and vocabulary
/// suggestions. Implementations signal failure by throwing; the round
/// wraps the error as BackendFailure and aborts without touching the
/// vocabulary. The bundled rule backend is deterministic; external
/// (LLM-backed) implementations need not be.
class ExtractorBackend {
  public:
    virtual ~ExtractorBackend() = default;
    virtual BackendOutput extract(const Document& doc, const Vocabulary& vocab) = 0;
};

/// One pass of the select-expand-iterate loop. pending holds the
/// below-threshold aggregated suggestion scores carried into the next
/// round, so scores sum across rounds.
struct ExtractionRound {
    int round_index = 0;
    EventSet accepted;
    int rejected_count = 0;
    Vocabulary vocabulary_after;
    std::vector<VocabSuggestion> pending;
};

/// Runs the backend over every document against a fixed vocabulary.
/// Invalid candidates are counted and dropped; survivors are deduped
/// per document timestamp; carried plus fresh suggestions are
/// aggregated once at round end to produce vocabulary_after.
ExtractionRound run_round(const std::vector<Document>& docs, const Vocabulary& vocab,
                          ExtractorBackend& backend, double threshold, int round_index = 0,
                          const std::vector<VocabSuggestion>& carried = {});

/// Repeats rounds, feeding each round the previous round's vocabulary
/// and unspent suggestion scores, until the vocabulary version stops
/// changing or max_rounds is spent.
std::vector<ExtractionRound> run_loop(const std::vector<Document>& docs, const Vocabulary& v0,
                                      ExtractorBackend& backend, double threshold,
                                      int max_rounds);

struct AlignedEvents {
    std::size_t window_index = 0;  // index of the window's right-endpoint timestamp
    EventSet events;
};

struct AlignmentResult {
    std::vector<AlignedEvents> windows;
    int dropped = 0;  // events past the final timestamp
};

/// Assigns each event to the window whose right endpoint is the
/// smallest series timestamp >= the event time; events after the last
/// timestamp are dropped and counted. Window sets are deduped (the
/// window is the dedup bucket).
AlignmentResult align_events(const EventSet& events, const std::vector<double>& series_times,
                             int window_len);

/// Keyword-table backend: deterministic slot filling for tests and
/// closed-world pipelines. Matching is longest-first over normalized
/// word n-grams (bounded by the longest table phrase) within each
/// sentence; the first hit per slot wins, and action keywords may imply
/// a direction and an event type. Tokens known to the table but absent
/// from the vocabulary are emitted as suggestions.
class RuleBackend : public ExtractorBackend {
  public:
    struct Keyword {
        std::string match;  // normalized phrase to look for
        SlotKind slot;
        std::string token;
        std::vector<SlotToken> implies;
        int type_index = 0;  // used when this keyword fills the action slot
        double suggestion_score = 1.0;
    };

    explicit RuleBackend(std::vector<Keyword> keywords);

    /// Table in which every vocabulary token matches itself.
    static RuleBackend from_vocabulary(const Vocabulary& vocab);

    BackendOutput extract(const Document& doc, const Vocabulary& vocab) override;

  private:
    std::map<std::string, Keyword> keywords_;  // keyed by normalized match phrase
    std::size_t max_phrase_words_ = 1;
};

/// Registry for backend selection by name; "rule" is bundled.
/// Throws ValidationError on unknown names.
std::unique_ptr<ExtractorBackend> make_backend(const std::string& name,
                                               const std::vector<RuleBackend::Keyword>& keywords);

}  // namespace evkit
