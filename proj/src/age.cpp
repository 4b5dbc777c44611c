#include "evkit/age.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace evkit {

ExtractionRound run_round(const std::vector<Document>& docs, const Vocabulary& vocab,
                          ExtractorBackend& backend, double threshold, int round_index,
                          const std::vector<VocabSuggestion>& carried) {
    if (threshold < 0) throw ValidationError("threshold must be nonnegative");
    ExtractionRound round;
    round.round_index = round_index;
    round.accepted.bucket = "round-" + std::to_string(round_index);

    std::vector<VocabSuggestion> suggestions = carried;
    // (document time, deduped survivors) in first-seen time order
    std::vector<std::pair<double, EventSet>> buckets;
    for (const Document& doc : docs) {
        BackendOutput output;
        try {
            output = backend.extract(doc, vocab);
        } catch (const std::exception& e) {
            throw BackendFailure(doc.id, e.what());
        }
        suggestions.insert(suggestions.end(), output.suggestions.begin(),
                           output.suggestions.end());
        for (const AaodEvent& candidate : output.candidates) {
            if (!validate_event(candidate, vocab)) {
                ++round.rejected_count;
                continue;
            }
            auto it = std::find_if(buckets.begin(), buckets.end(),
                                   [&](const auto& b) { return b.first == candidate.time; });
            if (it == buckets.end()) {
                buckets.push_back({candidate.time, EventSet{{}, std::to_string(candidate.time)}});
                it = std::prev(buckets.end());
            }
            it->second.events.push_back(normalized(candidate));
        }
    }
    for (auto& [time, bucket] : buckets) {
        EventSet deduped = dedup_event_set(bucket);
        round.accepted.events.insert(round.accepted.events.end(), deduped.events.begin(),
                                     deduped.events.end());
    }
    round.vocabulary_after = expand_vocabulary(vocab, suggestions, threshold);
    for (const VocabSuggestion& entry : aggregate_suggestions(suggestions))
        if (entry.score < threshold && !round.vocabulary_after.contains(entry.slot, entry.token))
            round.pending.push_back(entry);
    return round;
}

std::vector<ExtractionRound> run_loop(const std::vector<Document>& docs, const Vocabulary& v0,
                                      ExtractorBackend& backend, double threshold,
                                      int max_rounds) {
    if (max_rounds < 1) throw ValidationError("max_rounds must be >= 1");
    std::vector<ExtractionRound> rounds;
    Vocabulary current = v0;
    std::vector<VocabSuggestion> carried;
    for (int i = 0; i < max_rounds; ++i) {
        rounds.push_back(run_round(docs, current, backend, threshold, i, carried));
        const bool fixed_point = rounds.back().vocabulary_after.version() == current.version();
        current = rounds.back().vocabulary_after;
        carried = rounds.back().pending;
        if (fixed_point) break;
    }
    return rounds;
}

AlignmentResult align_events(const EventSet& events, const std::vector<double>& series_times,
                             int window_len) {
    if (series_times.empty()) throw EmptySeries();
    if (window_len < 1) throw ValidationError("window_len must be >= 1");
    for (std::size_t i = 1; i < series_times.size(); ++i)
        if (!(series_times[i] > series_times[i - 1]))
            throw ValidationError("series timestamps must be strictly increasing");

    // window index -> raw event list, in first-assignment order
    std::vector<std::pair<std::size_t, EventSet>> grouped;
    AlignmentResult result;
    for (const AaodEvent& e : events.events) {
        auto it = std::lower_bound(series_times.begin(), series_times.end(), e.time);
        if (it == series_times.end()) {
            ++result.dropped;
            continue;
        }
        const auto idx = static_cast<std::size_t>(it - series_times.begin());
        auto group = std::find_if(grouped.begin(), grouped.end(),
                                  [&](const auto& g) { return g.first == idx; });
        if (group == grouped.end()) {
            grouped.push_back({idx, EventSet{{}, "win-" + std::to_string(idx)}});
            group = std::prev(grouped.end());
        }
        group->second.events.push_back(e);
    }
    std::sort(grouped.begin(), grouped.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [idx, set] : grouped)
        result.windows.push_back({idx, dedup_event_set(set)});
    return result;
}

namespace {

std::vector<std::string> split_sentences(const std::string& body) {
    std::vector<std::string> sentences;
    std::string current;
    for (char c : body) {
        if (c == '.' || c == ';' || c == '\n' || c == '!' || c == '?') {
            if (!current.empty()) sentences.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) sentences.push_back(current);
    return sentences;
}

std::vector<std::string> split_words(const std::string& sentence) {
    std::vector<std::string> words;
    std::string word;
    for (unsigned char c : sentence) {
        if (std::isalnum(c) || c == '-' || c == '\'') {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (!word.empty()) {
            words.push_back(word);
            word.clear();
        }
    }
    if (!word.empty()) words.push_back(word);
    return words;
}

}  // namespace

RuleBackend::RuleBackend(std::vector<Keyword> keywords) {
    for (Keyword& kw : keywords) {
        kw.match = normalize_token(kw.match);
        kw.token = normalize_token(kw.token);
        for (SlotToken& implied : kw.implies) implied.token = normalize_token(implied.token);
        const std::size_t words = split_words(kw.match).size();
        max_phrase_words_ = std::max(max_phrase_words_, words);
        keywords_.emplace(kw.match, std::move(kw));
    }
}

RuleBackend RuleBackend::from_vocabulary(const Vocabulary& vocab) {
    std::vector<Keyword> keywords;
    for (SlotKind kind : kSlotKinds)
        for (const std::string& token : vocab.tokens(kind))
            keywords.push_back({token, kind, token, {}, 0, 1.0});
    return RuleBackend(std::move(keywords));
}

BackendOutput RuleBackend::extract(const Document& doc, const Vocabulary& vocab) {
    BackendOutput output;
    std::vector<std::pair<SlotKind, std::string>> suggested;  // dedup within the document
    for (const std::string& sentence : split_sentences(doc.body)) {
        const std::vector<std::string> words = split_words(sentence);
        std::array<std::optional<std::string>, 4> filled;
        int type_index = 0;

        auto fill = [&](SlotKind slot, const std::string& token) {
            auto& cell = filled[static_cast<std::size_t>(slot)];
            if (!cell) cell = token;
        };
        auto note_suggestion = [&](SlotKind slot, const std::string& token, double score) {
            if (vocab.contains(slot, token)) return;
            const auto key = std::make_pair(slot, token);
            if (std::find(suggested.begin(), suggested.end(), key) != suggested.end()) return;
            suggested.push_back(key);
            output.suggestions.push_back({slot, token, score});
        };

        std::size_t i = 0;
        while (i < words.size()) {
            const Keyword* hit = nullptr;
            std::size_t hit_len = 0;
            const std::size_t longest = std::min(max_phrase_words_, words.size() - i);
            for (std::size_t len = longest; len >= 1; --len) {
                std::string phrase = words[i];
                for (std::size_t w = 1; w < len; ++w) phrase += " " + words[i + w];
                auto it = keywords_.find(phrase);
                if (it != keywords_.end()) {
                    hit = &it->second;
                    hit_len = len;
                    break;
                }
            }
            if (!hit) {
                ++i;
                continue;
            }
            const bool action_hit =
                hit->slot == SlotKind::Action && !filled[static_cast<std::size_t>(SlotKind::Action)];
            fill(hit->slot, hit->token);
            note_suggestion(hit->slot, hit->token, hit->suggestion_score);
            if (action_hit) type_index = hit->type_index;
            for (const SlotToken& implied : hit->implies) {
                fill(implied.slot, implied.token);
                note_suggestion(implied.slot, implied.token, hit->suggestion_score);
            }
            i += hit_len;
        }

        if (filled[0] && filled[1] && filled[2] && filled[3]) {
            AaodEvent event;
            event.actor = *filled[0];
            event.action = *filled[1];
            event.object = *filled[2];
            event.direction = *filled[3];
            event.time = doc.time;
            event.type_index = type_index;
            output.candidates.push_back(std::move(event));
        }
    }
    return output;
}

std::unique_ptr<ExtractorBackend> make_backend(
    const std::string& name, const std::vector<RuleBackend::Keyword>& keywords) {
    if (name == "rule") return std::make_unique<RuleBackend>(keywords);
    throw ValidationError("unknown extractor backend '" + name + "'");
}

}  // namespace evkit
