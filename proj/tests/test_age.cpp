#include <doctest.h>

#include <sstream>

#include "evkit/age.hpp"
#include "evkit/io.hpp"

using namespace evkit;

namespace {

const char* kFixtures = EVKIT_FIXTURES_DIR;

Vocabulary seed_vocab() { return load_vocabulary(std::string(kFixtures) + "/vocab_seed.json"); }

RuleBackend fixture_backend() {
    return RuleBackend(load_keyword_table(std::string(kFixtures) + "/rule_table.json"));
}

std::vector<Document> fixture_corpus() {
    return load_documents(std::string(kFixtures) + "/corpus.jsonl");
}

std::string dump_rounds(const std::vector<ExtractionRound>& rounds) {
    std::ostringstream out;
    for (const ExtractionRound& r : rounds) {
        out << "round " << r.round_index << " rejected=" << r.rejected_count
            << " version=" << r.vocabulary_after.version() << "\n";
        for (const AaodEvent& e : r.accepted.events)
            out << e.time << "|" << e.type_index << "|" << e.actor << "|" << e.action << "|"
                << e.object << "|" << e.direction << "\n";
        for (SlotKind kind : kSlotKinds) {
            out << slot_name(kind) << ":";
            for (const auto& tok : r.vocabulary_after.tokens(kind)) out << " " << tok;
            out << "\n";
        }
    }
    return out.str();
}

struct FailingBackend : ExtractorBackend {
    BackendOutput extract(const Document& doc, const Vocabulary&) override {
        if (doc.id == "d2") throw std::runtime_error("upstream timeout");
        return {};
    }
};

}  // namespace

TEST_CASE("run_round on an empty corpus changes nothing") {
    const Vocabulary v = seed_vocab();
    RuleBackend backend = fixture_backend();
    const ExtractionRound round = run_round({}, v, backend, 0.5);
    CHECK(round.accepted.events.empty());
    CHECK(round.rejected_count == 0);
    CHECK(round.vocabulary_after.version() == v.version());
}

TEST_CASE("rule backend extracts the keyword-table fixture event") {
    const Vocabulary v = seed_vocab();
    RuleBackend backend = fixture_backend();
    Document doc{"d0", 3.0, "OPEC cut production"};
    const ExtractionRound round = run_round({doc}, v, backend, 0.5);
    REQUIRE(round.accepted.events.size() == 1);
    const AaodEvent& e = round.accepted.events[0];
    CHECK(e.actor == "opec");
    CHECK(e.action == "cut");
    CHECK(e.object == "production");
    CHECK(e.direction == "down");  // implied by the action keyword
    CHECK(e.time == 3.0);
    CHECK(e.type_index == 0);
}

TEST_CASE("out-of-vocab candidates are rejected now and suggested for later") {
    const Vocabulary v = seed_vocab();
    RuleBackend backend = fixture_backend();
    Document doc{"d2", 12.0, "Refiners raised margins amid strong demand."};

    const ExtractionRound first = run_round({doc}, v, backend, 0.5);
    CHECK(first.accepted.events.empty());
    CHECK(first.rejected_count == 1);
    CHECK(first.vocabulary_after.contains(SlotKind::Object, "margins"));
    CHECK(first.vocabulary_after.version() == v.version() + 1);

    const ExtractionRound second = run_round({doc}, first.vocabulary_after, backend, 0.5, 1);
    REQUIRE(second.accepted.events.size() == 1);
    CHECK(second.accepted.events[0].object == "margins");
    CHECK(second.rejected_count == 0);
}

TEST_CASE("run_loop stops at the vocabulary fixed point") {
    const Vocabulary v = seed_vocab();
    RuleBackend backend = fixture_backend();

    SUBCASE("no suggestions means a single round") {
        Document doc{"d0", 3.0, "OPEC cut production"};
        const auto rounds = run_loop({doc}, v, backend, 0.5, 10);
        CHECK(rounds.size() == 1);
    }

    SUBCASE("fixture corpus needs one expansion") {
        const auto rounds = run_loop(fixture_corpus(), v, backend, 0.5, 10);
        REQUIRE(rounds.size() == 2);
        CHECK(rounds[0].rejected_count == 1);
        CHECK(rounds[1].rejected_count == 0);
        CHECK(rounds[1].accepted.events.size() > rounds[0].accepted.events.size());
        // later rounds re-extract everything the earlier round accepted
        for (const AaodEvent& e : rounds[0].accepted.events) {
            bool found = false;
            for (const AaodEvent& e2 : rounds[1].accepted.events)
                found = found || (tuple_key(e) == tuple_key(e2) && e.time == e2.time);
            CHECK(found);
        }
    }

    SUBCASE("max_rounds cuts the loop with suggestions still pending") {
        const auto rounds = run_loop(fixture_corpus(), v, backend, 0.5, 1);
        REQUIRE(rounds.size() == 1);
        CHECK(rounds[0].vocabulary_after.version() == v.version() + 1);
    }
}

TEST_CASE("suggestion scores accumulate across rounds") {
    // "margins" scores 0.3 per round (below the 0.5 threshold on its
    // own); "inventories" clears it immediately, keeping the loop alive
    // long enough for the carried margins score to cross.
    std::vector<RuleBackend::Keyword> keywords = {
        {"margins", SlotKind::Object, "margins", {}, 0, 0.3},
        {"inventories", SlotKind::Object, "inventories", {}, 0, 0.6},
    };
    RuleBackend backend{std::move(keywords)};
    const std::vector<Document> docs = {{"d1", 1.0, "margins and inventories tightened"}};
    const Vocabulary v0 = seed_vocab();

    const auto rounds = run_loop(docs, v0, backend, 0.5, 10);
    REQUIRE(rounds.size() == 3);
    CHECK(rounds[0].vocabulary_after.contains(SlotKind::Object, "inventories"));
    CHECK_FALSE(rounds[0].vocabulary_after.contains(SlotKind::Object, "margins"));
    REQUIRE(rounds[0].pending.size() == 1);
    CHECK(rounds[0].pending[0].score == doctest::Approx(0.3));
    CHECK(rounds[1].vocabulary_after.contains(SlotKind::Object, "margins"));  // 0.3 + 0.3
    CHECK(rounds[1].pending.empty());
    CHECK(rounds[2].vocabulary_after.version() == rounds[1].vocabulary_after.version());
}

TEST_CASE("accepted events validate against the round-start vocabulary") {
    Vocabulary current = seed_vocab();
    RuleBackend backend = fixture_backend();
    const auto rounds = run_loop(fixture_corpus(), current, backend, 0.5, 10);
    for (const ExtractionRound& round : rounds) {
        for (const AaodEvent& e : round.accepted.events)
            CHECK(validate_event(e, current).accepted);
        CHECK(round.vocabulary_after.version() >= current.version());
        current = round.vocabulary_after;
    }
}

TEST_CASE("run_loop with the rule backend is reproducible") {
    const Vocabulary v = seed_vocab();
    RuleBackend backend_a = fixture_backend();
    RuleBackend backend_b = fixture_backend();
    const auto first = run_loop(fixture_corpus(), v, backend_a, 0.5, 10);
    const auto second = run_loop(fixture_corpus(), v, backend_b, 0.5, 10);
    CHECK(dump_rounds(first) == dump_rounds(second));
}

TEST_CASE("backend failures abort the round and carry the document id") {
    const Vocabulary v = seed_vocab();
    FailingBackend backend;
    try {
        run_round(fixture_corpus(), v, backend, 0.5);
        FAIL("expected BackendFailure");
    } catch (const BackendFailure& e) {
        CHECK(e.document_id == "d2");
    }
}

TEST_CASE("align_events assigns windows by right endpoint") {
    const std::vector<double> times = {7.0, 14.0, 21.0, 28.0};
    EventSet events;
    AaodEvent e;
    e.actor = e.action = e.object = e.direction = "x";

    e.time = 10.0;  // mid-week
    events.events.push_back(e);
    e.time = 21.0;  // exactly on a timestamp
    events.events.push_back(e);
    e.time = 3.0;  // before the first timestamp
    events.events.push_back(e);
    e.time = 30.0;  // past the end
    events.events.push_back(e);

    // dedup happens per window, so use distinct tuples where needed
    events.events[1].actor = "y";
    events.events[2].actor = "z";

    const AlignmentResult aligned = align_events(events, times, 2);
    CHECK(aligned.dropped == 1);
    REQUIRE(aligned.windows.size() == 3);
    CHECK(aligned.windows[0].window_index == 0);  // t=3.0 -> first window
    CHECK(aligned.windows[0].events.events[0].actor == "z");
    CHECK(aligned.windows[1].window_index == 1);  // t=10.0 -> window ending 14.0
    CHECK(aligned.windows[2].window_index == 2);  // t=21.0 -> window ending 21.0
    CHECK(aligned.windows[2].events.events[0].actor == "y");
}

TEST_CASE("align_events rejects an empty series") {
    EventSet events;
    CHECK_THROWS_AS(align_events(events, {}, 2), EmptySeries);
}

TEST_CASE("unknown backend names are rejected by the registry") {
    CHECK_THROWS_AS(make_backend("llm-remote", {}), ValidationError);
    CHECK(make_backend("rule", {}) != nullptr);
}
