#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "evkit/io.hpp"

using namespace evkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("evkit-io-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("vocabulary files round-trip") {
    TempDir dir;
    Vocabulary v;
    v.add_token(SlotKind::Actor, "OPEC");
    v.add_token(SlotKind::Action, "cut");
    v.add_token(SlotKind::Object, "production");
    v.add_token(SlotKind::Direction, "down");
    v.add_token(SlotKind::Direction, "up");
    v.add_rule({CompositionRule::Kind::ForbidPair,
                {{SlotKind::Action, "cut"}, {SlotKind::Direction, "up"}}});
    v.set_version(3);

    save_vocabulary(v, dir.file("vocab.json"));
    const Vocabulary loaded = load_vocabulary(dir.file("vocab.json"));
    CHECK(loaded.version() == 3);
    CHECK(loaded.contains(SlotKind::Actor, "opec"));
    CHECK(loaded.tokens(SlotKind::Direction) == v.tokens(SlotKind::Direction));
    REQUIRE(loaded.rules().size() == 1);
    CHECK(loaded.rules()[0].kind == CompositionRule::Kind::ForbidPair);
}

TEST_CASE("vocabulary loader rejects broken files") {
    TempDir dir;
    CHECK_THROWS_AS(load_vocabulary(dir.file("absent.json")), IoError);

    write_text(dir.file("broken.json"), "{not json");
    CHECK_THROWS_AS(load_vocabulary(dir.file("broken.json")), ValidationError);

    write_text(dir.file("partial.json"), R"({"actor": ["opec"], "version": 0})");
    CHECK_THROWS_AS(load_vocabulary(dir.file("partial.json")), ValidationError);
}

TEST_CASE("event records round-trip with optional fields") {
    TempDir dir;
    std::vector<EventRecord> records(2);
    records[0].t = 3.5;
    records[0].type = 1;
    records[0].actor = "opec";
    records[0].action = "cut";
    records[0].object = "production";
    records[0].direction = "down";
    records[0].sample_id = "7";
    records[1].t = 9.0;
    records[1].type = 0;  // slot-less record, as used below the vocab layer

    save_event_records(records, dir.file("events.jsonl"));
    const auto loaded = load_event_records(dir.file("events.jsonl"));
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].t == 3.5);
    CHECK(loaded[0].sample_id == "7");
    CHECK(has_slots(loaded[0]));
    CHECK_FALSE(has_slots(loaded[1]));
    CHECK_THROWS_AS(to_aaod_event(loaded[1]), ValidationError);

    const EventSequence seq = to_event_sequence(loaded);
    CHECK(seq.horizon == 9.0);
    CHECK(seq.events[0].time == 3.5);
}

TEST_CASE("series csv loads levels and differences") {
    TempDir dir;
    write_text(dir.file("levels.csv"), "time,value\n0,100\n1,101\n2,99\n3,102\n");
    const DiffSeries levels = load_series_csv(dir.file("levels.csv"));
    REQUIRE(levels.dy.size() == 3);
    CHECK(levels.dy(0) == doctest::Approx(1.0));
    CHECK(levels.dy(1) == doctest::Approx(-2.0));
    CHECK(levels.dy(2) == doctest::Approx(3.0));
    CHECK(levels.y0 == 100.0);
    CHECK(levels.times(0) == 1.0);

    write_text(dir.file("diffs.csv"), "time,value\n0,1\n1,-2\n2,3\n");
    const DiffSeries diffs = load_series_csv(dir.file("diffs.csv"), true);
    REQUIRE(diffs.dy.size() == 3);
    CHECK_FALSE(diffs.y0.has_value());

    write_text(dir.file("bad.csv"), "time,value\n0\n");
    CHECK_THROWS_AS(load_series_csv(dir.file("bad.csv")), ValidationError);
}

TEST_CASE("parameter files round-trip") {
    TempDir dir;
    HawkesParams params;
    params.mu.resize(2);
    params.mu << 0.5, 0.3;
    params.alpha.resize(2, 2);
    params.alpha << 0.3, 0.1, 0.0, 0.25;
    params.beta = 1.2;
    save_hawkes_params(params, dir.file("hawkes.json"));
    const HawkesParams hp = load_hawkes_params(dir.file("hawkes.json"));
    CHECK(hp.mu == params.mu);
    CHECK(hp.alpha == params.alpha);
    CHECK(hp.beta == params.beta);

    IrfKernel kernel;
    kernel.max_horizon = 2;
    kernel.beta.resize(1, 3);
    kernel.beta << 1.0, 0.5, 0.25;
    save_irf_kernel(kernel, dir.file("irf.json"));
    const IrfKernel ik = load_irf_kernel(dir.file("irf.json"));
    CHECK(ik.max_horizon == 2);
    CHECK(ik.beta == kernel.beta);

    ArParams ar;
    ar.phi << 0.3, 0.2, 0.1, 0.05;
    ar.sigma = 1.5;
    save_ar_params(ar, dir.file("ar.json"));
    const ArParams ap = load_ar_params(dir.file("ar.json"));
    CHECK(ap.phi == ar.phi);
    CHECK(ap.sigma == 1.5);

    write_text(dir.file("super.json"),
               R"({"K":1,"mu":[0.5],"alpha":[[1.5]],"beta":1.0})");
    CHECK_THROWS_AS(load_hawkes_params(dir.file("super.json")), ValidationError);
}

TEST_CASE("generator config resolves component paths") {
    TempDir dir;
    write_text(dir.file("vocab.json"), R"({
      "actor": ["opec"], "action": ["cut"], "object": ["production"],
      "direction": ["down"], "version": 0})");
    write_text(dir.file("hawkes.json"),
               R"({"K":1,"mu":[0.1],"alpha":[[0.2]],"beta":1.0})");
    write_text(dir.file("config.json"), R"({
      "vocabulary": "vocab.json",
      "hawkes": "hawkes.json",
      "irf": {"H": 1, "beta": [[0.5, 0.25]]},
      "ar": {"phi": [0, 0, 0, 0], "sigma": 0.0},
      "mark_tables": [
        {"actor": {"opec": 1.0}, "action": {"cut": 1.0},
         "object": {"production": 1.0}, "direction": {"down": 1.0}}
      ],
      "T": 40, "y0": 10.0, "window": 4, "seed": 3})");

    const GeneratorConfig config = load_generator_config(dir.file("config.json"));
    CHECK(config.hawkes.mu(0) == 0.1);
    CHECK(config.irf.max_horizon == 1);
    CHECK(config.horizon_steps == 40);
    CHECK(config.seed == 3);
    CHECK(config.vocab.contains(SlotKind::Actor, "opec"));

    const SyntheticDataset dataset = generate(config);
    save_dataset(dataset, dir.file("dataset.jsonl"));
    CHECK(fs::exists(dir.file("dataset.jsonl.provenance.json")));
    const SyntheticDataset loaded = load_dataset(dir.file("dataset.jsonl"));
    REQUIRE(loaded.samples.size() == dataset.samples.size());
    CHECK(loaded.config_hash == dataset.config_hash);
    CHECK(loaded.seed == dataset.seed);
    for (std::size_t i = 0; i < loaded.samples.size(); ++i) {
        CHECK(loaded.samples[i].window == dataset.samples[i].window);
        CHECK(loaded.samples[i].window_end == dataset.samples[i].window_end);
        CHECK(loaded.samples[i].gold.events.size() == dataset.samples[i].gold.events.size());
    }
}

TEST_CASE("mark tables referencing unknown tokens are rejected") {
    TempDir dir;
    write_text(dir.file("vocab.json"), R"({
      "actor": ["opec"], "action": ["cut"], "object": ["production"],
      "direction": ["down"], "version": 0})");
    write_text(dir.file("config.json"), R"({
      "vocabulary": "vocab.json",
      "hawkes": {"K":1,"mu":[0.1],"alpha":[[0.2]],"beta":1.0},
      "irf": {"H": 0, "beta": [[0.5]]},
      "ar": {"phi": [0, 0, 0, 0], "sigma": 0.0},
      "mark_tables": [
        {"actor": {"nato": 1.0}, "action": {"cut": 1.0},
         "object": {"production": 1.0}, "direction": {"down": 1.0}}
      ],
      "T": 40, "y0": 10.0, "window": 4, "seed": 3})");
    CHECK_THROWS_AS(load_generator_config(dir.file("config.json")), ValidationError);
}

TEST_CASE("atomic writes leave no temp files behind") {
    TempDir dir;
    write_file_atomic(dir.file("out.txt"), "payload");
    std::ifstream in(dir.file("out.txt"));
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "payload");
    int entries = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir.path)) ++entries;
    CHECK(entries == 1);
}

TEST_CASE("documents load with required fields") {
    TempDir dir;
    write_text(dir.file("corpus.jsonl"),
               R"({"id": "a", "time": 3.0, "body": "OPEC cut production"})"
               "\n\n"
               R"({"id": "b", "time": 9.0, "body": "quiet week"})"
               "\n");
    const auto docs = load_documents(dir.file("corpus.jsonl"));
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].id == "a");
    CHECK(docs[1].time == 9.0);

    write_text(dir.file("missing.jsonl"), R"({"id": "a", "body": "no time"})" "\n");
    CHECK_THROWS_AS(load_documents(dir.file("missing.jsonl")), ValidationError);
}
