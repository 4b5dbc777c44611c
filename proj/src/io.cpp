#include "evkit/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace evkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json parse_json(const std::string& text, const fs::path& origin) {
    json parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded())
        throw ValidationError("malformed JSON in '" + origin.string() + "'");
    return parsed;
}

json load_json_file(const fs::path& path) { return parse_json(read_file(path), path); }

const json& require(const json& obj, const char* key, const fs::path& origin) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError("missing field '" + std::string(key) + "' in '" +
                              origin.string() + "'");
    return *it;
}

double as_number(const json& value, const char* key, const fs::path& origin) {
    if (!value.is_number())
        throw ValidationError("field '" + std::string(key) + "' in '" + origin.string() +
                              "' must be a number");
    return value.get<double>();
}

std::string as_string(const json& value, const char* key, const fs::path& origin) {
    if (!value.is_string())
        throw ValidationError("field '" + std::string(key) + "' in '" + origin.string() +
                              "' must be a string");
    return value.get<std::string>();
}

SlotKind parse_slot(const json& obj, const fs::path& origin) {
    const auto kind =
        slot_from_name(as_string(require(obj, "slot", origin), "slot", origin));
    if (!kind)
        throw ValidationError("unknown slot name in '" + origin.string() + "'");
    return *kind;
}

// Iterates non-empty lines, parsing each as a JSON object.
template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
    const std::string text = read_file(path);
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object())
            throw ValidationError("malformed record at " + path.string() + ":" +
                                  std::to_string(line_no));
        fn(record, line_no);
    }
}

}  // namespace

bool has_slots(const EventRecord& record) {
    return !record.actor.empty() && !record.action.empty() && !record.object.empty() &&
           !record.direction.empty();
}

AaodEvent to_aaod_event(const EventRecord& record) {
    if (!has_slots(record))
        throw ValidationError("event record at t=" + std::to_string(record.t) +
                              " is missing slot values");
    AaodEvent event;
    event.actor = record.actor;
    event.action = record.action;
    event.object = record.object;
    event.direction = record.direction;
    event.time = record.t;
    event.type_index = record.type;
    return event;
}

EventRecord to_event_record(const AaodEvent& event) {
    EventRecord record;
    record.t = event.time;
    record.type = event.type_index;
    record.actor = event.actor;
    record.action = event.action;
    record.object = event.object;
    record.direction = event.direction;
    return record;
}

EventSequence to_event_sequence(const std::vector<EventRecord>& records, double horizon) {
    EventSequence seq;
    seq.events.reserve(records.size());
    for (const EventRecord& r : records) seq.events.push_back({r.t, r.type});
    std::stable_sort(seq.events.begin(), seq.events.end(),
                     [](const TimedEvent& a, const TimedEvent& b) { return a.time < b.time; });
    if (horizon > 0) {
        seq.horizon = horizon;
    } else {
        seq.horizon = 0.0;
        for (const TimedEvent& e : seq.events) seq.horizon = std::max(seq.horizon, e.time);
    }
    return seq;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out.flush()) throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' onto '" + path.string() + "'");
}

Vocabulary load_vocabulary(const fs::path& path) {
    const json doc = load_json_file(path);
    if (!doc.is_object()) throw ValidationError("vocabulary file must hold a JSON object");
    Vocabulary vocab;
    for (SlotKind kind : kSlotKinds) {
        const json& list = require(doc, slot_name(kind), path);
        if (!list.is_array())
            throw ValidationError(std::string("'") + slot_name(kind) + "' must be an array");
        for (const json& tok : list) vocab.add_token(kind, as_string(tok, slot_name(kind), path));
    }
    if (doc.contains("constraints")) {
        for (const json& entry : doc.at("constraints")) {
            CompositionRule rule;
            const std::string kind = as_string(require(entry, "kind", path), "kind", path);
            if (kind == "forbid_pair") {
                rule.kind = CompositionRule::Kind::ForbidPair;
            } else if (kind == "require_direction") {
                rule.kind = CompositionRule::Kind::RequireDirection;
            } else {
                throw ValidationError("unknown constraint kind '" + kind + "'");
            }
            for (const json& op : require(entry, "operands", path))
                rule.operands.push_back(
                    {parse_slot(op, path), as_string(require(op, "token", path), "token", path)});
            vocab.add_rule(rule);
        }
    }
    vocab.set_version(
        static_cast<int>(as_number(require(doc, "version", path), "version", path)));
    return vocab;
}

namespace {

json vocabulary_to_json(const Vocabulary& vocab) {
    json doc;
    for (SlotKind kind : kSlotKinds) doc[slot_name(kind)] = vocab.tokens(kind);
    json constraints = json::array();
    for (const CompositionRule& rule : vocab.rules()) {
        json entry;
        entry["kind"] = rule.kind == CompositionRule::Kind::ForbidPair ? "forbid_pair"
                                                                       : "require_direction";
        json operands = json::array();
        for (const SlotToken& op : rule.operands)
            operands.push_back({{"slot", slot_name(op.slot)}, {"token", op.token}});
        entry["operands"] = operands;
        constraints.push_back(entry);
    }
    if (!constraints.empty()) doc["constraints"] = constraints;
    doc["version"] = vocab.version();
    return doc;
}

}  // namespace

void save_vocabulary(const Vocabulary& vocab, const fs::path& path) {
    write_file_atomic(path, vocabulary_to_json(vocab).dump(2) + "\n");
}

namespace {

EventRecord record_from_json(const json& obj, const fs::path& path) {
    EventRecord record;
    record.t = as_number(require(obj, "t", path), "t", path);
    record.type = static_cast<int>(as_number(require(obj, "type", path), "type", path));
    if (obj.contains("actor")) record.actor = as_string(obj.at("actor"), "actor", path);
    if (obj.contains("action")) record.action = as_string(obj.at("action"), "action", path);
    if (obj.contains("object")) record.object = as_string(obj.at("object"), "object", path);
    if (obj.contains("direction"))
        record.direction = as_string(obj.at("direction"), "direction", path);
    if (obj.contains("sample_id")) {
        const json& sid = obj.at("sample_id");
        record.sample_id = sid.is_string() ? sid.get<std::string>() : sid.dump();
    }
    if (obj.contains("month")) {
        const json& m = obj.at("month");
        record.month = m.is_string() ? m.get<std::string>() : m.dump();
    }
    return record;
}

json record_to_json(const EventRecord& record) {
    json obj;
    obj["t"] = record.t;
    obj["type"] = record.type;
    if (!record.actor.empty()) obj["actor"] = record.actor;
    if (!record.action.empty()) obj["action"] = record.action;
    if (!record.object.empty()) obj["object"] = record.object;
    if (!record.direction.empty()) obj["direction"] = record.direction;
    if (record.sample_id) obj["sample_id"] = *record.sample_id;
    if (record.month) obj["month"] = *record.month;
    return obj;
}

}  // namespace

std::vector<EventRecord> load_event_records(const fs::path& path) {
    std::vector<EventRecord> records;
    for_each_record(path,
                    [&](const json& obj, std::size_t) { records.push_back(record_from_json(obj, path)); });
    return records;
}

void save_event_records(const std::vector<EventRecord>& records, const fs::path& path) {
    std::string out;
    for (const EventRecord& record : records) out += record_to_json(record).dump() + "\n";
    write_file_atomic(path, out);
}

std::vector<Document> load_documents(const fs::path& path) {
    std::vector<Document> docs;
    for_each_record(path, [&](const json& obj, std::size_t) {
        Document doc;
        doc.id = as_string(require(obj, "id", path), "id", path);
        doc.time = as_number(require(obj, "time", path), "time", path);
        doc.body = as_string(require(obj, "body", path), "body", path);
        docs.push_back(std::move(doc));
    });
    return docs;
}

DiffSeries load_series_csv(const fs::path& path, bool differenced) {
    const std::string text = read_file(path);
    std::istringstream lines(text);
    std::string line;
    std::vector<double> times, values;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("expected 'time,value' at " + path.string() + ":" +
                                  std::to_string(line_no));
        if (first) {
            first = false;
            // header row: skip when the first field is not numeric
            try {
                std::size_t used = 0;
                std::stod(line.substr(0, comma), &used);
                if (used != comma) continue;
            } catch (const std::exception&) {
                continue;
            }
        }
        try {
            times.push_back(std::stod(line.substr(0, comma)));
            values.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ValidationError("non-numeric row at " + path.string() + ":" +
                                  std::to_string(line_no));
        }
    }
    DiffSeries series;
    if (differenced) {
        series.times = Eigen::Map<Eigen::VectorXd>(times.data(), times.size());
        series.dy = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
    } else {
        if (values.size() < 2)
            throw ValidationError("level series needs at least two rows to difference");
        series.times = Eigen::Map<Eigen::VectorXd>(times.data() + 1, times.size() - 1);
        series.dy.resize(static_cast<Eigen::Index>(values.size() - 1));
        for (std::size_t i = 1; i < values.size(); ++i)
            series.dy(static_cast<Eigen::Index>(i - 1)) = values[i] - values[i - 1];
        series.y0 = values[0];
    }
    check_series(series);
    return series;
}

namespace {

Eigen::MatrixXd matrix_from_json(const json& rows, const char* key, const fs::path& origin) {
    if (!rows.is_array() || rows.empty() || !rows[0].is_array())
        throw ValidationError("field '" + std::string(key) + "' in '" + origin.string() +
                              "' must be an array of rows");
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const json& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols)
            throw ValidationError("ragged matrix in field '" + std::string(key) + "'");
        for (Eigen::Index c = 0; c < n_cols; ++c)
            m(r, c) = as_number(row[static_cast<std::size_t>(c)], key, origin);
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

HawkesParams hawkes_from_json(const json& doc, const fs::path& origin) {
    HawkesParams params;
    const json& mu = require(doc, "mu", origin);
    params.mu.resize(static_cast<Eigen::Index>(mu.size()));
    for (Eigen::Index i = 0; i < params.mu.size(); ++i)
        params.mu(i) = as_number(mu[static_cast<std::size_t>(i)], "mu", origin);
    params.alpha = matrix_from_json(require(doc, "alpha", origin), "alpha", origin);
    params.beta = as_number(require(doc, "beta", origin), "beta", origin);
    if (doc.contains("K") &&
        static_cast<int>(as_number(doc.at("K"), "K", origin)) != params.num_types())
        throw ValidationError("'K' does not match len(mu) in '" + origin.string() + "'");
    check_params(params);
    return params;
}

IrfKernel irf_from_json(const json& doc, const fs::path& origin) {
    IrfKernel kernel;
    kernel.max_horizon = static_cast<int>(as_number(require(doc, "H", origin), "H", origin));
    kernel.beta = matrix_from_json(require(doc, "beta", origin), "beta", origin);
    if (doc.contains("se")) kernel.se = matrix_from_json(doc.at("se"), "se", origin);
    if (kernel.beta.cols() != kernel.max_horizon + 1)
        throw ValidationError("irf beta must have H+1 columns in '" + origin.string() + "'");
    return kernel;
}

ArParams ar_from_json(const json& doc, const fs::path& origin) {
    ArParams params;
    const json& phi = require(doc, "phi", origin);
    if (!phi.is_array() || phi.size() != 4)
        throw ValidationError("'phi' must hold exactly four coefficients");
    for (int i = 0; i < 4; ++i) params.phi(i) = as_number(phi[i], "phi", origin);
    params.sigma = as_number(require(doc, "sigma", origin), "sigma", origin);
    if (params.sigma < 0) throw ValidationError("'sigma' must be nonnegative");
    return params;
}

}  // namespace

HawkesParams load_hawkes_params(const fs::path& path) {
    return hawkes_from_json(load_json_file(path), path);
}

void save_hawkes_params(const HawkesParams& params, const fs::path& path) {
    json doc;
    doc["K"] = params.num_types();
    doc["mu"] = std::vector<double>(params.mu.data(), params.mu.data() + params.mu.size());
    doc["alpha"] = matrix_to_json(params.alpha);
    doc["beta"] = params.beta;
    write_file_atomic(path, doc.dump(2) + "\n");
}

IrfKernel load_irf_kernel(const fs::path& path) {
    return irf_from_json(load_json_file(path), path);
}

void save_irf_kernel(const IrfKernel& kernel, const fs::path& path) {
    json doc;
    doc["H"] = kernel.max_horizon;
    doc["beta"] = matrix_to_json(kernel.beta);
    if (kernel.se.size() > 0) doc["se"] = matrix_to_json(kernel.se);
    write_file_atomic(path, doc.dump(2) + "\n");
}

ArParams load_ar_params(const fs::path& path) {
    return ar_from_json(load_json_file(path), path);
}

void save_ar_params(const ArParams& params, const fs::path& path) {
    json doc;
    doc["phi"] = std::vector<double>{params.phi(0), params.phi(1), params.phi(2), params.phi(3)};
    doc["sigma"] = params.sigma;
    write_file_atomic(path, doc.dump(2) + "\n");
}

std::vector<RuleBackend::Keyword> load_keyword_table(const fs::path& path) {
    const json doc = load_json_file(path);
    std::vector<RuleBackend::Keyword> keywords;
    for (const json& entry : require(doc, "keywords", path)) {
        RuleBackend::Keyword kw;
        kw.match = as_string(require(entry, "match", path), "match", path);
        kw.slot = parse_slot(entry, path);
        kw.token = as_string(require(entry, "token", path), "token", path);
        if (entry.contains("implies"))
            for (const json& implied : entry.at("implies"))
                kw.implies.push_back({parse_slot(implied, path),
                                      as_string(require(implied, "token", path), "token", path)});
        if (entry.contains("type"))
            kw.type_index = static_cast<int>(as_number(entry.at("type"), "type", path));
        if (entry.contains("score"))
            kw.suggestion_score = as_number(entry.at("score"), "score", path);
        keywords.push_back(std::move(kw));
    }
    return keywords;
}

GeneratorConfig load_generator_config(const fs::path& path) {
    const json doc = load_json_file(path);
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto resolve = [&](const std::string& rel) {
        const fs::path p(rel);
        return p.is_absolute() ? p : base / p;
    };
    auto block = [&](const char* key) -> json {
        const json& value = require(doc, key, path);
        if (value.is_string()) return load_json_file(resolve(value.get<std::string>()));
        return value;
    };

    GeneratorConfig config;
    config.vocab = load_vocabulary(
        resolve(as_string(require(doc, "vocabulary", path), "vocabulary", path)));
    config.hawkes = hawkes_from_json(block("hawkes"), path);
    config.irf = irf_from_json(block("irf"), path);
    config.ar = ar_from_json(block("ar"), path);
    if (doc.contains("mark_tables")) {
        for (const json& table_json : doc.at("mark_tables")) {
            MarkTable table;
            for (std::size_t s = 0; s < 4; ++s) {
                const char* name = slot_name(kSlotKinds[s]);
                if (!table_json.contains(name)) continue;
                for (const auto& [token, weight] : table_json.at(name).items())
                    table.slots[s].push_back({token, as_number(weight, name, path)});
            }
            config.mark_tables.push_back(std::move(table));
        }
    }
    config.horizon_steps =
        static_cast<long long>(as_number(require(doc, "T", path), "T", path));
    config.y0 = as_number(require(doc, "y0", path), "y0", path);
    config.window = static_cast<int>(as_number(require(doc, "window", path), "window", path));
    if (doc.contains("stride"))
        config.stride = static_cast<int>(as_number(doc.at("stride"), "stride", path));
    if (doc.contains("seed"))
        config.seed = static_cast<std::uint64_t>(as_number(doc.at("seed"), "seed", path));
    check_config(config);
    return config;
}

void save_dataset(const SyntheticDataset& dataset, const fs::path& path) {
    std::string out;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const PairedSample& sample = dataset.samples[i];
        json line;
        line["id"] = i;
        line["window"] = std::vector<double>(sample.window.data(),
                                             sample.window.data() + sample.window.size());
        line["window_end"] = sample.window_end;
        json gold = json::array();
        for (const AaodEvent& e : sample.gold.events)
            gold.push_back(record_to_json(to_event_record(e)));
        line["gold"] = gold;
        out += line.dump() + "\n";
    }
    write_file_atomic(path, out);

    json provenance;
    provenance["config_hash"] = dataset.config_hash;
    provenance["seed"] = dataset.seed;
    fs::path sidecar = path;
    sidecar += ".provenance.json";
    write_file_atomic(sidecar, provenance.dump(2) + "\n");
}

SyntheticDataset load_dataset(const fs::path& path) {
    SyntheticDataset dataset;
    for_each_record(path, [&](const json& obj, std::size_t) {
        PairedSample sample;
        const json& window = require(obj, "window", path);
        sample.window.resize(static_cast<Eigen::Index>(window.size()));
        for (Eigen::Index i = 0; i < sample.window.size(); ++i)
            sample.window(i) = as_number(window[static_cast<std::size_t>(i)], "window", path);
        sample.window_end =
            as_number(require(obj, "window_end", path), "window_end", path);
        sample.gold.bucket = "sample-" + std::to_string(dataset.samples.size());
        for (const json& e : require(obj, "gold", path))
            sample.gold.events.push_back(to_aaod_event(record_from_json(e, path)));
        dataset.samples.push_back(std::move(sample));
    });
    fs::path sidecar = path;
    sidecar += ".provenance.json";
    if (fs::exists(sidecar)) {
        const json provenance = load_json_file(sidecar);
        if (provenance.contains("config_hash"))
            dataset.config_hash = provenance.at("config_hash").get<std::string>();
        if (provenance.contains("seed"))
            dataset.seed = provenance.at("seed").get<std::uint64_t>();
    }
    return dataset;
}

void save_extraction_report(const std::vector<ExtractionRound>& rounds, const Vocabulary& v0,
                            const fs::path& path) {
    json doc;
    json round_list = json::array();
    const Vocabulary* before = &v0;
    for (const ExtractionRound& round : rounds) {
        json entry;
        entry["round"] = round.round_index;
        entry["accepted"] = round.accepted.events.size();
        entry["rejected"] = round.rejected_count;
        entry["vocab_version_after"] = round.vocabulary_after.version();
        json added;
        for (SlotKind kind : kSlotKinds) {
            std::vector<std::string> fresh;
            for (const std::string& tok : round.vocabulary_after.tokens(kind))
                if (!before->contains(kind, tok)) fresh.push_back(tok);
            added[slot_name(kind)] = fresh;
        }
        entry["added"] = added;
        round_list.push_back(entry);
        before = &round.vocabulary_after;
    }
    doc["rounds"] = round_list;
    write_file_atomic(path, doc.dump(2) + "\n");
}

void save_monthly_report(const MonthlyReport& report, const fs::path& path) {
    json doc;
    json months = json::array();
    for (const auto& [month, score] : report.per_month) {
        json entry;
        entry["month"] = month;
        entry["matched"] = score.matched;
        entry["n_pred"] = score.n_pred;
        entry["n_gold"] = score.n_gold;
        if (score.precision_defined) entry["precision"] = score.precision;
        if (score.recall_defined) entry["recall"] = score.recall;
        months.push_back(entry);
    }
    doc["months"] = months;
    doc["overall"] = {{"precision", report.overall_precision},
                      {"recall", report.overall_recall}};
    write_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace evkit
