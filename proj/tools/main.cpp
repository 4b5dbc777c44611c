#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "evkit/age.hpp"
#include "evkit/dynamics.hpp"
#include "evkit/evaluator.hpp"
#include "evkit/generator.hpp"
#include "evkit/hawkes.hpp"
#include "evkit/io.hpp"
#include "evkit/vocab.hpp"

namespace fs = std::filesystem;
using namespace evkit;

namespace {

bool g_quiet = false;

void info(const std::string& message) {
    if (!g_quiet) std::cout << message << "\n";
}

std::string month_key(double time, double month_len) {
    return std::to_string(static_cast<long long>(std::floor(time / month_len)));
}

std::vector<RuleBackend::Keyword> keywords_from_vocab(const Vocabulary& vocab) {
    std::vector<RuleBackend::Keyword> keywords;
    for (SlotKind kind : kSlotKinds)
        for (const std::string& token : vocab.tokens(kind))
            keywords.push_back({token, kind, token, {}, 0, 1.0});
    return keywords;
}

int cmd_extract(const std::string& corpus_path, const std::string& vocab_path,
                const std::string& backend_name, const std::string& table_path,
                double threshold, int max_rounds, const std::string& out_dir) {
    const std::vector<Document> docs = load_documents(corpus_path);
    const Vocabulary v0 = load_vocabulary(vocab_path);
    const std::vector<RuleBackend::Keyword> keywords =
        table_path.empty() ? keywords_from_vocab(v0) : load_keyword_table(table_path);
    auto backend = make_backend(backend_name, keywords);

    const std::vector<ExtractionRound> rounds =
        run_loop(docs, v0, *backend, threshold, max_rounds);
    const ExtractionRound& last = rounds.back();

    fs::create_directories(out_dir);
    std::vector<EventRecord> records;
    for (const AaodEvent& e : last.accepted.events) records.push_back(to_event_record(e));
    save_event_records(records, fs::path(out_dir) / "events.jsonl");
    save_vocabulary(last.vocabulary_after, fs::path(out_dir) / "vocabulary.json");
    save_extraction_report(rounds, v0, fs::path(out_dir) / "extract_report.json");

    info("rounds=" + std::to_string(rounds.size()) +
         " accepted=" + std::to_string(last.accepted.events.size()) +
         " rejected_last=" + std::to_string(last.rejected_count) + " vocab_version=" +
         std::to_string(v0.version()) + "->" + std::to_string(last.vocabulary_after.version()));
    return 0;
}

int cmd_fit_hawkes(const std::string& events_path, int num_types, double horizon,
                   const std::string& init_path, int max_iterations,
                   const std::string& out_path) {
    const std::vector<EventRecord> records = load_event_records(events_path);
    if (records.empty()) throw ValidationError("events file holds no records");
    const EventSequence seq = to_event_sequence(records, horizon);
    check_sequence(seq, num_types);

    std::optional<HawkesParams> init;
    if (!init_path.empty()) init = load_hawkes_params(init_path);
    HawkesFitOptions opts;
    opts.max_iterations = max_iterations;
    const HawkesFit fit = fit_hawkes(seq, num_types, init ? &*init : nullptr, opts);
    save_hawkes_params(fit.params, out_path);

    char line[160];
    std::snprintf(line, sizeof(line), "log_likelihood=%.6f iterations=%d converged=%s",
                  fit.log_likelihood, fit.iterations, fit.converged ? "yes" : "no");
    info(line);
    if (!fit.converged) {
        std::cerr << "fit did not reach the relative tolerance; wrote best parameters so far\n";
        return 3;
    }
    return 0;
}

int cmd_estimate_irf(const std::string& series_path, const std::string& events_path,
                     bool differenced, int max_horizon, int num_types, int dy_lags,
                     const std::string& out_path) {
    const DiffSeries series = load_series_csv(series_path, differenced);
    const std::vector<EventRecord> records = load_event_records(events_path);
    if (records.empty()) throw ValidationError("events file holds no records");
    const EventSequence seq = to_event_sequence(records);
    int k = num_types;
    if (k <= 0) {
        for (const TimedEvent& e : seq.events) k = std::max(k, e.type + 1);
    }
    ControlsSpec controls;
    controls.dy_lags = dy_lags;
    const IrfKernel kernel = estimate_irf(series, seq, k, max_horizon, controls);
    save_irf_kernel(kernel, out_path);

    for (int type = 0; type < k; ++type) {
        std::string line = "beta[" + std::to_string(type) + "]=";
        for (int h = 0; h <= kernel.max_horizon; ++h) {
            char value[32];
            std::snprintf(value, sizeof(value), " %.4f", kernel.beta(type, h));
            line += value;
        }
        info(line);
    }
    return 0;
}

int cmd_fit_ar(const std::string& series_path, bool differenced, const std::string& out_path) {
    const DiffSeries series = load_series_csv(series_path, differenced);
    const ArFit fit = fit_ar(series);
    save_ar_params(fit.params, out_path);
    if (fit.degenerate)
        std::cerr << "warning: constant differences, coefficients forced to zero\n";
    else if (fit.params.companion_radius() >= 1.0)
        std::cerr << "warning: fitted AR coefficients are nonstationary\n";
    char line[160];
    std::snprintf(line, sizeof(line), "phi=(%.4f, %.4f, %.4f, %.4f) sigma=%.6f",
                  fit.params.phi(0), fit.params.phi(1), fit.params.phi(2), fit.params.phi(3),
                  fit.params.sigma);
    info(line);
    return 0;
}

int cmd_generate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed_override) {
    GeneratorConfig config = load_generator_config(config_path);
    if (seed_override) config.seed = *seed_override;
    const SyntheticDataset dataset = generate(config);
    save_dataset(dataset, out_path);
    if (config.ar.companion_radius() >= 1.0)
        std::cerr << "warning: AR background is nonstationary\n";
    info("samples=" + std::to_string(dataset.samples.size()) +
         " config_hash=" + dataset.config_hash + " seed=" + std::to_string(dataset.seed));
    return 0;
}

bool looks_like_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto parsed = nlohmann::json::parse(line, nullptr, false);
        return parsed.is_object() && parsed.contains("gold") && parsed.contains("window_end");
    }
    return false;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gold_path, int min_slots,
                 double month_len, const std::string& out_path) {
    if (month_len <= 0) throw ValidationError("month length must be positive");
    const std::vector<EventRecord> pred_records = load_event_records(pred_path);
    MatchRule rule;
    rule.min_slots = min_slots;

    std::vector<MonthlySample> samples;
    if (looks_like_dataset(gold_path)) {
        // Gold is a generated dataset: predictions join samples by id and
        // inherit the sample's month (from window_end).
        const SyntheticDataset dataset = load_dataset(gold_path);
        std::unordered_map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < dataset.samples.size(); ++i)
            index.emplace(std::to_string(i), i);
        std::vector<EventSet> preds(dataset.samples.size());
        for (const EventRecord& record : pred_records) {
            if (!record.sample_id)
                throw ValidationError("prediction record lacks the sample_id field");
            auto it = index.find(*record.sample_id);
            if (it == index.end())
                throw ValidationError("prediction refers to unknown sample '" +
                                      *record.sample_id + "'");
            preds[it->second].events.push_back(to_aaod_event(record));
        }
        for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
            MonthlySample sample;
            sample.month = month_key(dataset.samples[i].window_end, month_len);
            sample.preds = preds[i];
            sample.golds = dataset.samples[i].gold;
            samples.push_back(std::move(sample));
        }
    } else {
        // Plain event records on both sides: each record carries its own
        // month, explicitly or derived from t.
        const std::vector<EventRecord> gold_records = load_event_records(gold_path);
        auto month_of = [&](const EventRecord& r) {
            return r.month ? *r.month : month_key(r.t, month_len);
        };
        std::map<std::string, MonthlySample> by_month;
        for (const EventRecord& r : pred_records) {
            MonthlySample& sample = by_month[month_of(r)];
            sample.month = month_of(r);
            sample.preds.events.push_back(to_aaod_event(r));
        }
        for (const EventRecord& r : gold_records) {
            MonthlySample& sample = by_month[month_of(r)];
            sample.month = month_of(r);
            sample.golds.events.push_back(to_aaod_event(r));
        }
        for (auto& [key, sample] : by_month) samples.push_back(std::move(sample));
    }

    const MonthlyReport report = monthly_report(samples, rule);
    save_monthly_report(report, out_path);
    char line[80];
    std::snprintf(line, sizeof(line), "precision %.2f recall %.2f", report.overall_precision,
                  report.overall_recall);
    std::cout << line << "\n";
    return 0;
}

int cmd_vocab_validate(const std::string& vocab_path, const std::string& events_path) {
    const Vocabulary vocab = load_vocabulary(vocab_path);
    std::size_t tokens = 0;
    for (SlotKind kind : kSlotKinds) tokens += vocab.tokens(kind).size();
    info("vocabulary ok: version=" + std::to_string(vocab.version()) +
         " tokens=" + std::to_string(tokens) + " rules=" + std::to_string(vocab.rules().size()));
    if (events_path.empty()) return 0;

    const std::vector<EventRecord> records = load_event_records(events_path);
    std::size_t invalid = 0;
    for (const EventRecord& record : records) {
        const Verdict verdict = validate_event(to_aaod_event(record), vocab);
        if (!verdict) {
            ++invalid;
            if (!g_quiet)
                std::cerr << "invalid event at t=" << record.t << ": " << verdict.reason << "\n";
        }
    }
    info("events checked=" + std::to_string(records.size()) +
         " invalid=" + std::to_string(invalid));
    return invalid == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paired numeric-series / structured-event dataset toolkit"};
    app.require_subcommand(1);
    app.add_flag("--quiet", g_quiet, "suppress informational output");
    int exit_code = 0;

    auto* extract = app.add_subcommand("extract", "run the extraction loop over a corpus");
    {
        static std::string corpus, vocab, backend = "rule", table, out = ".";
        static double threshold = 0.5;
        static int max_rounds = 5;
        extract->add_option("--corpus", corpus, "document corpus (jsonl)")->required();
        extract->add_option("--vocab", vocab, "seed vocabulary (json)")->required();
        extract->add_option("--backend", backend, "extractor backend name");
        extract->add_option("--table", table, "keyword table for the rule backend (json)");
        extract->add_option("--threshold", threshold, "suggestion acceptance threshold");
        extract->add_option("--max-rounds", max_rounds, "round budget");
        extract->add_option("--out", out, "output directory");
        extract->callback([&] {
            exit_code = cmd_extract(corpus, vocab, backend, table, threshold, max_rounds, out);
        });
    }

    auto* fit_hawkes_cmd = app.add_subcommand("fit-hawkes", "maximum-likelihood process fit");
    {
        static std::string events, init, out = "hawkes.json";
        static int num_types = 1, max_iterations = 5000;
        static double horizon = 0.0;
        fit_hawkes_cmd->add_option("--events", events, "event records (jsonl)")->required();
        fit_hawkes_cmd->add_option("--types", num_types, "number of event types K")->required();
        fit_hawkes_cmd->add_option("--horizon", horizon,
                                   "observation horizon (default: last event time)");
        fit_hawkes_cmd->add_option("--init", init, "initial parameters (json)");
        fit_hawkes_cmd->add_option("--max-iters", max_iterations, "iteration budget");
        fit_hawkes_cmd->add_option("--out", out, "output parameter file");
        fit_hawkes_cmd->callback([&] {
            exit_code = cmd_fit_hawkes(events, num_types, horizon, init, max_iterations, out);
        });
    }

    auto* estimate = app.add_subcommand("estimate-irf", "local-projection shock estimation");
    {
        static std::string series, events, out = "irf.json";
        static bool differenced = false;
        static int max_horizon = 8, num_types = 0, dy_lags = 4;
        estimate->add_option("--series", series, "series csv (time,value)")->required();
        estimate->add_option("--events", events, "event records (jsonl)")->required();
        estimate->add_flag("--differenced", differenced, "values already are first differences");
        estimate->add_option("--horizon", max_horizon, "max horizon H");
        estimate->add_option("--types", num_types, "number of event types (default: infer)");
        estimate->add_option("--lags", dy_lags, "lagged-difference controls");
        estimate->add_option("--out", out, "output kernel file");
        estimate->callback([&] {
            exit_code = cmd_estimate_irf(series, events, differenced, max_horizon, num_types,
                                         dy_lags, out);
        });
    }

    auto* fit_ar_cmd = app.add_subcommand("fit-ar", "background AR(4) fit");
    {
        static std::string series, out = "ar.json";
        static bool differenced = false;
        fit_ar_cmd->add_option("--series", series, "series csv (time,value)")->required();
        fit_ar_cmd->add_flag("--differenced", differenced,
                             "values already are first differences");
        fit_ar_cmd->add_option("--out", out, "output parameter file");
        fit_ar_cmd->callback([&] { exit_code = cmd_fit_ar(series, differenced, out); });
    }

    auto* generate_cmd = app.add_subcommand("generate", "synthesize a paired dataset");
    {
        static std::string config, out = "dataset.jsonl";
        static std::uint64_t seed = 0;
        generate_cmd->add_option("--config", config, "generator config (json)")->required();
        generate_cmd->add_option("--out", out, "output dataset file");
        auto* seed_opt = generate_cmd->add_option("--seed", seed, "override the config seed");
        generate_cmd->callback([&, seed_opt] {
            exit_code = cmd_generate(
                config, out,
                seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt);
        });
    }

    auto* evaluate = app.add_subcommand("evaluate", "monthly-averaged precision/recall");
    {
        static std::string pred, gold, out = "report.json";
        static int min_slots = 3;
        static double month_len = 30.0;
        evaluate->add_option("--pred", pred, "predicted events (jsonl)")->required();
        evaluate->add_option("--gold", gold, "gold dataset or event records (jsonl)")
            ->required();
        evaluate->add_option("--min-slots", min_slots, "slots required for a match");
        evaluate->add_option("--month-len", month_len, "time units per month bucket");
        evaluate->add_option("--out", out, "output report file");
        evaluate->callback(
            [&] { exit_code = cmd_evaluate(pred, gold, min_slots, month_len, out); });
    }

    auto* validate = app.add_subcommand("vocab-validate", "check a vocabulary file");
    {
        static std::string vocab, events;
        validate->add_option("--vocab", vocab, "vocabulary file (json)")->required();
        validate->add_option("--events", events, "optional event records to validate");
        validate->callback([&] { exit_code = cmd_vocab_validate(vocab, events); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
