#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evkit/age.hpp"
#include "evkit/dynamics.hpp"
#include "evkit/evaluator.hpp"
#include "evkit/generator.hpp"
#include "evkit/hawkes.hpp"
#include "evkit/vocab.hpp"

namespace evkit {

/// One line of the event-record format: t, type, the four AAOD slots
/// (optional below the vocab layer), plus optional joining fields.
struct EventRecord {
    double t = 0.0;
    int type = 0;
    std::string actor, action, object, direction;
    std::optional<std::string> sample_id;
    std::optional<std::string> month;
};

bool has_slots(const EventRecord& record);
AaodEvent to_aaod_event(const EventRecord& record);
EventRecord to_event_record(const AaodEvent& event);

/// Builds a sorted sequence; horizon <= 0 means "largest event time".
EventSequence to_event_sequence(const std::vector<EventRecord>& records, double horizon = 0.0);

/// All writers go through this: write to a temp file in the same
/// directory, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

Vocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);

std::vector<EventRecord> load_event_records(const std::filesystem::path& path);
void save_event_records(const std::vector<EventRecord>& records,
                        const std::filesystem::path& path);

std::vector<Document> load_documents(const std::filesystem::path& path);

/// Two-column CSV (timestamp, value) with a header row. Levels by
/// default: dy(i) = v(i+1) - v(i), timestamps shift accordingly and y0
/// is the first level. Pass differenced = true when values already are
/// first differences.
DiffSeries load_series_csv(const std::filesystem::path& path, bool differenced = false);

HawkesParams load_hawkes_params(const std::filesystem::path& path);
void save_hawkes_params(const HawkesParams& params, const std::filesystem::path& path);

IrfKernel load_irf_kernel(const std::filesystem::path& path);
void save_irf_kernel(const IrfKernel& kernel, const std::filesystem::path& path);

ArParams load_ar_params(const std::filesystem::path& path);
void save_ar_params(const ArParams& params, const std::filesystem::path& path);

std::vector<RuleBackend::Keyword> load_keyword_table(const std::filesystem::path& path);

/// Component blocks ("hawkes", "irf", "ar") may be inline objects or
/// path strings; "vocabulary" is always a path. Relative paths resolve
/// against the config file's directory.
GeneratorConfig load_generator_config(const std::filesystem::path& path);

/// One JSON line per sample plus a "<path>.provenance.json" sidecar
/// carrying the config hash and seed.
void save_dataset(const SyntheticDataset& dataset, const std::filesystem::path& path);
SyntheticDataset load_dataset(const std::filesystem::path& path);

void save_extraction_report(const std::vector<ExtractionRound>& rounds, const Vocabulary& v0,
                            const std::filesystem::path& path);

void save_monthly_report(const MonthlyReport& report, const std::filesystem::path& path);

}  // namespace evkit
