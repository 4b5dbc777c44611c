#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evkit/dynamics.hpp"
#include "evkit/hawkes.hpp"
#include "evkit/vocab.hpp"

namespace evkit {

/// Per-type categorical distributions over vocabulary tokens, one per
/// slot, indexed in AAOD order.
struct MarkTable {
    std::array<std::vector<std::pair<std::string, double>>, 4> slots;
};

/// Full generative tuple: arrivals (Hawkes), shock profile (IRF kernel),
/// background (AR), marks, and the emission layout.
struct GeneratorConfig {
    HawkesParams hawkes;
    IrfKernel irf;
    ArParams ar;
    Vocabulary vocab;
    std::vector<MarkTable> mark_tables;  // indexed by event type
    long long horizon_steps = 0;         // T, in grid steps
    double y0 = 0.0;
    int window = 1;                      // m, window length in steps
    int stride = 0;                      // 0 means non-overlapping (= window)
    std::uint64_t seed = 0;
};

/// Validates component invariants; mark-table tokens must already be in
/// the vocabulary. A nonstationary AR background is allowed (warning at
/// the CLI layer, not an error here).
void check_config(const GeneratorConfig& config);

/// Stable fingerprint of every config field, for provenance records.
std::string config_fingerprint(const GeneratorConfig& config);

/// A numeric window paired with its gold event set. window(i) are m
/// consecutive level values; window_end is the timestamp (step index)
/// of the last one.
struct PairedSample {
    Eigen::VectorXd window;
    double window_end = 0.0;
    EventSet gold;
};

struct SyntheticDataset {
    std::vector<PairedSample> samples;
    std::string config_hash;
    std::uint64_t seed = 0;
};

/// Simulates Hawkes arrivals on [0, T], snaps them to steps by floor,
/// draws AAOD marks, superimposes IRF shocks on the AR(4) recursion,
/// recovers levels from y0, and emits windows after a warm-up of
/// max(4, H) steps.
SyntheticDataset generate(const GeneratorConfig& config);

/// Same pipeline with an explicit arrival list (step, type) instead of
/// Hawkes simulation; the deterministic path for tests and audits.
SyntheticDataset force_events(const GeneratorConfig& config,
                              const std::vector<std::pair<long long, int>>& arrivals);

}  // namespace evkit
