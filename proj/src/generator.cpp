#include "evkit/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>

namespace evkit {

namespace {

constexpr int kMarkResampleCap = 100;

uint64_t fnv1a(uint64_t hash, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ull;
    }
    return hash;
}

uint64_t hash_double(uint64_t hash, double value) {
    uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    return fnv1a(hash, &bits, sizeof(bits));
}

uint64_t hash_string(uint64_t hash, const std::string& s) {
    hash = fnv1a(hash, s.data(), s.size());
    return fnv1a(hash, "\0", 1);
}

}  // namespace

void check_config(const GeneratorConfig& config) {
    check_params(config.hawkes);
    const int k = config.hawkes.num_types();
    if (config.irf.num_types() != k)
        throw ValidationError("irf kernel row count must equal the Hawkes type count");
    if (config.irf.beta.cols() != config.irf.max_horizon + 1)
        throw ValidationError("irf kernel must have H+1 columns");
    if (!config.irf.beta.allFinite()) throw ValidationError("irf kernel entries must be finite");
    if (config.ar.sigma < 0) throw ValidationError("ar sigma must be nonnegative");
    if (config.horizon_steps < 1) throw ValidationError("horizon_steps must be >= 1");
    if (config.window < 1) throw ValidationError("window must be >= 1");
    if (config.stride < 0) throw ValidationError("stride must be >= 0");
    for (std::size_t type = 0; type < config.mark_tables.size(); ++type) {
        const MarkTable& table = config.mark_tables[type];
        for (std::size_t s = 0; s < 4; ++s) {
            for (const auto& [token, weight] : table.slots[s]) {
                if (!(weight > 0))
                    throw ValidationError("mark table weights must be positive");
                if (!config.vocab.contains(kSlotKinds[s], normalize_token(token)))
                    throw ValidationError("mark table token '" + token + "' not in " +
                                          slot_name(kSlotKinds[s]) + " allow-list");
            }
        }
    }
}

std::string config_fingerprint(const GeneratorConfig& config) {
    uint64_t h = 14695981039346656037ull;
    for (Eigen::Index i = 0; i < config.hawkes.mu.size(); ++i)
        h = hash_double(h, config.hawkes.mu(i));
    for (Eigen::Index i = 0; i < config.hawkes.alpha.size(); ++i)
        h = hash_double(h, *(config.hawkes.alpha.data() + i));
    h = hash_double(h, config.hawkes.beta);
    h = hash_double(h, config.irf.max_horizon);
    for (Eigen::Index i = 0; i < config.irf.beta.size(); ++i)
        h = hash_double(h, *(config.irf.beta.data() + i));
    for (int i = 0; i < 4; ++i) h = hash_double(h, config.ar.phi(i));
    h = hash_double(h, config.ar.sigma);
    for (SlotKind kind : kSlotKinds)
        for (const std::string& tok : config.vocab.tokens(kind)) h = hash_string(h, tok);
    for (const CompositionRule& rule : config.vocab.rules()) {
        h = hash_double(h, static_cast<double>(rule.kind));
        for (const SlotToken& op : rule.operands) {
            h = hash_double(h, static_cast<double>(op.slot));
            h = hash_string(h, op.token);
        }
    }
    for (const MarkTable& table : config.mark_tables)
        for (const auto& dist : table.slots)
            for (const auto& [token, weight] : dist) {
                h = hash_string(h, token);
                h = hash_double(h, weight);
            }
    h = hash_double(h, static_cast<double>(config.horizon_steps));
    h = hash_double(h, config.y0);
    h = hash_double(h, config.window);
    h = hash_double(h, config.stride);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string draw_slot_token(const std::vector<std::pair<std::string, double>>& dist,
                            std::mt19937_64& rng) {
    double total = 0.0;
    for (const auto& [token, weight] : dist) total += weight;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double pick = unif(rng) * total;
    for (const auto& [token, weight] : dist) {
        pick -= weight;
        if (pick <= 0.0) return token;
    }
    return dist.back().first;
}

AaodEvent draw_marks(const GeneratorConfig& config, long long step, int type,
                     std::mt19937_64& rng) {
    if (static_cast<std::size_t>(type) >= config.mark_tables.size()) throw MarkTableGap(type);
    const MarkTable& table = config.mark_tables[static_cast<std::size_t>(type)];
    for (const auto& dist : table.slots)
        if (dist.empty()) throw MarkTableGap(type);
    for (int attempt = 0; attempt < kMarkResampleCap; ++attempt) {
        AaodEvent event;
        event.time = static_cast<double>(step);
        event.type_index = type;
        for (std::size_t s = 0; s < 4; ++s)
            event.slot(kSlotKinds[s]) = normalize_token(draw_slot_token(table.slots[s], rng));
        if (validate_event(event, config.vocab)) return event;
    }
    throw ValidationError("mark table for type " + std::to_string(type) +
                          " cannot satisfy the composition rules after " +
                          std::to_string(kMarkResampleCap) + " draws");
}

SyntheticDataset run_pipeline(const GeneratorConfig& config,
                              std::vector<std::pair<long long, int>> arrivals,
                              std::mt19937_64& rng) {
    const long long t_end = config.horizon_steps;
    const int h_max = config.irf.max_horizon;

    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<AaodEvent> marked;
    marked.reserve(arrivals.size());
    for (const auto& [step, type] : arrivals)
        marked.push_back(draw_marks(config, step, type, rng));

    // Superimpose truncated kernel responses, then run the AR recursion
    // over the combined shock + innovation stream.
    Eigen::VectorXd shocks = Eigen::VectorXd::Zero(t_end);
    for (const auto& [step, type] : arrivals) {
        const long long tail = std::min<long long>(t_end - 1, step + h_max);
        for (long long t = step; t <= tail; ++t)
            shocks(t) += config.irf.beta(type, static_cast<int>(t - step));
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    DiffSeries series;
    series.times = Eigen::VectorXd::LinSpaced(t_end, 0.0, static_cast<double>(t_end - 1));
    series.dy = Eigen::VectorXd::Zero(t_end);
    series.y0 = config.y0;
    Eigen::Vector4d last4 = Eigen::Vector4d::Zero();
    for (long long t = 0; t < t_end; ++t) {
        const double innovation = config.ar.sigma > 0 ? config.ar.sigma * gauss(rng) : 0.0;
        const double dy = ar_step(config.ar, last4, shocks(t), innovation);
        series.dy(t) = dy;
        last4(3) = last4(2);
        last4(2) = last4(1);
        last4(1) = last4(0);
        last4(0) = dy;
    }
    const Eigen::VectorXd levels = to_levels(series);

    SyntheticDataset dataset;
    dataset.config_hash = config_fingerprint(config);
    dataset.seed = config.seed;
    const long long warm = std::max<long long>(4, h_max);
    const long long stride = config.stride > 0 ? config.stride : config.window;
    for (long long a = warm; a + config.window <= t_end; a += stride) {
        PairedSample sample;
        sample.window = levels.segment(a, config.window);
        sample.window_end = static_cast<double>(a + config.window - 1);
        EventSet gold;
        gold.bucket = "win-" + std::to_string(dataset.samples.size());
        for (std::size_t i = 0; i < marked.size(); ++i) {
            const long long step = arrivals[i].first;
            if (step >= a && step < a + config.window) gold.events.push_back(marked[i]);
        }
        sample.gold = dedup_event_set(gold);
        dataset.samples.push_back(std::move(sample));
    }
    return dataset;
}

}  // namespace

SyntheticDataset generate(const GeneratorConfig& config) {
    check_config(config);
    std::mt19937_64 rng(config.seed);
    const EventSequence seq =
        simulate(config.hawkes, static_cast<double>(config.horizon_steps), rng);
    std::vector<std::pair<long long, int>> arrivals;
    arrivals.reserve(seq.events.size());
    for (const TimedEvent& e : seq.events) {
        const auto step = static_cast<long long>(std::floor(e.time));
        if (step >= config.horizon_steps) continue;  // boundary arrival at t = T
        arrivals.push_back({step, e.type});
    }
    return run_pipeline(config, std::move(arrivals), rng);
}

SyntheticDataset force_events(const GeneratorConfig& config,
                              const std::vector<std::pair<long long, int>>& arrivals) {
    check_config(config);
    for (const auto& [step, type] : arrivals) {
        if (step < 0 || step >= config.horizon_steps)
            throw StepOutOfRange(step, config.horizon_steps);
        if (type < 0 || type >= config.hawkes.num_types())
            throw TypeOutOfRange(type, config.hawkes.num_types());
    }
    std::mt19937_64 rng(config.seed);
    return run_pipeline(config, arrivals, rng);
}

}  // namespace evkit
