#pragma once

#include <stdexcept>
#include <string>

namespace evkit {

// Error tiers map 1:1 onto CLI exit codes: ValidationError -> 1,
// IoError -> 2, NumericalError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct EmptyToken : ValidationError {
    EmptyToken() : ValidationError("token is empty after normalization") {}
};

struct TypeOutOfRange : ValidationError {
    explicit TypeOutOfRange(int type, int num_types)
        : ValidationError("event type " + std::to_string(type) + " outside [0, " +
                          std::to_string(num_types) + ")") {}
};

struct EmptySeries : ValidationError {
    EmptySeries() : ValidationError("series has no timestamps") {}
};

struct MissingInitialLevel : ValidationError {
    MissingInitialLevel() : ValidationError("difference series carries no initial level y0") {}
};

struct BackendFailure : Error {
    explicit BackendFailure(const std::string& doc_id, const std::string& what)
        : Error("extractor backend failed on document '" + doc_id + "': " + what),
          document_id(doc_id) {}
    std::string document_id;
};

struct ExplosionGuard : NumericalError {
    explicit ExplosionGuard(std::size_t cap)
        : NumericalError("simulated event count exceeded cap of " + std::to_string(cap)) {}
};

struct NonFiniteLikelihood : NumericalError {
    explicit NonFiniteLikelihood(double t, int type)
        : NumericalError("zero intensity at an observed event (t=" + std::to_string(t) +
                         ", type=" + std::to_string(type) + ")") {}
};

struct InsufficientTreatment : ValidationError {
    explicit InsufficientTreatment(int type)
        : ValidationError("event type " + std::to_string(type) +
                          " never occurs in the usable sample"),
          type(type) {}
    int type;
};

struct RankDeficient : NumericalError {
    explicit RankDeficient(int horizon)
        : NumericalError("design matrix is rank deficient at horizon " +
                         std::to_string(horizon)) {}
};

struct MarkTableGap : ValidationError {
    explicit MarkTableGap(int type)
        : ValidationError("no mark table configured for event type " + std::to_string(type)) {}
};

struct StepOutOfRange : ValidationError {
    explicit StepOutOfRange(long long step, long long horizon)
        : ValidationError("forced event step " + std::to_string(step) + " outside [0, " +
                          std::to_string(horizon) + ")") {}
};

}  // namespace evkit
