#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <random>
#include <vector>

#include "evkit/errors.hpp"

namespace evkit {

/// Parameters of a K-type mutually exciting process with a shared
/// exponential kernel g(u) = beta * exp(-beta u). The kernel integrates
/// to one, so alpha(k, j) is directly the expected number of type-k
/// children per type-j parent and spectral_radius(alpha) < 1 is the
/// stationarity condition.
struct HawkesParams {
    Eigen::VectorXd mu;     // baseline intensities, >= 0, length K
    Eigen::MatrixXd alpha;  // excitation weights, >= 0, K x K
    double beta = 1.0;      // decay rate, > 0

    int num_types() const { return static_cast<int>(mu.size()); }
};

/// Throws ValidationError unless mu, alpha are nonnegative, beta > 0,
/// dimensions agree, and spectral_radius(alpha) < 1.
void check_params(const HawkesParams& params);

double spectral_radius(const Eigen::MatrixXd& m);

struct TimedEvent {
    double time = 0.0;
    int type = 0;
};

/// Time-sorted event stream observed on [0, horizon].
struct EventSequence {
    std::vector<TimedEvent> events;
    double horizon = 0.0;
};

/// Validates ordering, range, and type indices against num_types.
void check_sequence(const EventSequence& seq, int num_types);

/// Conditional intensity of type-k events at time t given the strictly
/// earlier events in history:
///   lambda_k(t) = mu_k + sum_j sum_{t_i^j < t} alpha(k,j) beta exp(-beta (t - t_i^j))
/// Direct summation over the history.
double intensity(const HawkesParams& params, const EventSequence& history, double t, int k);

/// lambda_{k_i}(t_i) for every event, via the O(N K) exponential-kernel
/// recursion. Events sharing a timestamp see the same pre-jump state.
Eigen::VectorXd event_intensities(const HawkesParams& params, const EventSequence& seq);

/// Exact log-likelihood with the closed-form compensator:
///   sum_i log lambda_{k_i}(t_i) - sum_k mu_k T
///   - sum_k sum_j alpha(k,j) sum_{t_i^j <= T} (1 - exp(-beta (T - t_i^j)))
/// Throws NonFiniteLikelihood if any event sits at zero intensity.
double log_likelihood(const HawkesParams& params, const EventSequence& seq);

/// Ogata thinning with the piecewise-constant bound
/// Lambda_bar = sum_k lambda_k(t+), refreshed at every candidate; exact
/// for the exponential kernel since total intensity decays between
/// events. Throws ExplosionGuard past max_events.
EventSequence simulate(const HawkesParams& params, double horizon, std::mt19937_64& rng,
                       std::size_t max_events = 10'000'000);

struct HawkesFit {
    HawkesParams params;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct HawkesFitOptions {
    int max_iterations = 5000;
    double relative_tolerance = 1e-8;
    double stationarity_margin = 0.999;  // alpha rescaled onto this radius
    double floor = 1e-10;                // lower clip for mu and alpha
};

/// Maximum likelihood via projected gradient ascent on (mu, alpha) with
/// log-parameterized beta. Backtracking line search only accepts
/// improving steps, so the result never scores below the start point.
/// Default start: mu_k = N_k / T, alpha = 0.1, beta = 1.
HawkesFit fit_hawkes(const EventSequence& seq, int num_types,
                     const HawkesParams* init = nullptr, const HawkesFitOptions& opts = {});

}  // namespace evkit
