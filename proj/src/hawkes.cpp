#include "evkit/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evkit {

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

void check_params(const HawkesParams& params) {
    const int k = params.num_types();
    if (k < 1) throw ValidationError("mu must have at least one type");
    if (params.alpha.rows() != k || params.alpha.cols() != k)
        throw ValidationError("alpha must be K x K with K = len(mu)");
    if ((params.mu.array() < 0).any()) throw ValidationError("mu entries must be nonnegative");
    if ((params.alpha.array() < 0).any())
        throw ValidationError("alpha entries must be nonnegative");
    if (!(params.beta > 0)) throw ValidationError("beta must be strictly positive");
    const double rho = spectral_radius(params.alpha);
    if (rho >= 1.0)
        throw ValidationError("spectral radius of alpha is " + std::to_string(rho) +
                              ", process is nonstationary");
}

void check_sequence(const EventSequence& seq, int num_types) {
    double prev = 0.0;
    for (const TimedEvent& e : seq.events) {
        if (e.time < 0.0 || e.time > seq.horizon)
            throw ValidationError("event time " + std::to_string(e.time) +
                                  " outside [0, horizon]");
        if (e.time < prev) throw ValidationError("event times must be nondecreasing");
        if (e.type < 0 || e.type >= num_types) throw TypeOutOfRange(e.type, num_types);
        prev = e.time;
    }
}

double intensity(const HawkesParams& params, const EventSequence& history, double t, int k) {
    if (k < 0 || k >= params.num_types()) throw TypeOutOfRange(k, params.num_types());
    double lam = params.mu(k);
    for (const TimedEvent& e : history.events) {
        if (e.time >= t) break;  // strictly earlier events only
        lam += params.alpha(k, e.type) * params.beta * std::exp(-params.beta * (t - e.time));
    }
    return lam;
}

namespace {

// Shared scan: per type j keep S_j = sum exp(-beta (t - t_m)) and
// U_j = sum (t - t_m) exp(-beta (t - t_m)) over strictly earlier type-j
// events. Both decay in closed form; ties are added after the whole
// group at a timestamp has been evaluated. The visitor sees (index,
// event, S, U) with the pre-jump state.
template <typename Visitor>
void scan_events(const HawkesParams& params, const EventSequence& seq, bool track_u,
                 Visitor&& visit) {
    const int k = params.num_types();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(k);
    const auto& events = seq.events;
    double prev_time = 0.0;
    std::size_t i = 0;
    while (i < events.size()) {
        const double t = events[i].time;
        const double gap = t - prev_time;
        if (gap > 0) {
            const double decay = std::exp(-params.beta * gap);
            if (track_u) u = decay * (u + gap * s);
            s *= decay;
        }
        std::size_t group_end = i;
        while (group_end < events.size() && events[group_end].time == t) ++group_end;
        for (std::size_t m = i; m < group_end; ++m) visit(m, events[m], s, u);
        for (std::size_t m = i; m < group_end; ++m) s(events[m].type) += 1.0;
        prev_time = t;
        i = group_end;
    }
}

}  // namespace

Eigen::VectorXd event_intensities(const HawkesParams& params, const EventSequence& seq) {
    check_sequence(seq, params.num_types());
    Eigen::VectorXd out(seq.events.size());
    scan_events(params, seq, /*track_u=*/false,
                [&](std::size_t i, const TimedEvent& e, const Eigen::VectorXd& s,
                    const Eigen::VectorXd&) {
                    out(static_cast<Eigen::Index>(i)) =
                        params.mu(e.type) + params.beta * params.alpha.row(e.type).dot(s);
                });
    return out;
}

double log_likelihood(const HawkesParams& params, const EventSequence& seq) {
    check_sequence(seq, params.num_types());
    const Eigen::VectorXd lambdas = event_intensities(params, seq);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas(i) > 0.0))
            throw NonFiniteLikelihood(seq.events[static_cast<std::size_t>(i)].time,
                                      seq.events[static_cast<std::size_t>(i)].type);
        ll += std::log(lambdas(i));
    }
    // Compensator: mu_k T plus alpha column sums against the integrated
    // kernel mass of each parent event.
    ll -= params.mu.sum() * seq.horizon;
    const Eigen::VectorXd col_sums = params.alpha.colwise().sum();
    for (const TimedEvent& e : seq.events)
        ll -= col_sums(e.type) * (1.0 - std::exp(-params.beta * (seq.horizon - e.time)));
    return ll;
}

EventSequence simulate(const HawkesParams& params, double horizon, std::mt19937_64& rng,
                       std::size_t max_events) {
    check_params(params);
    if (!(horizon > 0)) throw ValidationError("horizon must be positive");

    EventSequence seq;
    seq.horizon = horizon;

    const int k = params.num_types();
    const double mu_total = params.mu.sum();
    const Eigen::VectorXd col_sums = params.alpha.colwise().sum();
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::VectorXd s = Eigen::VectorXd::Zero(k);  // decayed counts per type
    double t = 0.0;
    double bound = mu_total;  // total intensity at t+, nonincreasing until the next event
    while (true) {
        if (bound <= 0.0) break;
        const double wait = -std::log1p(-unif(rng)) / bound;
        const double cand = t + wait;
        if (cand > horizon) break;
        s *= std::exp(-params.beta * (cand - t));
        const double total = mu_total + params.beta * col_sums.dot(s);
        t = cand;
        const double accept = unif(rng) * bound;
        bound = total;  // valid refresh: intensity only decays past cand
        if (accept <= total) {
            const Eigen::VectorXd lambdas = params.mu + params.beta * (params.alpha * s);
            double pick = unif(rng) * total;
            int type = k - 1;
            for (int j = 0; j < k; ++j) {
                pick -= lambdas(j);
                if (pick <= 0.0) {
                    type = j;
                    break;
                }
            }
            seq.events.push_back({t, type});
            if (seq.events.size() > max_events) throw ExplosionGuard(max_events);
            s(type) += 1.0;
            bound = total + params.beta * col_sums(type);
        }
    }
    return seq;
}

namespace {

struct Gradient {
    Eigen::VectorXd mu;
    Eigen::MatrixXd alpha;
    double log_beta = 0.0;
};

// Log-likelihood and gradient in one scan; returns -inf on zero event
// intensity so the line search backs away instead of throwing.
double ll_and_gradient(const HawkesParams& params, const EventSequence& seq, Gradient* grad) {
    const int k = params.num_types();
    const double t_end = seq.horizon;
    double ll = 0.0;
    bool finite = true;
    if (grad) {
        grad->mu = Eigen::VectorXd::Constant(k, -t_end);
        grad->alpha = Eigen::MatrixXd::Zero(k, k);
        grad->log_beta = 0.0;
    }
    double g_beta = 0.0;
    scan_events(params, seq, /*track_u=*/grad != nullptr,
                [&](std::size_t, const TimedEvent& e, const Eigen::VectorXd& s,
                    const Eigen::VectorXd& u) {
                    const double lam =
                        params.mu(e.type) + params.beta * params.alpha.row(e.type).dot(s);
                    if (!(lam > 0.0)) {
                        finite = false;
                        return;
                    }
                    ll += std::log(lam);
                    if (grad) {
                        const double inv = 1.0 / lam;
                        grad->mu(e.type) += inv;
                        grad->alpha.row(e.type) += (params.beta * inv) * s.transpose();
                        g_beta +=
                            inv * params.alpha.row(e.type).dot(s - params.beta * u);
                    }
                });
    if (!finite) return -std::numeric_limits<double>::infinity();

    ll -= params.mu.sum() * t_end;
    const Eigen::VectorXd col_sums = params.alpha.colwise().sum();
    Eigen::VectorXd integrated = Eigen::VectorXd::Zero(k);  // sum_j (1 - e^{-b(T-t)}) per type
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(k);    // sum_j (T-t) e^{-b(T-t)} per type
    for (const TimedEvent& e : seq.events) {
        const double rem = t_end - e.time;
        const double decay = std::exp(-params.beta * rem);
        integrated(e.type) += 1.0 - decay;
        weighted(e.type) += rem * decay;
    }
    ll -= col_sums.dot(integrated);
    if (grad) {
        for (int row = 0; row < k; ++row) grad->alpha.row(row) -= integrated.transpose();
        g_beta -= col_sums.dot(weighted);
        grad->log_beta = params.beta * g_beta;  // chain rule for beta = exp(theta)
    }
    return ll;
}

void project(HawkesParams& params, const HawkesFitOptions& opts) {
    params.mu = params.mu.cwiseMax(opts.floor);
    params.alpha = params.alpha.cwiseMax(opts.floor);
    const double rho = spectral_radius(params.alpha);
    if (rho >= opts.stationarity_margin) params.alpha *= opts.stationarity_margin / rho;
}

}  // namespace

HawkesFit fit_hawkes(const EventSequence& seq, int num_types, const HawkesParams* init,
                     const HawkesFitOptions& opts) {
    if (num_types < 1) throw ValidationError("num_types must be >= 1");
    if (seq.events.empty()) throw ValidationError("cannot fit an empty sequence");
    if (!(seq.horizon > 0)) throw ValidationError("sequence horizon must be positive");
    check_sequence(seq, num_types);

    HawkesParams params;
    if (init) {
        params = *init;
        check_params(params);
        if (params.num_types() != num_types)
            throw ValidationError("init dimensions do not match num_types");
    } else {
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(num_types);
        for (const TimedEvent& e : seq.events) counts(e.type) += 1.0;
        params.mu = (counts / seq.horizon).cwiseMax(opts.floor);
        params.alpha = Eigen::MatrixXd::Constant(num_types, num_types, 0.1);
        params.beta = 1.0;
    }
    project(params, opts);

    Gradient grad;
    double ll = ll_and_gradient(params, seq, &grad);
    double step = 0.01;
    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iterations; ++iter) {
        HawkesParams next;
        double next_ll = -std::numeric_limits<double>::infinity();
        bool improved = false;
        while (step > 1e-14) {
            next.mu = params.mu + step * grad.mu;
            next.alpha = params.alpha + step * grad.alpha;
            next.beta = std::exp(std::log(params.beta) + step * grad.log_beta);
            project(next, opts);
            next_ll = ll_and_gradient(next, seq, nullptr);
            if (next_ll > ll) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            converged = true;  // no ascent direction at line-search resolution
            break;
        }
        const double rel = std::abs(next_ll - ll) / std::max(1.0, std::abs(ll));
        params = next;
        ll = ll_and_gradient(params, seq, &grad);
        step *= 2.0;
        if (rel < opts.relative_tolerance) {
            converged = true;
            ++iter;
            break;
        }
    }
    HawkesFit fit;
    fit.params = params;
    fit.log_likelihood = ll;
    fit.iterations = iter;
    fit.converged = converged;
    return fit;
}

}  // namespace evkit
