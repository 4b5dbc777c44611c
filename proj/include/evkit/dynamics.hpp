#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "evkit/errors.hpp"
#include "evkit/hawkes.hpp"

namespace evkit {

/// First-difference series on an evenly spaced time grid. times(i) is
/// the timestamp of dy(i); y0, when present, is the level one step
/// before times(0).
struct DiffSeries {
    Eigen::VectorXd times;
    Eigen::VectorXd dy;
    std::optional<double> y0;
};

/// Throws ValidationError unless sizes match and the grid is strictly
/// increasing and evenly spaced.
void check_series(const DiffSeries& series);

/// Per-type horizon profile of event shocks on the differenced series:
/// beta(k, h) is the h-step-ahead impact of a type-k event.
struct IrfKernel {
    int max_horizon = 0;    // H
    Eigen::MatrixXd beta;   // K x (H+1)
    Eigen::MatrixXd se;     // matching standard errors; empty if unknown

    int num_types() const { return static_cast<int>(beta.rows()); }
    double at(int type, int h) const {
        return (h >= 0 && h <= max_horizon) ? beta(type, h) : 0.0;
    }
};

/// AR(4) background dynamics on the differenced series.
struct ArParams {
    Eigen::Vector4d phi = Eigen::Vector4d::Zero();
    double sigma = 0.0;

    /// Spectral radius of the companion matrix; < 1 means stationary.
    double companion_radius() const;
};

struct ArFit {
    ArParams params;
    bool degenerate = false;  // constant input, coefficients forced to zero
};

/// Controls entering each local projection: lagged dy terms plus
/// optional exogenous columns (rows aligned with the dy grid).
struct ControlsSpec {
    int dy_lags = 4;
    Eigen::MatrixXd exogenous;  // n x p, may be empty
};

/// Per-horizon OLS of dy(t+h) on K event-type indicators at t plus
/// controls (no intercept). Events are snapped onto the dy grid by
/// floor((time - times(0)) / step); events off the grid are ignored.
/// Same-type duplicates at one step collapse to a single indicator.
/// Standard errors are homoskedastic OLS. Throws InsufficientTreatment
/// if a type never occurs in the usable rows and RankDeficient when the
/// design loses rank (smallest singular value < 1e-10 x largest).
IrfKernel estimate_irf(const DiffSeries& series, const EventSequence& events, int num_types,
                       int max_horizon, const ControlsSpec& controls = {});

/// OLS of dy(t) on its four lags, no intercept; sigma^2 = RSS / (n - 5)
/// with n = len(dy). Constant input yields the degenerate fit (phi = 0,
/// sigma = 0) instead of an error.
ArFit fit_ar(const DiffSeries& series);

/// One step of the generative recursion:
/// phi . last4 (most recent first) + shock + innovation.
double ar_step(const ArParams& params, const Eigen::Vector4d& last4, double shock,
               double innovation);

/// Levels y_t = y0 + cumulative sum of dy. Requires y0.
Eigen::VectorXd to_levels(const DiffSeries& series);

}  // namespace evkit
