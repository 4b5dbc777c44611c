#include "evkit/dynamics.hpp"

#include <cmath>
#include <vector>

namespace evkit {

void check_series(const DiffSeries& series) {
    if (series.times.size() != series.dy.size())
        throw ValidationError("times and dy must have equal length");
    if (series.times.size() == 0) throw EmptySeries();
    if (series.times.size() < 2) return;
    const double step = series.times(1) - series.times(0);
    if (!(step > 0)) throw ValidationError("timestamps must be strictly increasing");
    for (Eigen::Index i = 1; i < series.times.size(); ++i) {
        const double gap = series.times(i) - series.times(i - 1);
        if (std::abs(gap - step) > 1e-6 * std::max(1.0, std::abs(step)))
            throw ValidationError("timestamps must be evenly spaced");
    }
}

double ArParams::companion_radius() const {
    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    companion.row(0) = phi.transpose();
    companion(1, 0) = companion(2, 1) = companion(3, 2) = 1.0;
    return spectral_radius(companion);
}

namespace {

// Snap event times onto the dy grid; duplicate (step, type) pairs
// collapse to one indicator, simultaneous distinct types stay separate.
std::vector<std::vector<char>> event_indicators(const DiffSeries& series,
                                                const EventSequence& events, int num_types) {
    const Eigen::Index n = series.dy.size();
    const double t0 = series.times(0);
    const double step = n > 1 ? series.times(1) - series.times(0) : 1.0;
    std::vector<std::vector<char>> dummies(static_cast<std::size_t>(num_types),
                                           std::vector<char>(static_cast<std::size_t>(n), 0));
    for (const TimedEvent& e : events.events) {
        if (e.type < 0 || e.type >= num_types) throw TypeOutOfRange(e.type, num_types);
        const auto idx = static_cast<long long>(std::floor((e.time - t0) / step + 1e-9));
        if (idx < 0 || idx >= n) continue;
        dummies[static_cast<std::size_t>(e.type)][static_cast<std::size_t>(idx)] = 1;
    }
    return dummies;
}

}  // namespace

IrfKernel estimate_irf(const DiffSeries& series, const EventSequence& events, int num_types,
                       int max_horizon, const ControlsSpec& controls) {
    check_series(series);
    if (num_types < 1) throw ValidationError("num_types must be >= 1");
    if (max_horizon < 0) throw ValidationError("max_horizon must be >= 0");
    if (controls.dy_lags < 0) throw ValidationError("dy_lags must be >= 0");
    const Eigen::Index n = series.dy.size();
    const Eigen::Index n_exog = controls.exogenous.size() > 0 ? controls.exogenous.cols() : 0;
    if (n_exog > 0 && controls.exogenous.rows() != n)
        throw ValidationError("exogenous controls must have one row per dy entry");

    const auto dummies = event_indicators(series, events, num_types);
    const Eigen::Index n_cols = num_types + controls.dy_lags + n_exog;

    IrfKernel kernel;
    kernel.max_horizon = max_horizon;
    kernel.beta = Eigen::MatrixXd::Zero(num_types, max_horizon + 1);
    kernel.se = Eigen::MatrixXd::Zero(num_types, max_horizon + 1);

    for (int h = 0; h <= max_horizon; ++h) {
        const Eigen::Index first = controls.dy_lags;
        const Eigen::Index last = n - 1 - h;  // inclusive
        const Eigen::Index rows = last - first + 1;
        if (rows < (max_horizon + 1) + n_cols)
            throw ValidationError("not enough usable rows at horizon " + std::to_string(h));

        for (int k = 0; k < num_types; ++k) {
            bool seen = false;
            for (Eigen::Index t = first; t <= last && !seen; ++t)
                seen = dummies[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] != 0;
            if (!seen) throw InsufficientTreatment(k);
        }

        Eigen::MatrixXd design(rows, n_cols);
        Eigen::VectorXd response(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::Index t = first + r;
            for (int k = 0; k < num_types; ++k)
                design(r, k) = dummies[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
            for (int lag = 1; lag <= controls.dy_lags; ++lag)
                design(r, num_types + lag - 1) = series.dy(t - lag);
            for (Eigen::Index c = 0; c < n_exog; ++c)
                design(r, num_types + controls.dy_lags + c) = controls.exogenous(t, c);
            response(r) = series.dy(t + h);
        }

        Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();
        if (sv(sv.size() - 1) < 1e-10 * sv(0)) throw RankDeficient(h);
        const Eigen::VectorXd coef = svd.solve(response);

        const double rss = (response - design * coef).squaredNorm();
        const double dof = static_cast<double>(rows - n_cols);
        const double sigma2 = dof > 0 ? rss / dof : 0.0;
        // diag of (X'X)^{-1} = V diag(1/sv^2) V'
        const Eigen::MatrixXd& v = svd.matrixV();
        for (int k = 0; k < num_types; ++k) {
            kernel.beta(k, h) = coef(k);
            double xtx_inv_kk = 0.0;
            for (Eigen::Index l = 0; l < sv.size(); ++l)
                xtx_inv_kk += v(k, l) * v(k, l) / (sv(l) * sv(l));
            kernel.se(k, h) = std::sqrt(sigma2 * xtx_inv_kk);
        }
    }
    return kernel;
}

ArFit fit_ar(const DiffSeries& series) {
    check_series(series);
    const Eigen::Index n = series.dy.size();
    if (n < 20) throw ValidationError("fit_ar needs at least 20 difference observations");

    ArFit fit;
    if ((series.dy.array() == series.dy(0)).all()) {
        fit.degenerate = true;  // constant input: no identifiable dynamics
        return fit;
    }

    const Eigen::Index rows = n - 4;
    Eigen::MatrixXd design(rows, 4);
    Eigen::VectorXd response(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = r + 4;
        for (int lag = 1; lag <= 4; ++lag) design(r, lag - 1) = series.dy(t - lag);
        response(r) = series.dy(t);
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd coef = svd.solve(response);
    const double rss = (response - design * coef).squaredNorm();

    fit.params.phi = coef;
    fit.params.sigma = std::sqrt(std::max(0.0, rss / static_cast<double>(n - 5)));
    return fit;
}

double ar_step(const ArParams& params, const Eigen::Vector4d& last4, double shock,
               double innovation) {
    return params.phi.dot(last4) + shock + innovation;
}

Eigen::VectorXd to_levels(const DiffSeries& series) {
    if (!series.y0.has_value()) throw MissingInitialLevel();
    Eigen::VectorXd levels(series.dy.size());
    double level = *series.y0;
    for (Eigen::Index i = 0; i < series.dy.size(); ++i) {
        level += series.dy(i);
        levels(i) = level;
    }
    return levels;
}

}  // namespace evkit
