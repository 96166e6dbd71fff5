#include "trfc/estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace trfc {

namespace {

constexpr double kBinLow = 0.01;
constexpr double kBinHigh = 0.30;
constexpr double kBinWidth = 0.01;
constexpr int kBinCount = 29;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Shared scaffolding for damped least squares: residual callback fills r (and
// optionally the analytic Jacobian), parameters live in a box. The numeric
// Jacobian path perturbs one parameter at a time with central differences.
template <int N>
struct Box {
    std::array<double, N> lo{};
    std::array<double, N> hi{};
    std::array<double, N> project(std::array<double, N> p) const {
        for (int i = 0; i < N; ++i) p[i] = clamp(p[i], lo[i], hi[i]);
        return p;
    }
};

// Solves (A + mu * diag(A)) x = -g for small fixed N via Gaussian elimination
// with partial pivoting. Returns false on a numerically singular system.
template <int N>
bool solve_damped(std::array<std::array<double, N>, N> a, std::array<double, N> g,
                  double mu, std::array<double, N>& step) {
    for (int i = 0; i < N; ++i) {
        a[i][i] += mu * std::max(a[i][i], 1e-12);
        g[i] = -g[i];
    }
    for (int col = 0; col < N; ++col) {
        int pivot = col;
        for (int row = col + 1; row < N; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[col], a[pivot]);
        std::swap(g[col], g[pivot]);
        for (int row = col + 1; row < N; ++row) {
            const double factor = a[row][col] / a[col][col];
            for (int k = col; k < N; ++k) a[row][k] -= factor * a[col][k];
            g[row] -= factor * g[col];
        }
    }
    for (int row = N - 1; row >= 0; --row) {
        double acc = g[row];
        for (int k = row + 1; k < N; ++k) acc -= a[row][k] * step[k];
        step[row] = acc / a[row][row];
    }
    return true;
}

// Damped descent with box projection. Residuals come from `residual(p, r)`;
// the Jacobian is formed by central differences so the same machinery serves
// any model shape. Returns the final objective.
template <int N, typename ResidualFn>
double descend(std::array<double, N>& params, const Box<N>& box, std::size_t n_res,
               ResidualFn&& residual, double objective_tol, int max_iter) {
    std::vector<double> r(n_res), r_plus(n_res), r_minus(n_res);
    auto rss = [&](const std::array<double, N>& p, std::vector<double>& buf) {
        residual(p, buf);
        double s = 0.0;
        for (double v : buf) s += v * v;
        return s;
    };

    params = box.project(params);
    double obj = rss(params, r);
    double mu = 1e-3;

    for (int iter = 0; iter < max_iter; ++iter) {
        // Numerically evaluated Jacobian, one column per parameter.
        std::array<std::array<double, N>, N> jtj{};
        std::array<double, N> jtr{};
        std::vector<std::array<double, N>> jac(n_res);
        for (int p = 0; p < N; ++p) {
            const double h = 1e-7 * std::max(1.0, std::abs(params[p]));
            auto plus = params, minus = params;
            plus[p] += h;
            minus[p] -= h;
            residual(plus, r_plus);
            residual(minus, r_minus);
            for (std::size_t i = 0; i < n_res; ++i)
                jac[i][p] = (r_plus[i] - r_minus[i]) / (2.0 * h);
        }
        for (std::size_t i = 0; i < n_res; ++i)
            for (int p = 0; p < N; ++p) {
                jtr[p] += jac[i][p] * r[i];
                for (int q = 0; q < N; ++q) jtj[p][q] += jac[i][p] * jac[i][q];
            }

        bool accepted = false;
        while (mu < 1e14) {
            std::array<double, N> step{};
            if (solve_damped<N>(jtj, jtr, mu, step)) {
                auto candidate = params;
                for (int p = 0; p < N; ++p) candidate[p] += step[p];
                candidate = box.project(candidate);
                const double candidate_obj = rss(candidate, r_plus);
                if (candidate_obj < obj) {
                    const double gain = obj - candidate_obj;
                    params = candidate;
                    obj = candidate_obj;
                    residual(params, r);
                    mu = std::max(mu / 3.0, 1e-12);
                    accepted = true;
                    if (gain < objective_tol) return obj;
                    break;
                }
            }
            mu *= 10.0;
        }
        if (!accepted) return obj;  // stalled against the damping cap
    }
    return obj;
}

}  // namespace

void validate(const ErrorModel& model) {
    if (!(std::isfinite(model.amplitude) && model.amplitude >= 0.0))
        throw std::invalid_argument("ErrorModel: amplitude must be finite and >= 0");
    if (!(std::isfinite(model.width) && model.width > 0.0))
        throw std::invalid_argument("ErrorModel: width must be finite and > 0");
    if (!(std::isfinite(model.floor) && model.floor >= 0.0))
        throw std::invalid_argument("ErrorModel: floor must be finite and >= 0");
}

FitResult fit_point(std::span<const SlipForceSample> window, double fixed_b,
                    Interval c_bounds, Interval d_bounds) {
    if (window.empty()) throw std::invalid_argument("fit_point: empty sample window");
    if (!(fixed_b > 0.0)) throw std::invalid_argument("fit_point: fixed_b must be > 0");
    if (!(c_bounds.lower <= c_bounds.upper) || !(d_bounds.lower <= d_bounds.upper))
        throw std::invalid_argument("fit_point: bounds must satisfy lower <= upper");
    if (!(c_bounds.lower >= 1.5 && c_bounds.upper <= 3.0))
        throw std::invalid_argument("fit_point: C bounds must lie within [1.5, 3.0]");
    if (!(d_bounds.lower > 0.0 && d_bounds.upper <= 1.5))
        throw std::invalid_argument("fit_point: D bounds must lie within (0, 1.5]");

    const std::size_t n = window.size();
    std::vector<double> shape_arg(n), force(n);
    for (std::size_t i = 0; i < n; ++i) {
        shape_arg[i] = std::atan(std::atan(fixed_b * window[i].slip_ratio));
        force[i] = window[i].normalized_force;
    }
    auto residual = [&](const std::array<double, 2>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < n; ++i)
            r[i] = force[i] - p[1] * std::sin(p[0] * shape_arg[i]);
    };

    const Box<2> box{{c_bounds.lower, d_bounds.lower}, {c_bounds.upper, d_bounds.upper}};

    // Deterministic Latin-hypercube start grid: stratum midpoints in C paired
    // with a fixed shuffle of the D strata.
    constexpr int kStarts = 8;
    constexpr std::array<int, kStarts> kDPermutation{0, 5, 2, 7, 4, 1, 6, 3};
    const double c_span = c_bounds.upper - c_bounds.lower;
    const double d_span = d_bounds.upper - d_bounds.lower;

    bool have_best = false;
    std::array<double, 2> best{};
    double best_obj = std::numeric_limits<double>::infinity();
    for (int s = 0; s < kStarts; ++s) {
        std::array<double, 2> p{
            c_bounds.lower + (s + 0.5) / kStarts * c_span,
            d_bounds.lower + (kDPermutation[s] + 0.5) / kStarts * d_span,
        };
        const double obj = descend<2>(p, box, n, residual, 1e-10, 200);
        if (std::isfinite(obj) && obj < best_obj) {
            best = p;
            best_obj = obj;
            have_best = true;
        }
    }
    if (!have_best) throw std::runtime_error("fit_point: no start converged to a finite objective");

    const PeakResult peak = peak_trfc(TireParams{fixed_b, best[0], best[1], 1.0});
    return FitResult{best[0], best[1], peak.value, best_obj};
}

std::optional<int> assign_bin(double kappa) {
    const double mag = std::abs(kappa);
    if (!(mag >= kBinLow) || !(mag < kBinHigh)) return std::nullopt;
    const int idx = static_cast<int>(std::floor((mag - kBinLow) / kBinWidth));
    return std::min(idx, kBinCount - 1);
}

std::vector<BinStats> bin_statistics(std::span<const TrfcEstimate> estimates,
                                     double reference_peak) {
    std::map<int, std::vector<double>> groups;
    for (const auto& est : estimates)
        if (est.slip_bin) groups[*est.slip_bin].push_back(est.peak_trfc);

    std::vector<BinStats> out;
    out.reserve(groups.size());
    for (const auto& [index, values] : groups) {
        BinStats stats;
        stats.bin_index = index;
        stats.count = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        stats.mean = sum / static_cast<double>(values.size());
        double sq = 0.0;
        for (double v : values) sq += (v - stats.mean) * (v - stats.mean);
        const double variance = sq / static_cast<double>(values.size());
        if (values.size() >= 2) stats.std_dev = std::sqrt(variance);
        const double bias = stats.mean - reference_peak;
        stats.mse_vs_reference = variance + bias * bias;
        out.push_back(std::move(stats));
    }
    return out;
}

ErrorModel fit_error_model(std::span<const ErrorObservation> data) {
    std::set<double> magnitudes;
    double min_err = std::numeric_limits<double>::infinity();
    double max_err = -std::numeric_limits<double>::infinity();
    double max_mag = 0.0;
    for (const auto& obs : data) {
        if (!std::isfinite(obs.accel_magnitude) || !std::isfinite(obs.observed_error))
            throw std::invalid_argument("fit_error_model: non-finite observation");
        magnitudes.insert(std::abs(obs.accel_magnitude));
        min_err = std::min(min_err, obs.observed_error);
        max_err = std::max(max_err, obs.observed_error);
        max_mag = std::max(max_mag, std::abs(obs.accel_magnitude));
    }
    if (magnitudes.size() < 3)
        throw std::invalid_argument(
            "fit_error_model: need at least three distinct acceleration magnitudes");

    if (max_err - min_err <= 1e-12 * std::max(1.0, std::abs(max_err))) {
        ErrorModel flat;
        flat.amplitude = 0.0;
        flat.width = 1.0;
        flat.floor = std::max(min_err, 0.0);
        flat.degenerate = true;
        return flat;
    }

    const std::size_t n = data.size();
    auto residual = [&](const std::array<double, 3>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < n; ++i) {
            const double a = data[i].accel_magnitude;
            r[i] = data[i].observed_error -
                   (p[2] + p[0] * std::exp(-a * a / (2.0 * p[1] * p[1])));
        }
    };

    const Box<3> box{{0.0, 1e-6, 0.0},
                     {std::numeric_limits<double>::max(), 1e6,
                      std::numeric_limits<double>::max()}};
    const double scale = std::max(max_mag, 1e-3);
    const std::array<double, 5> width_scales{0.25, 0.5, 1.0, 2.0, 4.0};

    std::array<double, 3> best{};
    double best_obj = std::numeric_limits<double>::infinity();
    for (double ws : width_scales) {
        const std::array<std::array<double, 3>, 2> starts{{
            {max_err - min_err, ws * scale, std::max(min_err, 0.0)},
            {std::max(max_err, 1e-3), ws * scale, 0.0},
        }};
        for (auto p : starts) {
            const double obj = descend<3>(p, box, n, residual, 1e-12, 300);
            if (std::isfinite(obj) && obj < best_obj) {
                best = p;
                best_obj = obj;
            }
        }
    }

    ErrorModel model;
    model.amplitude = best[0];
    model.width = best[1];
    model.floor = best[2];
    model.degenerate = false;
    validate(model);
    return model;
}

double evaluate_error(const ErrorModel& model, double accel) {
    return model.floor +
           model.amplitude * std::exp(-accel * accel / (2.0 * model.width * model.width));
}

LocationEstimate aggregate_location(std::span<const Observation> observations,
                                    std::string location_id) {
    if (observations.empty())
        throw std::invalid_argument("aggregate_location: no observations to combine");
    double precision_sum = 0.0;
    double weighted_sum = 0.0;
    for (const auto& obs : observations) {
        if (!(std::isfinite(obs.std_dev) && obs.std_dev > 0.0))
            throw std::invalid_argument(
                "aggregate_location: every observation needs a finite std > 0");
        const double precision = 1.0 / (obs.std_dev * obs.std_dev);
        precision_sum += precision;
        weighted_sum += obs.mean * precision;
    }
    LocationEstimate out;
    out.location_id = std::move(location_id);
    out.variance = 1.0 / precision_sum;
    out.mean = out.variance * weighted_sum;
    out.n_observations = observations.size();
    return out;
}

std::vector<TrfcEstimate> estimate_series(std::span<const SlipForceSample> samples,
                                          const EstimatorConfig& config) {
    if (config.window < 1)
        throw std::invalid_argument("estimate_series: window must be >= 1");
    const std::size_t w = static_cast<std::size_t>(config.window);
    std::vector<TrfcEstimate> out;
    if (samples.size() < w) return out;
    out.reserve(samples.size() - w + 1);
    for (std::size_t end = w; end <= samples.size(); ++end) {
        const auto window = samples.subspan(end - w, w);
        const FitResult fit =
            fit_point(window, config.fixed_b, config.c_bounds, config.d_bounds);
        const SlipForceSample& anchor = samples[end - 1];
        TrfcEstimate est;
        est.time = anchor.time;
        est.peak_trfc = fit.peak_trfc;
        est.slip_bin = assign_bin(anchor.slip_ratio);
        est.fitted_c = fit.fitted_c;
        est.fitted_d = fit.fitted_d;
        est.accel_context = anchor.accel_context;
        out.push_back(std::move(est));
    }
    return out;
}

std::vector<Observation> observations_from_bins(std::span<const BinStats> bins) {
    std::vector<Observation> out;
    for (const auto& stats : bins)
        if (stats.std_dev && *stats.std_dev > 0.0)
            out.push_back(Observation{stats.mean, *stats.std_dev});
    return out;
}

}  // namespace trfc
