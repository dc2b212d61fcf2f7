#include "optlab/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "optlab/rng.hpp"

namespace optlab {

double reddi_coefficient(std::int64_t t) {
    return t % 101 == 1 ? 1010.0 : -10.0;
}

double reddi_gradient(std::int64_t t, double /*x*/) {
    return reddi_coefficient(t);
}

double noise_term(std::int64_t t) {
    if (t < 1) throw std::domain_error("noise_term: t must be >= 1");
    const double magnitude = 500.0 * std::exp(-static_cast<double>(t - 1));
    return t % 2 == 1 ? magnitude : -magnitude;
}

BestFixedPoint best_fixed_point(std::int64_t horizon) {
    if (horizon < 1) throw std::domain_error("best_fixed_point: horizon must be >= 1");
    // One full cycle contributes 1010 - 100*10 = +10; accumulate the remainder.
    const std::int64_t cycles = horizon / 101;
    const std::int64_t rest = horizon % 101;
    double c = static_cast<double>(cycles) * 10.0;
    if (rest >= 1) c += 1010.0 - 10.0 * static_cast<double>(rest - 1);
    const double x = c > 0.0 ? -1.0 : (c < 0.0 ? 1.0 : 0.0);
    return {x, c * x};
}

OnlineRunResult run_online(Optimizer& opt, const Schedule& schedule,
                           std::int64_t horizon,
                           std::span<const std::int64_t> checkpoints,
                           const OnlineRunOptions& options) {
    OnlineRunResult result;
    const BoxRegion region = BoxRegion::uniform(-1.0, 1.0, 1);
    ParamVector theta{options.theta0};
    double realized = 0.0;
    double coeff_sum = 0.0;
    std::size_t next_cp = 0;
    std::vector<std::int64_t> cps(checkpoints.begin(), checkpoints.end());
    std::sort(cps.begin(), cps.end());
    for (std::int64_t t = 1; t <= horizon; ++t) {
        const double c = reddi_coefficient(t);
        realized += c * theta[0];  // play theta_t, then update
        coeff_sum += c;
        const ParamVector g{c + noise_term(t)};
        theta = generic_step(opt, theta, g, schedule, region);
        if (options.record_trace) {
            result.trace.lr.push_back(schedule_eval(schedule, t));
            result.trace.psi.push_back(opt.psi());
        }
        if (!result.first_cross && theta[0] <= options.cross_threshold) {
            result.first_cross = t;
        }
        while (next_cp < cps.size() && cps[next_cp] == t) {
            const double best = coeff_sum * (coeff_sum > 0.0 ? -1.0 : 1.0);
            const double regret = realized - best;
            result.ledger.checkpoints.push_back(
                {t, regret, regret / static_cast<double>(t)});
            ++next_cp;
        }
    }
    const double best = coeff_sum * (coeff_sum > 0.0 ? -1.0 : 1.0);
    result.ledger.realized_loss = realized;
    result.ledger.final_regret = realized - best;
    result.ledger.final_avg_regret =
        result.ledger.final_regret / static_cast<double>(horizon);
    result.theta_end = theta[0];
    return result;
}

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

double beale_log(double x, double y, double* gx, double* gy) {
    const double r1 = 1.5 - x + x * y;
    const double r2 = 2.25 - x + x * y * y;
    const double r3 = 2.625 - x + x * y * y * y;
    const double beale = r1 * r1 + r2 * r2 + r3 * r3;
    if (gx || gy) {
        const double scale = 1.0 / (10.0 * (1.0 + beale));
        if (gx) {
            *gx = 2.0 * (r1 * (y - 1.0) + r2 * (y * y - 1.0) + r3 * (y * y * y - 1.0)) *
                  scale;
        }
        if (gy) {
            *gy = 2.0 * (r1 * x + r2 * 2.0 * x * y + r3 * 3.0 * x * y * y) * scale;
        }
    }
    return std::log1p(beale) / 10.0;
}

double rosenbrock(double x, double y, double* gx, double* gy) {
    const double a = 1.0 - x;
    const double b = y - x * x;
    if (gx) *gx = -2.0 * a - 400.0 * x * b;
    if (gy) *gy = 200.0 * b;
    return a * a + 100.0 * b * b;
}

double rastrigin(double x, double y, double* gx, double* gy) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (gx) *gx = 2.0 * x + 10.0 * two_pi * std::sin(two_pi * x);
    if (gy) *gy = 2.0 * y + 10.0 * two_pi * std::sin(two_pi * y);
    return 20.0 + x * x + y * y - 10.0 * std::cos(two_pi * x) -
           10.0 * std::cos(two_pi * y);
}

namespace {

TestFunction wrap(std::string name, double (*f)(double, double, double*, double*),
                  double ox, double oy, double ov) {
    TestFunction fn;
    fn.name = std::move(name);
    fn.value = [f](double x, double y) { return f(x, y, nullptr, nullptr); };
    fn.gradient = [f](double x, double y) {
        double gx = 0.0, gy = 0.0;
        f(x, y, &gx, &gy);
        return std::make_pair(gx, gy);
    };
    fn.opt_x = ox;
    fn.opt_y = oy;
    fn.opt_value = ov;
    return fn;
}

}  // namespace

const TestFunction& beale_log_function() {
    static const TestFunction fn = wrap("beale-log", beale_log, 3.0, 0.5, 0.0);
    return fn;
}

const TestFunction& rosenbrock_function() {
    static const TestFunction fn = wrap("rosenbrock", rosenbrock, 1.0, 1.0, 0.0);
    return fn;
}

const TestFunction& rastrigin_function() {
    static const TestFunction fn = wrap("rastrigin", rastrigin, 0.0, 0.0, 0.0);
    return fn;
}

const TestFunction& test_function_by_name(const std::string& name) {
    if (name == "beale-log" || name == "beale_log" || name == "beale") {
        return beale_log_function();
    }
    if (name == "rosenbrock") return rosenbrock_function();
    if (name == "rastrigin") return rastrigin_function();
    throw std::invalid_argument("unknown test function: " + name);
}

FunctionRunResult run_function(const TestFunction& fn, Optimizer& opt,
                               double x0, double y0, std::int64_t steps,
                               const Schedule& schedule,
                               const FunctionRunOptions& options) {
    FunctionRunResult result;
    const BoxRegion region = BoxRegion::unbounded();
    ParamVector theta{x0, y0};
    result.trajectory.reserve(static_cast<std::size_t>(steps));
    for (std::int64_t t = 1; t <= steps; ++t) {
        const double loss = fn.value(theta[0], theta[1]);
        auto [gx, gy] = fn.gradient(theta[0], theta[1]);
        ParamVector g{gx, gy};
        if (options.clip_norm > 0.0) {
            const double n = norm2(g);
            if (n > options.clip_norm) {
                const double s = options.clip_norm / n;
                for (double& v : g) v *= s;
            }
        }
        const double eta = schedule_eval(schedule, t);
        if (options.weight_decay > 0.0) {
            for (double& v : theta) v -= eta * options.weight_decay * v;
        }
        theta = generic_step(opt, theta, g, schedule, region);
        const ParamVector& psi = opt.psi();
        const auto [mn, mx] = std::minmax_element(psi.begin(), psi.end());
        result.trajectory.push_back({t, loss, theta, norm2(g), eta, *mn, *mx});
        if (options.record_trace) {
            result.trace.lr.push_back(eta);
            result.trace.psi.push_back(psi);
        }
        if (std::abs(theta[0]) > options.divergence_guard ||
            std::abs(theta[1]) > options.divergence_guard) {
            result.diverged = true;
            result.truncated_at = t;
            break;
        }
    }
    result.theta_end = theta;
    result.final_loss = fn.value(theta[0], theta[1]);
    return result;
}

std::vector<std::vector<double>> landscape_scale(const TestFunction& fn,
                                                 double scale_x, double scale_y,
                                                 const GridSpec& grid) {
    if (!(scale_x > 0.0) || !(scale_y > 0.0)) {
        throw std::invalid_argument("landscape_scale: scales must be positive");
    }
    std::vector<std::vector<double>> out(grid.ny, std::vector<double>(grid.nx));
    for (std::size_t j = 0; j < grid.ny; ++j) {
        const double v = grid.ny == 1
                             ? grid.y_lo
                             : grid.y_lo + (grid.y_hi - grid.y_lo) *
                                               static_cast<double>(j) /
                                               static_cast<double>(grid.ny - 1);
        for (std::size_t i = 0; i < grid.nx; ++i) {
            const double u = grid.nx == 1
                                 ? grid.x_lo
                                 : grid.x_lo + (grid.x_hi - grid.x_lo) *
                                                   static_cast<double>(i) /
                                                   static_cast<double>(grid.nx - 1);
            out[j][i] = fn.value(u * scale_x, v * scale_y);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Smoke training
// ---------------------------------------------------------------------------

SmokeDataset make_smoke_dataset(std::uint64_t seed, std::size_t n, std::size_t d,
                                double flip_rate) {
    SmokeDataset data;
    data.dim = d;
    CounterRng rng(seed);
    ParamVector w_true(d);
    for (auto& v : w_true) v = rng.normal();
    data.features.reserve(n);
    data.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ParamVector x(d);
        for (auto& v : x) v = rng.normal();
        double label = dot(x, w_true) >= 0.0 ? 1.0 : -1.0;
        if (rng.uniform() < flip_rate) label = -label;
        data.features.push_back(std::move(x));
        data.labels.push_back(label);
    }
    return data;
}

double logistic_loss(const SmokeDataset& data, const ParamVector& w,
                     ParamVector* grad) {
    const auto n = static_cast<double>(data.features.size());
    double loss = 0.0;
    if (grad) grad->assign(w.size(), 0.0);
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        const double z = data.labels[i] * dot(data.features[i], w);
        double l, s;  // loss term and d/dz
        if (z > 0.0) {
            const double e = std::exp(-z);
            l = std::log1p(e);
            s = -e / (1.0 + e);
        } else {
            const double e = std::exp(z);
            l = -z + std::log1p(e);
            s = -1.0 / (1.0 + e);
        }
        loss += l;
        if (grad) {
            const double c = s * data.labels[i];
            for (std::size_t jj = 0; jj < w.size(); ++jj) {
                (*grad)[jj] += c * data.features[i][jj];
            }
        }
    }
    if (grad) {
        for (double& v : *grad) v /= n;
    }
    return loss / n;
}

SmokeResult smoke_train(std::uint64_t seed, Optimizer& opt,
                        const Schedule& schedule, std::int64_t epochs) {
    const SmokeDataset data = make_smoke_dataset(seed);
    ParamVector w(data.dim, 0.0);
    SmokeResult result;
    ParamVector grad;
    result.initial_loss = logistic_loss(data, w, nullptr);
    result.epoch_loss.push_back(result.initial_loss);
    const BoxRegion region = BoxRegion::unbounded();
    for (std::int64_t e = 1; e <= epochs; ++e) {
        logistic_loss(data, w, &grad);
        w = generic_step(opt, w, grad, schedule, region);
        result.epoch_loss.push_back(logistic_loss(data, w, nullptr));
    }
    result.final_loss = result.epoch_loss.back();
    return result;
}

}  // namespace optlab
