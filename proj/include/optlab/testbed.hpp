#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "optlab/adaptivity.hpp"
#include "optlab/core.hpp"

namespace optlab {

// ---------------------------------------------------------------------------
// Adversarial noisy online convex problem
// ---------------------------------------------------------------------------

// Coefficient of the periodic linear objective f_t(x) = c_t * x.
double reddi_coefficient(std::int64_t t);

// Gradient of f_t at x; linear objective, so independent of x.
double reddi_gradient(std::int64_t t, double x);

// Alternating vanishing noise; +500/e^(t-1) for odd t, negated for even t.
double noise_term(std::int64_t t);

struct BestFixedPoint {
    double x;      // argmin over [-1,1] of sum_t f_t(x)
    double value;  // sum_t f_t(x)
};
BestFixedPoint best_fixed_point(std::int64_t horizon);

struct RegretPoint {
    std::int64_t t;
    double regret;
    double avg_regret;
};

struct RegretLedger {
    std::vector<RegretPoint> checkpoints;
    double realized_loss = 0.0;   // sum_t f_t(theta_t), theta played before update
    double final_regret = 0.0;
    double final_avg_regret = 0.0;
};

struct OnlineRunResult {
    RegretLedger ledger;
    double theta_end = 0.0;
    // First step with theta <= cross_threshold, if it happened.
    std::optional<std::int64_t> first_cross;
    PsiTrace trace;  // filled only when record_trace
};

struct OnlineRunOptions {
    double theta0 = 1.0;  // adversarially worst feasible start
    double cross_threshold = -0.99;
    bool record_trace = false;
};

// Runs the noisy Reddi problem on [-1,1]: feeds g_t = c_t + N_t, projects,
// and accounts regret against the exact best fixed point. Deterministic.
OnlineRunResult run_online(Optimizer& opt, const Schedule& schedule,
                           std::int64_t horizon,
                           std::span<const std::int64_t> checkpoints,
                           const OnlineRunOptions& options = {});

// ---------------------------------------------------------------------------
// Two-dimensional test functions
// ---------------------------------------------------------------------------

struct TestFunction {
    std::string name;
    std::function<double(double, double)> value;
    std::function<std::pair<double, double>(double, double)> gradient;
    double opt_x, opt_y, opt_value;
};

const TestFunction& beale_log_function();
const TestFunction& rosenbrock_function();
const TestFunction& rastrigin_function();
const TestFunction& test_function_by_name(const std::string& name);

// loss and gradient in one call
double beale_log(double x, double y, double* gx = nullptr, double* gy = nullptr);
double rosenbrock(double x, double y, double* gx = nullptr, double* gy = nullptr);
double rastrigin(double x, double y, double* gx = nullptr, double* gy = nullptr);

// ---------------------------------------------------------------------------
// Function-optimization runs
// ---------------------------------------------------------------------------

struct TrajectoryRecord {
    std::int64_t step;
    double loss;
    ParamVector theta;
    double grad_norm;
    double lr;
    double psi_min;
    double psi_max;
};

struct FunctionRunOptions {
    double weight_decay = 0.0;   // decoupled, applied before the step
    double clip_norm = 0.0;      // 0 disables global-norm clipping
    double divergence_guard = 1e8;
    bool record_trace = false;
};

struct FunctionRunResult {
    std::vector<TrajectoryRecord> trajectory;
    bool diverged = false;
    std::int64_t truncated_at = 0;
    double final_loss = 0.0;
    ParamVector theta_end;
    PsiTrace trace;
};

FunctionRunResult run_function(const TestFunction& fn, Optimizer& opt,
                               double x0, double y0, std::int64_t steps,
                               const Schedule& schedule,
                               const FunctionRunOptions& options = {});

// ---------------------------------------------------------------------------
// Landscape scaling
// ---------------------------------------------------------------------------

struct GridSpec {
    double x_lo = -4.0, x_hi = 4.0;
    double y_lo = -4.0, y_hi = 4.0;
    std::size_t nx = 64, ny = 64;
};

// Evaluates fn at display coordinates stretched by the per-axis scale
// (scale_x, scale_y): cell (i,j) holds fn(u_i*scale_x, v_j*scale_y). A larger
// scale covers more of the original axis per display unit, which lowers the
// sampling density along it.
std::vector<std::vector<double>> landscape_scale(const TestFunction& fn,
                                                 double scale_x, double scale_y,
                                                 const GridSpec& grid);

// ---------------------------------------------------------------------------
// Synthetic smooth training smoke test
// ---------------------------------------------------------------------------

struct SmokeDataset {
    std::vector<ParamVector> features;  // n x d standard normal
    std::vector<double> labels;         // +-1, 5% flipped
    std::size_t dim = 0;
};

SmokeDataset make_smoke_dataset(std::uint64_t seed, std::size_t n = 1024,
                                std::size_t d = 32, double flip_rate = 0.05);

// Mean logistic loss and its gradient.
double logistic_loss(const SmokeDataset& data, const ParamVector& w,
                     ParamVector* grad = nullptr);

struct SmokeResult {
    std::vector<double> epoch_loss;  // epochs + 1 entries, index 0 = initial
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

// Full-batch training of d-dimensional logistic regression from w = 0.
SmokeResult smoke_train(std::uint64_t seed, Optimizer& opt,
                        const Schedule& schedule, std::int64_t epochs = 200);

}  // namespace optlab
