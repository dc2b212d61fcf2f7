#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "optlab/vec.hpp"

namespace optlab {

// ---------------------------------------------------------------------------
// Momentum operators
// ---------------------------------------------------------------------------

// Exponential moving average with bias correction:
//   (1-b)/(1-b^t) * sum_i b^(t-i) x_i.
// A constant sequence maps to itself for every t.
double ema(std::span<const double> xs, double beta);

// Classical momentum without normalization: sum_i b^(t-i) x_i.
double momentum_m(std::span<const double> xs, double beta);

enum class BiasMode {
    debiased_ema,  // read m / (1 - beta^t)
    raw_m,         // read the classical momentum M = m / (1 - beta)
};

// Streaming EMA accumulator. Holds the raw accumulator
// m_t = beta*m_{t-1} + (1-beta)*x_t; debiasing is applied on read.
struct MomentumState {
    ParamVector m;
    std::int64_t t = 0;
    double beta = 0.9;
    BiasMode bias_mode = BiasMode::debiased_ema;

    explicit MomentumState(std::size_t dim = 0, double beta_ = 0.9,
                           BiasMode mode = BiasMode::debiased_ema)
        : m(dim, 0.0), beta(beta_), bias_mode(mode) {}

    void update(std::span<const double> g);
    // Debiased (or raw-M) read of coordinate i.
    double read(std::size_t i) const;
    void read_into(ParamVector& out) const;
    void reset(std::size_t dim);
};

// Scalar convenience used by tests and the pure evaluators.
double ema_update_scalar(double m_prev, double g, double beta);

// ---------------------------------------------------------------------------
// Learning-rate schedule
// ---------------------------------------------------------------------------

enum class ScheduleKind { constant, inverse_sqrt };

struct Schedule {
    ScheduleKind kind = ScheduleKind::constant;
    double eta0 = 0.01;
};

// eta(t); t is 1-based. constant -> eta0, inverse-sqrt -> eta0/sqrt(t).
double schedule_eval(const Schedule& spec, std::int64_t t);

ScheduleKind parse_schedule_kind(const std::string& s);
std::string schedule_kind_name(ScheduleKind k);

// ---------------------------------------------------------------------------
// Feasible region and diagonal scaling
// ---------------------------------------------------------------------------

// Axis-aligned box; empty bound vectors mean unbounded in every coordinate.
struct BoxRegion {
    ParamVector lower;
    ParamVector upper;

    static BoxRegion unbounded() { return {}; }
    static BoxRegion uniform(double lo, double hi, std::size_t dim);
    bool is_unbounded() const { return lower.empty() && upper.empty(); }
    void validate() const;
};

struct DiagScaling {
    ParamVector diag;
    void validate() const;
};

// Scaled projection onto a box. Separable, so the result is the coordinatewise
// clamp and does not depend on the (strictly positive) scaling.
ParamVector project_box(const ParamVector& y, const BoxRegion& region,
                        const DiagScaling& scaling);
ParamVector project_box(const ParamVector& y, const BoxRegion& region);

// ---------------------------------------------------------------------------
// Generic optimizer frame
// ---------------------------------------------------------------------------

// One streaming first-order optimizer: consumes the gradient for step t and
// exposes the pre-conditioned update direction m_t / psi_t together with the
// pre-conditioner diagonal psi_t for diagnostics.
class Optimizer {
public:
    virtual ~Optimizer() = default;

    virtual void reset(std::size_t dim) = 0;
    // Advance to step t+1 with gradient g. Finiteness of g is checked by
    // generic_step, not here.
    virtual void ingest(std::span<const double> g) = 0;
    virtual const ParamVector& direction() const = 0;
    virtual const ParamVector& psi() const = 0;
    virtual std::int64_t step_count() const = 0;
    virtual std::string name() const = 0;
};

// theta' = project(theta - eta(t) * direction). Throws std::domain_error on a
// non-finite gradient, naming the step and coordinate.
ParamVector generic_step(Optimizer& opt, const ParamVector& theta,
                         const ParamVector& g, const Schedule& schedule,
                         const BoxRegion& region);

// ---------------------------------------------------------------------------
// Identity-preconditioner optimizers
// ---------------------------------------------------------------------------

class SgdOptimizer final : public Optimizer {
public:
    void reset(std::size_t dim) override;
    void ingest(std::span<const double> g) override;
    const ParamVector& direction() const override { return dir_; }
    const ParamVector& psi() const override { return psi_; }
    std::int64_t step_count() const override { return t_; }
    std::string name() const override { return "sgd"; }

private:
    ParamVector dir_, psi_;
    std::int64_t t_ = 0;
};

// Heavy-ball momentum. raw_m is the textbook update; debiased_ema divides the
// EMA accumulator by (1 - beta^t) on read.
class SgdmOptimizer final : public Optimizer {
public:
    explicit SgdmOptimizer(double beta = 0.9, BiasMode mode = BiasMode::raw_m)
        : beta_(beta), mode_(mode) {}

    void reset(std::size_t dim) override;
    void ingest(std::span<const double> g) override;
    const ParamVector& direction() const override { return dir_; }
    const ParamVector& psi() const override { return psi_; }
    std::int64_t step_count() const override { return t_; }
    std::string name() const override { return "sgdm"; }

private:
    double beta_;
    BiasMode mode_;
    ParamVector m_, dir_, psi_;
    std::int64_t t_ = 0;
};

// ---------------------------------------------------------------------------
// Optimizer kinds and unified hyperparameter bag
// ---------------------------------------------------------------------------

enum class OptimizerKind {
    sgd,
    sgdm,
    rmsprop,
    adam,
    amsgrad,
    adabound,
    adabelief,
    padam,
    anon,
    anon_alt,
};

std::string kind_name(OptimizerKind k);
OptimizerKind parse_kind(const std::string& s);

struct HyperParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double beta3 = 0.5;        // IDU fold decay
    double epsilon = std::numeric_limits<double>::quiet_NaN();  // per-kind default
    double gamma = 1.0;        // adaptivity exponent
    int ratio = 2;             // milestone ratio
    double padam_p = 0.25;
    double bound_scale = 1.0;  // AdaBound final scale
    bool paper_literal = false;     // debias m by (1-beta2^t) instead of (1-beta1^t)
    BiasMode sgdm_mode = BiasMode::raw_m;

    // NaN epsilon resolves to 1e-16 for anon, 1e-8 for the baselines.
    double resolved_epsilon(OptimizerKind k) const;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const HyperParams& hp);

}  // namespace optlab
