#pragma once

#include <span>

#include "optlab/core.hpp"

namespace optlab {

// AdaBound bound schedule: both bounds tighten toward final_scale, so the
// clipped pre-conditioner approaches a fixed scaling as t grows.
struct BoundSchedule {
    double final_scale = 1.0;
    double beta2 = 0.999;

    double lower(std::int64_t t) const;
    double upper(std::int64_t t) const;
    void validate(std::int64_t t) const;
};

// ---------------------------------------------------------------------------
// Pure history evaluators (used by the adaptivity meter and as batch oracles
// for the streaming implementations). `history` is the raw gradient sequence
// for one coordinate.
// ---------------------------------------------------------------------------

// sqrt(EMA(x^2; beta2)) + eps, eps outside the root.
double psi_rmsprop(std::span<const double> history, double beta2, double eps);

// Running max of the debiased second-moment root, plus eps. This is the form
// the adaptivity table is stated for.
double psi_amsgrad_meter(std::span<const double> history, double beta2, double eps);

// max_i { psi_i^RMSProp * sqrt(1-beta2^i) } / sqrt(1-beta2^t): the max is
// taken over the raw (un-debiased) roots and re-debiased at t. This is the
// form used by the streaming optimizer.
double psi_amsgrad_practical(std::span<const double> history, double beta2,
                             double eps);

// Clip(psi_rmsprop, lower(t), upper(t)).
double psi_adabound(std::span<const double> history, double beta2, double eps,
                    const BoundSchedule& bounds);
double psi_adabound_clip(double psi_rms, std::int64_t t, const BoundSchedule& bounds);

// sqrt(EMA((x - phi_adam)^2 + eps/(1-beta2); beta2)) + eps, where phi_adam is
// the debiased EMA momentum read at each step.
double psi_adabelief(std::span<const double> history, double beta1, double beta2,
                     double eps);

// (max_i sqrt(EMA(x^2_{1:i}; beta2)) + eps)^(2p); coincides with the AMSGrad
// meter form at p = 1/2.
double psi_padam(std::span<const double> history, double beta2, double eps,
                 double p);

// ---------------------------------------------------------------------------
// Streaming optimizers
// ---------------------------------------------------------------------------

class RmspropOptimizer final : public Optimizer {
public:
    RmspropOptimizer(double beta2, double eps) : beta2_(beta2), eps_(eps) {}
    void reset(std::size_t dim) override;
    void ingest(std::span<const double> g) override;
    const ParamVector& direction() const override { return dir_; }
    const ParamVector& psi() const override { return psi_; }
    std::int64_t step_count() const override { return t_; }
    std::string name() const override { return "rmsprop"; }

private:
    double beta2_, eps_;
    ParamVector v_, dir_, psi_;
    std::int64_t t_ = 0;
};

// Shared state for the Adam-momentum family. With paper_literal_debias the
// momentum is debiased by (1-beta2^t) instead of the conventional (1-beta1^t).
class AdamFamilyBase : public Optimizer {
public:
    AdamFamilyBase(double beta1, double beta2, double eps,
                   bool paper_literal_debias = false)
        : beta1_(beta1), beta2_(beta2), eps_(eps),
          paper_literal_(paper_literal_debias) {}

    void reset(std::size_t dim) override;
    void ingest(std::span<const double> g) override;
    const ParamVector& direction() const override { return dir_; }
    const ParamVector& psi() const override { return psi_; }
    std::int64_t step_count() const override { return t_; }

protected:
    // Fill psi_ for the current step; moments are already updated.
    virtual void update_psi(std::span<const double> g) = 0;
    virtual void reset_extra(std::size_t) {}

    double beta1_, beta2_, eps_;
    bool paper_literal_;
    ParamVector m_, v_, mhat_, dir_, psi_;
    std::int64_t t_ = 0;
};

class AdamOptimizer final : public AdamFamilyBase {
public:
    using AdamFamilyBase::AdamFamilyBase;
    std::string name() const override { return "adam"; }

private:
    void update_psi(std::span<const double> g) override;
};

class AmsgradOptimizer final : public AdamFamilyBase {
public:
    using AdamFamilyBase::AdamFamilyBase;
    std::string name() const override { return "amsgrad"; }
    const ParamVector& max_raw() const { return max_raw_; }

private:
    void update_psi(std::span<const double> g) override;
    void reset_extra(std::size_t dim) override { max_raw_.assign(dim, 0.0); }
    ParamVector max_raw_;
};

class AdaboundOptimizer final : public AdamFamilyBase {
public:
    AdaboundOptimizer(double beta1, double beta2, double eps, double final_scale)
        : AdamFamilyBase(beta1, beta2, eps),
          bounds_{final_scale, beta2} {}
    std::string name() const override { return "adabound"; }

private:
    void update_psi(std::span<const double> g) override;
    BoundSchedule bounds_;
};

class AdabeliefOptimizer final : public AdamFamilyBase {
public:
    using AdamFamilyBase::AdamFamilyBase;
    std::string name() const override { return "adabelief"; }

private:
    void update_psi(std::span<const double> g) override;
    void reset_extra(std::size_t dim) override { s_.assign(dim, 0.0); }
    ParamVector s_;  // residual second moment
};

class PadamOptimizer final : public AdamFamilyBase {
public:
    PadamOptimizer(double beta1, double beta2, double eps, double p);
    std::string name() const override { return "padam"; }

private:
    void update_psi(std::span<const double> g) override;
    void reset_extra(std::size_t dim) override { max_root_.assign(dim, 0.0); }
    double p_;
    ParamVector max_root_;  // running max of debiased second-moment roots
};

}  // namespace optlab
