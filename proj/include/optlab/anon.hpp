#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "optlab/core.hpp"

namespace optlab {

// ---------------------------------------------------------------------------
// Milestone bookkeeping
// ---------------------------------------------------------------------------

// Geometric milestone schedule a_n = ratio^(n-1), a_1 = 1, a_0 = 0. Segment j
// covers gradient indices (a_{j-1}, a_j].
struct MilestoneSchedule {
    int ratio = 2;
    void validate() const;
};

struct Milestone {
    int k;                    // snapshot index, 0-based
    std::int64_t t;           // step of the snapshot, t = ratio^k
    std::int64_t segment_len; // a_{k+1} - a_k
};

// All snapshots with t <= horizon.
std::vector<Milestone> milestone_indices(int ratio, std::int64_t horizon);

// Number of complete segments for a history of length t (>= 1).
int segment_count(int ratio, std::int64_t t);

// ---------------------------------------------------------------------------
// IDU configuration and state
// ---------------------------------------------------------------------------

struct IduConfig {
    double gamma = 1.0;
    double beta2 = 0.999;
    double beta3 = 0.5;
    double epsilon = 1e-16;
    MilestoneSchedule milestones;

    void validate() const;
};

struct AnonConfig {
    IduConfig idu;
    double beta1 = 0.9;
    // Debias the momentum read by (1-beta2^t) instead of the conventional
    // (1-beta1^t).
    bool paper_literal = false;
};

// Fold weights w_j = beta3^(segs-j) * (1 - beta3*[j>1]); they sum to one.
std::vector<double> idu_weights(int segments, double beta3);

// sqrt(sum_j w_j * psi_j^2) over per-segment pre-conditioner values.
double idu_fold(std::span<const double> segment_psis, double beta3);

// Batch evaluation of the delayed pre-conditioner on one coordinate's
// gradient history: segments the history at milestones, takes the debiased
// EMA of squared gradients per segment, shifts by epsilon, raises to gamma
// and folds. Gradients after the last complete milestone do not contribute.
double anon_psi_explicit(std::span<const double> history, const IduConfig& cfg);

// ---------------------------------------------------------------------------
// Streaming optimizers
// ---------------------------------------------------------------------------

// Primary route: keeps the snapshot accumulator p (p = psi^2, the inverse
// squared applied scale) and caches the applied scale v = p^(-1/2) at each
// milestone, so the scaling is bit-identical between milestones.
class AnonOptimizer final : public Optimizer {
public:
    explicit AnonOptimizer(const AnonConfig& cfg);

    void reset(std::size_t dim) override;
    void ingest(std::span<const double> g) override;
    const ParamVector& direction() const override { return dir_; }
    const ParamVector& psi() const override { return psi_; }
    std::int64_t step_count() const override { return t_; }
    std::string name() const override { return "anon"; }

    const AnonConfig& config() const { return cfg_; }
    int snapshot_index() const { return k_; }
    std::int64_t last_reset() const { return last_reset_; }
    const ParamVector& momentum_raw() const { return m_; }
    const ParamVector& segment_second_moment() const { return s_; }
    const ParamVector& accumulator() const { return p_; }
    // Applied per-coordinate scale v = p^(-1/2) (the inverse pre-conditioner).
    const ParamVector& applied_scale() const { return v_; }

    nlohmann::json state_to_json() const;
    void state_from_json(const nlohmann::json& j);

private:
    AnonConfig cfg_;
    ParamVector m_, s_, p_, v_, dir_, psi_;
    std::int64_t t_ = 0;
    int k_ = -1;
    std::int64_t last_reset_ = 0;
    std::int64_t next_milestone_ = 1;
};

// Equivalent formulation: stores the accumulator and divides by its root at
// every step instead of caching the reciprocal root at milestones.
class AnonAltOptimizer final : public Optimizer {
public:
    explicit AnonAltOptimizer(const AnonConfig& cfg);

    void reset(std::size_t dim) override;
    void ingest(std::span<const double> g) override;
    const ParamVector& direction() const override { return dir_; }
    const ParamVector& psi() const override { return psi_; }
    std::int64_t step_count() const override { return t_; }
    std::string name() const override { return "anon-alt"; }

private:
    AnonConfig cfg_;
    ParamVector m_, s_, acc_, dir_, psi_;
    std::int64_t t_ = 0;
    int k_ = -1;
    std::int64_t last_reset_ = 0;
    std::int64_t next_milestone_ = 1;
};

}  // namespace optlab
