#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "optlab/anon.hpp"
#include "optlab/core.hpp"

namespace optlab {

// Pure pre-conditioner evaluator over one coordinate's gradient history.
using PsiEvaluator = std::function<double(std::span<const double>)>;

// Evaluator for the given kind under the given hyperparameters. For amsgrad
// this is the max-over-debiased-roots form the adaptivity table is stated
// for; the streaming optimizer uses the practical raw-max form.
PsiEvaluator make_psi_evaluator(OptimizerKind kind, const HyperParams& hp);

// Central log-difference d ln psi(k x) / dk at k = 1, step h relative.
// Requires h in (0, 0.01] and psi > 0 on the stencil.
double measure_adaptivity(const PsiEvaluator& psi, std::span<const double> history,
                          double h = 1e-5);

// Central value plus one-sided differences; kink_suspected is set when the
// one-sided estimates disagree by more than 10x the measurement tolerance
// (clamp boundaries, max ties).
struct AdaptivityMeasurement {
    double central = 0.0;
    double forward = 0.0;
    double backward = 0.0;
    bool kink_suspected = false;
};
AdaptivityMeasurement measure_adaptivity_checked(const PsiEvaluator& psi,
                                                 std::span<const double> history,
                                                 double h = 1e-5,
                                                 double tol = 1e-4);

// Closed-form adaptivity for the given kind on this history.
double analytic_adaptivity(OptimizerKind kind, const HyperParams& hp,
                           std::span<const double> history);

// ---------------------------------------------------------------------------
// Adaptivity band check for the delayed pre-conditioner
// ---------------------------------------------------------------------------

struct BoundVerdict {
    double measured = 0.0;
    double k = 0.0;        // epsilon / min segment EMA(g^2)
    double lo = 0.0;       // min(gamma*(1-k), gamma)
    double hi = 0.0;       // max(gamma*(1-k), gamma)
    double tolerance = 0.0;
    bool within = false;
};

// Checks measured adaptivity against [gamma*(1-k), gamma] (hull of the two
// endpoints, widened by tol). Throws std::domain_error when some segment has
// zero gradient energy and epsilon is zero.
BoundVerdict adaptivity_bound_check(std::span<const double> history,
                                    const IduConfig& cfg, double measured,
                                    double tol = 1e-4);

// ---------------------------------------------------------------------------
// Equivalence-class test (sampling-based)
// ---------------------------------------------------------------------------

struct EquivalenceVerdict {
    bool consistent = false;  // "consistent with equivalence", never "proved"
    double max_adaptivity_gap = 0.0;
    double max_ratio_spread = 0.0;  // relative spread of psiA/psiB per length
};

// Equivalent iff measured adaptivities agree on every sample and the ratio
// psiA/psiB is constant across histories of equal length (1e-8 relative).
EquivalenceVerdict equivalence_check(const PsiEvaluator& psi_a,
                                     const PsiEvaluator& psi_b,
                                     std::span<const std::vector<double>> samples,
                                     double adaptivity_tol = 1e-4,
                                     double ratio_tol = 1e-8);

// ---------------------------------------------------------------------------
// Non-decreasing-ratio monitor
// ---------------------------------------------------------------------------

struct MonotonicityEntry {
    std::int64_t t;
    std::size_t coordinate;
    double ratio;  // psi_t / eta(t)
    bool violation;
};

struct MonotonicityLog {
    std::vector<MonotonicityEntry> entries;
    std::size_t violation_count = 0;
    // Absolute decrease tolerance on the ratio; avoids flagging rounding noise.
    double tolerance = 1e-12;
};

// Per-step pre-conditioner trace of one run.
struct PsiTrace {
    std::vector<double> lr;                  // eta(t), t = 1..T
    std::vector<ParamVector> psi;            // psi_t per coordinate
};

MonotonicityLog nondecreasing_monitor(const PsiTrace& trace, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct AdaptivityRow {
    std::size_t trial = 0;
    std::size_t history_len = 0;
    double measured = 0.0;
    std::optional<double> analytic;
    std::optional<double> gap;
    bool kink_suspected = false;
};

struct AdaptivityReport {
    OptimizerKind kind = OptimizerKind::sgd;
    double h = 1e-5;
    std::vector<AdaptivityRow> rows;
    std::vector<BoundVerdict> bound_verdicts;  // populated for anon

    nlohmann::json to_json() const;
};

nlohmann::json monotonicity_to_json(const MonotonicityLog& log);

}  // namespace optlab
