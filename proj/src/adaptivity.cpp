#include "optlab/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "optlab/preconditioners.hpp"

namespace optlab {

PsiEvaluator make_psi_evaluator(OptimizerKind kind, const HyperParams& hp) {
    const double eps = hp.resolved_epsilon(kind);
    switch (kind) {
        case OptimizerKind::sgd:
        case OptimizerKind::sgdm:
            return [](std::span<const double>) { return 1.0; };
        case OptimizerKind::rmsprop:
        case OptimizerKind::adam:
            return [b2 = hp.beta2, eps](std::span<const double> h) {
                return psi_rmsprop(h, b2, eps);
            };
        case OptimizerKind::amsgrad:
            return [b2 = hp.beta2, eps](std::span<const double> h) {
                return psi_amsgrad_meter(h, b2, eps);
            };
        case OptimizerKind::adabound:
            return [b2 = hp.beta2, eps, sc = hp.bound_scale](std::span<const double> h) {
                return psi_adabound(h, b2, eps, BoundSchedule{sc, b2});
            };
        case OptimizerKind::adabelief:
            return [b1 = hp.beta1, b2 = hp.beta2, eps](std::span<const double> h) {
                return psi_adabelief(h, b1, b2, eps);
            };
        case OptimizerKind::padam:
            return [b2 = hp.beta2, eps, p = hp.padam_p](std::span<const double> h) {
                return psi_padam(h, b2, eps, p);
            };
        case OptimizerKind::anon:
        case OptimizerKind::anon_alt: {
            IduConfig cfg{hp.gamma, hp.beta2, hp.beta3, eps, {hp.ratio}};
            cfg.validate();
            return [cfg](std::span<const double> h) {
                return anon_psi_explicit(h, cfg);
            };
        }
    }
    throw std::logic_error("make_psi_evaluator: unknown kind");
}

namespace {

double log_psi_scaled(const PsiEvaluator& psi, std::span<const double> history,
                      double k) {
    std::vector<double> scaled(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) scaled[i] = k * history[i];
    const double val = psi(scaled);
    if (!(val > 0.0) || !std::isfinite(val)) {
        throw std::domain_error("measure_adaptivity: psi not positive on stencil");
    }
    return std::log(val);
}

}  // namespace

double measure_adaptivity(const PsiEvaluator& psi, std::span<const double> history,
                          double h) {
    if (!(h > 0.0) || h > 0.01) {
        throw std::invalid_argument("measure_adaptivity: h must lie in (0, 0.01]");
    }
    const double up = log_psi_scaled(psi, history, 1.0 + h);
    const double dn = log_psi_scaled(psi, history, 1.0 - h);
    return (up - dn) / (2.0 * h);
}

AdaptivityMeasurement measure_adaptivity_checked(const PsiEvaluator& psi,
                                                 std::span<const double> history,
                                                 double h, double tol) {
    AdaptivityMeasurement m;
    const double up = log_psi_scaled(psi, history, 1.0 + h);
    const double mid = log_psi_scaled(psi, history, 1.0);
    const double dn = log_psi_scaled(psi, history, 1.0 - h);
    m.central = (up - dn) / (2.0 * h);
    m.forward = (up - mid) / h;
    m.backward = (mid - dn) / h;
    m.kink_suspected = std::abs(m.forward - m.backward) > 10.0 * tol;
    return m;
}

namespace {

double analytic_rmsprop(std::span<const double> history, double beta2, double eps) {
    const double root = psi_rmsprop(history, beta2, 0.0);
    return 1.0 / (1.0 + eps / root);
}

double analytic_max_root(std::span<const double> history, double beta2, double eps) {
    const double max_root = psi_amsgrad_meter(history, beta2, 0.0);
    return 1.0 / (1.0 + eps / max_root);
}

double analytic_adabelief(std::span<const double> history, double beta1,
                          double beta2, double eps) {
    // Residual second moments with and without the epsilon shift.
    double m = 0.0, acc_shift = 0.0, acc0 = 0.0;
    std::int64_t i = 0;
    const double shift = eps / (1.0 - beta2);
    for (double x : history) {
        m = beta1 * m + (1.0 - beta1) * x;
        ++i;
        const double r = x - m / (1.0 - std::pow(beta1, static_cast<double>(i)));
        acc_shift = beta2 * acc_shift + (1.0 - beta2) * (r * r + shift);
        acc0 = beta2 * acc0 + (1.0 - beta2) * r * r;
    }
    const double deb = 1.0 - std::pow(beta2, static_cast<double>(history.size()));
    const double es = acc_shift / deb;
    const double e0 = acc0 / deb;
    return 1.0 / (1.0 + eps * (1.0 / (1.0 - beta2) + std::sqrt(es)) / e0);
}

double analytic_anon(std::span<const double> history, const IduConfig& cfg) {
    const int segs = segment_count(cfg.milestones.ratio,
                                   static_cast<std::int64_t>(history.size()));
    const auto w = idu_weights(segs, cfg.beta3);
    double num = 0.0, den = 0.0;
    std::int64_t lo = 0, hi = 1;
    for (int j = 1; j <= segs; ++j) {
        double acc = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            const double x = history[static_cast<std::size_t>(i)];
            acc = cfg.beta2 * acc + (1.0 - cfg.beta2) * x * x;
        }
        const double deb = 1.0 - std::pow(cfg.beta2, static_cast<double>(hi - lo));
        const double sigma = acc / deb + cfg.epsilon;
        const double wj = w[static_cast<std::size_t>(j - 1)];
        num += wj * std::pow(sigma, cfg.gamma - 1.0);
        den += wj * std::pow(sigma, cfg.gamma);
        lo = hi;
        hi *= cfg.milestones.ratio;
    }
    return cfg.gamma * (1.0 - cfg.epsilon * num / den);
}

}  // namespace

double analytic_adaptivity(OptimizerKind kind, const HyperParams& hp,
                           std::span<const double> history) {
    const double eps = hp.resolved_epsilon(kind);
    switch (kind) {
        case OptimizerKind::sgd:
        case OptimizerKind::sgdm:
            return 0.0;
        case OptimizerKind::rmsprop:
        case OptimizerKind::adam:
            return analytic_rmsprop(history, hp.beta2, eps);
        case OptimizerKind::amsgrad:
            return analytic_max_root(history, hp.beta2, eps);
        case OptimizerKind::padam:
            return 2.0 * hp.padam_p * analytic_max_root(history, hp.beta2, eps);
        case OptimizerKind::adabound: {
            const BoundSchedule bounds{hp.bound_scale, hp.beta2};
            const auto t = static_cast<std::int64_t>(history.size());
            const double pr = psi_rmsprop(history, hp.beta2, eps);
            if (bounds.lower(t) < pr && pr < bounds.upper(t)) {
                return analytic_rmsprop(history, hp.beta2, eps);
            }
            return 0.0;
        }
        case OptimizerKind::adabelief:
            return analytic_adabelief(history, hp.beta1, hp.beta2, eps);
        case OptimizerKind::anon:
        case OptimizerKind::anon_alt: {
            IduConfig cfg{hp.gamma, hp.beta2, hp.beta3, eps, {hp.ratio}};
            return analytic_anon(history, cfg);
        }
    }
    throw std::logic_error("analytic_adaptivity: unknown kind");
}

BoundVerdict adaptivity_bound_check(std::span<const double> history,
                                    const IduConfig& cfg, double measured,
                                    double tol) {
    if (history.empty()) {
        throw std::domain_error("adaptivity_bound_check: empty history");
    }
    const int segs = segment_count(cfg.milestones.ratio,
                                   static_cast<std::int64_t>(history.size()));
    double min_ema = std::numeric_limits<double>::infinity();
    std::int64_t lo = 0, hi = 1;
    for (int j = 1; j <= segs; ++j) {
        double acc = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            const double x = history[static_cast<std::size_t>(i)];
            acc = cfg.beta2 * acc + (1.0 - cfg.beta2) * x * x;
        }
        const double deb = 1.0 - std::pow(cfg.beta2, static_cast<double>(hi - lo));
        min_ema = std::min(min_ema, acc / deb);
        lo = hi;
        hi *= cfg.milestones.ratio;
    }
    if (min_ema == 0.0 && cfg.epsilon == 0.0) {
        throw std::domain_error(
            "adaptivity_bound_check: k undefined (zero-energy segment, epsilon 0)");
    }
    BoundVerdict v;
    v.measured = measured;
    v.k = min_ema > 0.0 ? cfg.epsilon / min_ema
                        : std::numeric_limits<double>::infinity();
    const double a = cfg.gamma * (1.0 - v.k);
    v.lo = std::min(a, cfg.gamma);
    v.hi = std::max(a, cfg.gamma);
    v.tolerance = tol;
    v.within = measured >= v.lo - tol && measured <= v.hi + tol;
    return v;
}

EquivalenceVerdict equivalence_check(const PsiEvaluator& psi_a,
                                     const PsiEvaluator& psi_b,
                                     std::span<const std::vector<double>> samples,
                                     double adaptivity_tol, double ratio_tol) {
    EquivalenceVerdict verdict;
    // Group ratios by history length; within one length the ratio must be a
    // constant f(n) for equivalent pre-conditioners.
    std::map<std::size_t, std::pair<double, double>> ratio_range;
    for (const auto& h : samples) {
        const double a = measure_adaptivity(psi_a, h);
        const double b = measure_adaptivity(psi_b, h);
        verdict.max_adaptivity_gap = std::max(verdict.max_adaptivity_gap,
                                              std::abs(a - b));
        const double ratio = psi_a(h) / psi_b(h);
        auto [it, inserted] = ratio_range.try_emplace(h.size(), ratio, ratio);
        if (!inserted) {
            it->second.first = std::min(it->second.first, ratio);
            it->second.second = std::max(it->second.second, ratio);
        }
    }
    for (const auto& [len, range] : ratio_range) {
        const double spread = (range.second - range.first) /
                              std::max(std::abs(range.first), 1e-300);
        verdict.max_ratio_spread = std::max(verdict.max_ratio_spread, spread);
    }
    verdict.consistent = verdict.max_adaptivity_gap <= adaptivity_tol &&
                         verdict.max_ratio_spread <= ratio_tol;
    return verdict;
}

MonotonicityLog nondecreasing_monitor(const PsiTrace& trace, double tol) {
    if (trace.lr.size() != trace.psi.size()) {
        throw std::invalid_argument("nondecreasing_monitor: trace length mismatch");
    }
    MonotonicityLog log;
    log.tolerance = tol;
    if (trace.psi.empty()) return log;
    const std::size_t dim = trace.psi.front().size();
    std::vector<double> prev(dim, -std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < trace.psi.size(); ++s) {
        const auto t = static_cast<std::int64_t>(s + 1);
        for (std::size_t i = 0; i < dim; ++i) {
            const double ratio = trace.psi[s][i] / trace.lr[s];
            const bool bad = ratio < prev[i] - tol;
            log.entries.push_back({t, i, ratio, bad});
            if (bad) ++log.violation_count;
            prev[i] = ratio;
        }
    }
    return log;
}

nlohmann::json AdaptivityReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row{
            {"trial", r.trial},
            {"history_len", r.history_len},
            {"measured", r.measured},
            {"kink_suspected", r.kink_suspected},
        };
        if (r.analytic) row["analytic"] = *r.analytic;
        if (r.gap) row["gap"] = *r.gap;
        rows_json.push_back(std::move(row));
    }
    nlohmann::json bounds_json = nlohmann::json::array();
    for (const auto& b : bound_verdicts) {
        bounds_json.push_back({{"measured", b.measured},
                               {"k", b.k},
                               {"lo", b.lo},
                               {"hi", b.hi},
                               {"within", b.within}});
    }
    return nlohmann::json{{"optimizer", kind_name(kind)},
                          {"h", h},
                          {"rows", rows_json},
                          {"bound_verdicts", bounds_json}};
}

nlohmann::json monotonicity_to_json(const MonotonicityLog& log) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : log.entries) {
        if (!e.violation) continue;  // full trace is large; keep violations only
        entries.push_back({{"t", e.t},
                           {"coordinate", e.coordinate},
                           {"ratio", e.ratio}});
    }
    return nlohmann::json{{"violations", log.violation_count},
                          {"tolerance", log.tolerance},
                          {"violation_entries", entries},
                          {"steps", log.entries.size()}};
}

}  // namespace optlab
