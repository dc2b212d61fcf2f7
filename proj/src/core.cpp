#include "optlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace optlab {

double ema(std::span<const double> xs, double beta) {
    if (xs.empty()) throw std::domain_error("ema: empty sequence");
    const auto t = static_cast<std::int64_t>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc = beta * acc + (1.0 - beta) * x;
    return acc / (1.0 - std::pow(beta, static_cast<double>(t)));
}

double momentum_m(std::span<const double> xs, double beta) {
    if (xs.empty()) throw std::domain_error("momentum_m: empty sequence");
    double acc = 0.0;
    for (double x : xs) acc = beta * acc + x;
    return acc;
}

double ema_update_scalar(double m_prev, double g, double beta) {
    return beta * m_prev + (1.0 - beta) * g;
}

void MomentumState::update(std::span<const double> g) {
    require_same_dim(m, g, "MomentumState::update");
    for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = beta * m[i] + (1.0 - beta) * g[i];
    }
    ++t;
}

double MomentumState::read(std::size_t i) const {
    if (bias_mode == BiasMode::debiased_ema) {
        return m[i] / (1.0 - std::pow(beta, static_cast<double>(t)));
    }
    return m[i] / (1.0 - beta);
}

void MomentumState::read_into(ParamVector& out) const {
    out.resize(m.size());
    const double denom = bias_mode == BiasMode::debiased_ema
                             ? 1.0 - std::pow(beta, static_cast<double>(t))
                             : 1.0 - beta;
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] / denom;
}

void MomentumState::reset(std::size_t dim) {
    m.assign(dim, 0.0);
    t = 0;
}

double schedule_eval(const Schedule& spec, std::int64_t t) {
    if (t < 1) throw std::domain_error("schedule_eval: t must be >= 1");
    switch (spec.kind) {
        case ScheduleKind::constant:
            return spec.eta0;
        case ScheduleKind::inverse_sqrt:
            return spec.eta0 / std::sqrt(static_cast<double>(t));
    }
    throw std::logic_error("schedule_eval: unknown kind");
}

ScheduleKind parse_schedule_kind(const std::string& s) {
    if (s == "constant") return ScheduleKind::constant;
    if (s == "inverse-sqrt" || s == "inverse_sqrt") return ScheduleKind::inverse_sqrt;
    throw std::invalid_argument("unknown schedule kind: " + s);
}

std::string schedule_kind_name(ScheduleKind k) {
    return k == ScheduleKind::constant ? "constant" : "inverse-sqrt";
}

BoxRegion BoxRegion::uniform(double lo, double hi, std::size_t dim) {
    BoxRegion r;
    r.lower.assign(dim, lo);
    r.upper.assign(dim, hi);
    r.validate();
    return r;
}

void BoxRegion::validate() const {
    if (lower.size() != upper.size()) {
        throw std::invalid_argument("BoxRegion: bound dimension mismatch");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (lower[i] > upper[i]) {
            throw std::invalid_argument("BoxRegion: lower > upper at coordinate " +
                                        std::to_string(i));
        }
    }
}

void DiagScaling::validate() const {
    for (std::size_t i = 0; i < diag.size(); ++i) {
        if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) {
            throw std::invalid_argument("DiagScaling: entry " + std::to_string(i) +
                                        " is not strictly positive and finite");
        }
    }
}

ParamVector project_box(const ParamVector& y, const BoxRegion& region,
                        const DiagScaling& scaling) {
    scaling.validate();
    return project_box(y, region);
}

ParamVector project_box(const ParamVector& y, const BoxRegion& region) {
    region.validate();
    if (region.is_unbounded()) return y;
    if (region.lower.size() != y.size()) {
        throw std::invalid_argument("project_box: region dimension mismatch");
    }
    ParamVector out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = std::clamp(y[i], region.lower[i], region.upper[i]);
    }
    return out;
}

ParamVector generic_step(Optimizer& opt, const ParamVector& theta,
                         const ParamVector& g, const Schedule& schedule,
                         const BoxRegion& region) {
    require_same_dim(theta, g, "generic_step");
    const std::int64_t t = opt.step_count() + 1;
    if (const std::size_t bad = first_non_finite(g);
        bad != static_cast<std::size_t>(-1)) {
        std::ostringstream msg;
        msg << "generic_step: non-finite gradient at step " << t
            << ", coordinate " << bad;
        throw std::domain_error(msg.str());
    }
    opt.ingest(g);
    const double eta = schedule_eval(schedule, t);
    const ParamVector& dir = opt.direction();
    ParamVector y(theta.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = theta[i] - eta * dir[i];
    return project_box(y, region);
}

void SgdOptimizer::reset(std::size_t dim) {
    dir_.assign(dim, 0.0);
    psi_.assign(dim, 1.0);
    t_ = 0;
}

void SgdOptimizer::ingest(std::span<const double> g) {
    if (t_ == 0 && dir_.size() != g.size()) reset(g.size());
    ++t_;
    dir_.assign(g.begin(), g.end());
}

void SgdmOptimizer::reset(std::size_t dim) {
    m_.assign(dim, 0.0);
    dir_.assign(dim, 0.0);
    psi_.assign(dim, 1.0);
    t_ = 0;
}

void SgdmOptimizer::ingest(std::span<const double> g) {
    if (t_ == 0 && m_.size() != g.size()) reset(g.size());
    ++t_;
    if (mode_ == BiasMode::raw_m) {
        for (std::size_t i = 0; i < m_.size(); ++i) {
            m_[i] = beta_ * m_[i] + g[i];
            dir_[i] = m_[i];
        }
    } else {
        const double denom = 1.0 - std::pow(beta_, static_cast<double>(t_));
        for (std::size_t i = 0; i < m_.size(); ++i) {
            m_[i] = beta_ * m_[i] + (1.0 - beta_) * g[i];
            dir_[i] = m_[i] / denom;
        }
    }
}

std::string kind_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::sgdm: return "sgdm";
        case OptimizerKind::rmsprop: return "rmsprop";
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::amsgrad: return "amsgrad";
        case OptimizerKind::adabound: return "adabound";
        case OptimizerKind::adabelief: return "adabelief";
        case OptimizerKind::padam: return "padam";
        case OptimizerKind::anon: return "anon";
        case OptimizerKind::anon_alt: return "anon-alt";
    }
    throw std::logic_error("kind_name: unknown kind");
}

OptimizerKind parse_kind(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "sgdm") return OptimizerKind::sgdm;
    if (s == "rmsprop") return OptimizerKind::rmsprop;
    if (s == "adam") return OptimizerKind::adam;
    if (s == "amsgrad") return OptimizerKind::amsgrad;
    if (s == "adabound") return OptimizerKind::adabound;
    if (s == "adabelief") return OptimizerKind::adabelief;
    if (s == "padam") return OptimizerKind::padam;
    if (s == "anon") return OptimizerKind::anon;
    if (s == "anon-alt" || s == "anon_alt") return OptimizerKind::anon_alt;
    throw std::invalid_argument("unknown optimizer: " + s);
}

double HyperParams::resolved_epsilon(OptimizerKind k) const {
    if (!std::isnan(epsilon)) return epsilon;
    return (k == OptimizerKind::anon || k == OptimizerKind::anon_alt) ? 1e-16
                                                                      : 1e-8;
}

}  // namespace optlab
