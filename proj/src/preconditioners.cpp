#include "optlab/preconditioners.hpp"

#include <algorithm>
#include <cmath>

namespace optlab {

double BoundSchedule::lower(std::int64_t t) const {
    return final_scale * (1.0 - 1.0 / ((1.0 - beta2) * static_cast<double>(t) + 1.0));
}

double BoundSchedule::upper(std::int64_t t) const {
    return final_scale * (1.0 + 1.0 / ((1.0 - beta2) * static_cast<double>(t)));
}

void BoundSchedule::validate(std::int64_t t) const {
    if (!(final_scale > 0.0)) {
        throw std::invalid_argument("BoundSchedule: final_scale must be > 0");
    }
    if (lower(t) > upper(t)) {
        throw std::invalid_argument("BoundSchedule: lower bound exceeds upper bound");
    }
}

namespace {

double debias(double beta, std::int64_t t) {
    return 1.0 - std::pow(beta, static_cast<double>(t));
}

}  // namespace

double psi_rmsprop(std::span<const double> history, double beta2, double eps) {
    if (history.empty()) throw std::domain_error("psi_rmsprop: empty history");
    double acc = 0.0;
    for (double x : history) acc = beta2 * acc + (1.0 - beta2) * x * x;
    return std::sqrt(acc / debias(beta2, static_cast<std::int64_t>(history.size()))) + eps;
}

double psi_amsgrad_meter(std::span<const double> history, double beta2, double eps) {
    if (history.empty()) throw std::domain_error("psi_amsgrad_meter: empty history");
    double acc = 0.0, max_root = 0.0;
    std::int64_t i = 0;
    for (double x : history) {
        acc = beta2 * acc + (1.0 - beta2) * x * x;
        ++i;
        max_root = std::max(max_root, std::sqrt(acc / debias(beta2, i)));
    }
    return max_root + eps;
}

double psi_amsgrad_practical(std::span<const double> history, double beta2,
                             double eps) {
    if (history.empty()) throw std::domain_error("psi_amsgrad_practical: empty history");
    double acc = 0.0, max_raw = 0.0;
    std::int64_t i = 0;
    for (double x : history) {
        acc = beta2 * acc + (1.0 - beta2) * x * x;
        ++i;
        const double adj = std::sqrt(debias(beta2, i));
        max_raw = std::max(max_raw, std::sqrt(acc) + eps * adj);
    }
    return max_raw / std::sqrt(debias(beta2, static_cast<std::int64_t>(history.size())));
}

double psi_adabound_clip(double psi_rms, std::int64_t t, const BoundSchedule& bounds) {
    bounds.validate(t);
    return std::clamp(psi_rms, bounds.lower(t), bounds.upper(t));
}

double psi_adabound(std::span<const double> history, double beta2, double eps,
                    const BoundSchedule& bounds) {
    return psi_adabound_clip(psi_rmsprop(history, beta2, eps),
                             static_cast<std::int64_t>(history.size()), bounds);
}

double psi_adabelief(std::span<const double> history, double beta1, double beta2,
                     double eps) {
    if (history.empty()) throw std::domain_error("psi_adabelief: empty history");
    double m = 0.0, acc = 0.0;
    std::int64_t i = 0;
    const double shift = eps / (1.0 - beta2);
    for (double x : history) {
        m = beta1 * m + (1.0 - beta1) * x;
        ++i;
        const double r = x - m / debias(beta1, i);
        acc = beta2 * acc + (1.0 - beta2) * (r * r + shift);
    }
    return std::sqrt(acc / debias(beta2, static_cast<std::int64_t>(history.size()))) + eps;
}

double psi_padam(std::span<const double> history, double beta2, double eps,
                 double p) {
    if (!(p > 0.0) || p > 0.5) {
        throw std::invalid_argument("psi_padam: p must lie in (0, 1/2]");
    }
    if (history.empty()) throw std::domain_error("psi_padam: empty history");
    double acc = 0.0, max_root = 0.0;
    std::int64_t i = 0;
    for (double x : history) {
        acc = beta2 * acc + (1.0 - beta2) * x * x;
        ++i;
        max_root = std::max(max_root, std::sqrt(acc / debias(beta2, i)));
    }
    return std::pow(max_root + eps, 2.0 * p);
}

void RmspropOptimizer::reset(std::size_t dim) {
    v_.assign(dim, 0.0);
    dir_.assign(dim, 0.0);
    psi_.assign(dim, 0.0);
    t_ = 0;
}

void RmspropOptimizer::ingest(std::span<const double> g) {
    if (t_ == 0 && v_.size() != g.size()) reset(g.size());
    ++t_;
    const double deb = debias(beta2_, t_);
    for (std::size_t i = 0; i < v_.size(); ++i) {
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g[i] * g[i];
        psi_[i] = std::sqrt(v_[i] / deb) + eps_;
        dir_[i] = g[i] / psi_[i];
    }
}

void AdamFamilyBase::reset(std::size_t dim) {
    m_.assign(dim, 0.0);
    v_.assign(dim, 0.0);
    mhat_.assign(dim, 0.0);
    dir_.assign(dim, 0.0);
    psi_.assign(dim, 0.0);
    t_ = 0;
    reset_extra(dim);
}

void AdamFamilyBase::ingest(std::span<const double> g) {
    if (t_ == 0 && m_.size() != g.size()) reset(g.size());
    ++t_;
    const double mdeb = debias(paper_literal_ ? beta2_ : beta1_, t_);
    for (std::size_t i = 0; i < m_.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g[i] * g[i];
        mhat_[i] = m_[i] / mdeb;
    }
    update_psi(g);
    for (std::size_t i = 0; i < m_.size(); ++i) dir_[i] = mhat_[i] / psi_[i];
}

void AdamOptimizer::update_psi(std::span<const double>) {
    const double deb = debias(beta2_, t_);
    for (std::size_t i = 0; i < v_.size(); ++i) {
        psi_[i] = std::sqrt(v_[i] / deb) + eps_;
    }
}

void AmsgradOptimizer::update_psi(std::span<const double>) {
    const double adj = std::sqrt(debias(beta2_, t_));
    for (std::size_t i = 0; i < v_.size(); ++i) {
        max_raw_[i] = std::max(max_raw_[i], std::sqrt(v_[i]) + eps_ * adj);
        psi_[i] = max_raw_[i] / adj;
    }
}

void AdaboundOptimizer::update_psi(std::span<const double>) {
    bounds_.validate(t_);
    const double deb = debias(beta2_, t_);
    const double lo = bounds_.lower(t_);
    const double hi = bounds_.upper(t_);
    for (std::size_t i = 0; i < v_.size(); ++i) {
        psi_[i] = std::clamp(std::sqrt(v_[i] / deb) + eps_, lo, hi);
    }
}

void AdabeliefOptimizer::update_psi(std::span<const double> g) {
    // The belief statistic accumulates squared residuals against the debiased
    // momentum read; the conventional (1-beta1^t) read is used regardless of
    // the paper_literal momentum convention.
    const double rdeb = debias(beta1_, t_);
    const double deb = debias(beta2_, t_);
    const double shift = eps_ / (1.0 - beta2_);
    for (std::size_t i = 0; i < s_.size(); ++i) {
        const double r = g[i] - m_[i] / rdeb;
        s_[i] = beta2_ * s_[i] + (1.0 - beta2_) * (r * r + shift);
        psi_[i] = std::sqrt(s_[i] / deb) + eps_;
    }
}

PadamOptimizer::PadamOptimizer(double beta1, double beta2, double eps, double p)
    : AdamFamilyBase(beta1, beta2, eps), p_(p) {
    if (!(p > 0.0) || p > 0.5) {
        throw std::invalid_argument("PadamOptimizer: p must lie in (0, 1/2]");
    }
}

void PadamOptimizer::update_psi(std::span<const double>) {
    const double deb = debias(beta2_, t_);
    for (std::size_t i = 0; i < v_.size(); ++i) {
        max_root_[i] = std::max(max_root_[i], std::sqrt(v_[i] / deb));
        psi_[i] = std::pow(max_root_[i] + eps_, 2.0 * p_);
    }
}

}  // namespace optlab
