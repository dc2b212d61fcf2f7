#include "optlab/anon.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace optlab {

void MilestoneSchedule::validate() const {
    if (ratio < 2) throw std::invalid_argument("MilestoneSchedule: ratio must be >= 2");
}

std::vector<Milestone> milestone_indices(int ratio, std::int64_t horizon) {
    MilestoneSchedule{ratio}.validate();
    if (horizon < 1) throw std::invalid_argument("milestone_indices: horizon must be >= 1");
    std::vector<Milestone> out;
    std::int64_t t = 1, prev = 0;
    int k = 0;
    while (t <= horizon) {
        out.push_back({k, t, t - prev});
        prev = t;
        if (t > horizon / ratio) break;  // next power would overflow the horizon
        t *= ratio;
        ++k;
    }
    return out;
}

int segment_count(int ratio, std::int64_t t) {
    MilestoneSchedule{ratio}.validate();
    if (t < 1) throw std::domain_error("segment_count: t must be >= 1");
    int n = 0;
    for (std::int64_t a = 1; a <= t; a *= ratio) {
        ++n;
        if (a > t / ratio) break;
    }
    return n;
}

void IduConfig::validate() const {
    milestones.validate();
    if (!(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("IduConfig: beta2 must lie in [0,1)");
    }
    if (!(beta3 > 0.0 && beta3 < 1.0)) {
        throw std::invalid_argument("IduConfig: beta3 must lie in (0,1)");
    }
    if (epsilon < 0.0) throw std::invalid_argument("IduConfig: epsilon must be >= 0");
}

namespace {

// Streaming runs with a negative exponent need the shift; a zero-energy
// segment would otherwise produce an infinite scale. Batch evaluation for
// the metric is allowed to run at epsilon = 0.
void require_streaming_epsilon(const IduConfig& cfg) {
    if (cfg.epsilon == 0.0 && cfg.gamma < 0.0) {
        throw std::invalid_argument(
            "IduConfig: epsilon must be > 0 when gamma is negative");
    }
}

}  // namespace

std::vector<double> idu_weights(int segments, double beta3) {
    if (segments < 1) throw std::domain_error("idu_weights: need at least one segment");
    std::vector<double> w(static_cast<std::size_t>(segments));
    for (int j = 1; j <= segments; ++j) {
        const double decay = std::pow(beta3, static_cast<double>(segments - j));
        w[static_cast<std::size_t>(j - 1)] = decay * (j > 1 ? 1.0 - beta3 : 1.0);
    }
    return w;
}

double idu_fold(std::span<const double> segment_psis, double beta3) {
    if (segment_psis.empty()) throw std::domain_error("idu_fold: empty input");
    const auto w = idu_weights(static_cast<int>(segment_psis.size()), beta3);
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        acc += w[j] * segment_psis[j] * segment_psis[j];
    }
    return std::sqrt(acc);
}

double anon_psi_explicit(std::span<const double> history, const IduConfig& cfg) {
    if (history.empty()) throw std::domain_error("anon_psi_explicit: empty history");
    cfg.validate();
    const int r = cfg.milestones.ratio;
    const int segs = segment_count(r, static_cast<std::int64_t>(history.size()));
    const auto w = idu_weights(segs, cfg.beta3);
    double total = 0.0;
    std::int64_t lo = 0, hi = 1;  // segment (lo, hi]
    for (int j = 1; j <= segs; ++j) {
        double acc = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            const double x = history[static_cast<std::size_t>(i)];
            acc = cfg.beta2 * acc + (1.0 - cfg.beta2) * x * x;
        }
        const double deb = 1.0 - std::pow(cfg.beta2, static_cast<double>(hi - lo));
        // epsilon enters after the segment debias, mirroring the streaming rule
        const double sigma = acc / deb + cfg.epsilon;
        total += w[static_cast<std::size_t>(j - 1)] * std::pow(sigma, cfg.gamma);
        lo = hi;
        hi *= r;
    }
    return std::sqrt(total);
}

// ---------------------------------------------------------------------------
// AnonOptimizer (accumulator route)
// ---------------------------------------------------------------------------

AnonOptimizer::AnonOptimizer(const AnonConfig& cfg) : cfg_(cfg) {
    cfg_.idu.validate();
    require_streaming_epsilon(cfg_.idu);
    if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0)) {
        throw std::invalid_argument("AnonConfig: beta1 must lie in [0,1)");
    }
}

void AnonOptimizer::reset(std::size_t dim) {
    m_.assign(dim, 0.0);
    s_.assign(dim, 0.0);
    p_.assign(dim, 1.0);
    v_.assign(dim, 1.0);
    dir_.assign(dim, 0.0);
    psi_.assign(dim, 1.0);
    t_ = 0;
    k_ = -1;
    last_reset_ = 0;
    next_milestone_ = 1;
}

void AnonOptimizer::ingest(std::span<const double> g) {
    if (t_ == 0 && m_.size() != g.size()) reset(g.size());
    ++t_;
    if (t_ > next_milestone_) {
        throw std::logic_error("AnonOptimizer: milestone at t=" +
                               std::to_string(next_milestone_) + " was skipped");
    }
    const double b1 = cfg_.beta1, b2 = cfg_.idu.beta2;
    for (std::size_t i = 0; i < m_.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * g[i];
        s_[i] = b2 * s_[i] + (1.0 - b2) * g[i] * g[i];
    }
    if (t_ == next_milestone_) {
        ++k_;
        const std::int64_t seg_len = t_ - last_reset_;
        const double deb = 1.0 - std::pow(b2, static_cast<double>(seg_len));
        const double b3 = cfg_.idu.beta3;
        for (std::size_t i = 0; i < m_.size(); ++i) {
            const double sigma = s_[i] / deb + cfg_.idu.epsilon;
            const double sg = std::pow(sigma, cfg_.idu.gamma);
            p_[i] = (k_ == 0) ? sg : p_[i] + (1.0 - b3) * (sg - p_[i]);
            s_[i] = 0.0;
            v_[i] = std::pow(p_[i], -0.5);
            psi_[i] = 1.0 / v_[i];
        }
        last_reset_ = t_;
        next_milestone_ *= cfg_.idu.milestones.ratio;
    }
    const double bdeb = cfg_.paper_literal ? b2 : b1;
    const double mdeb = 1.0 - std::pow(bdeb, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
        dir_[i] = (m_[i] / mdeb) * v_[i];
    }
}

nlohmann::json AnonOptimizer::state_to_json() const {
    return nlohmann::json{
        {"t", t_},
        {"k", k_},
        {"last_reset", last_reset_},
        {"m", m_},
        {"s", s_},
        {"p", p_},
    };
}

void AnonOptimizer::state_from_json(const nlohmann::json& j) {
    t_ = j.at("t").get<std::int64_t>();
    k_ = j.at("k").get<int>();
    last_reset_ = j.at("last_reset").get<std::int64_t>();
    m_ = j.at("m").get<ParamVector>();
    s_ = j.at("s").get<ParamVector>();
    p_ = j.at("p").get<ParamVector>();
    const std::size_t dim = m_.size();
    if (s_.size() != dim || p_.size() != dim) {
        throw std::invalid_argument("AnonOptimizer: inconsistent snapshot dimensions");
    }
    v_.resize(dim);
    psi_.resize(dim);
    dir_.assign(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        v_[i] = std::pow(p_[i], -0.5);
        psi_[i] = 1.0 / v_[i];
    }
    next_milestone_ = 1;
    while (next_milestone_ <= last_reset_) {
        next_milestone_ *= cfg_.idu.milestones.ratio;
    }
}

// ---------------------------------------------------------------------------
// AnonAltOptimizer (per-step root route)
// ---------------------------------------------------------------------------

AnonAltOptimizer::AnonAltOptimizer(const AnonConfig& cfg) : cfg_(cfg) {
    cfg_.idu.validate();
    require_streaming_epsilon(cfg_.idu);
    if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0)) {
        throw std::invalid_argument("AnonConfig: beta1 must lie in [0,1)");
    }
}

void AnonAltOptimizer::reset(std::size_t dim) {
    m_.assign(dim, 0.0);
    s_.assign(dim, 0.0);
    acc_.assign(dim, 1.0);
    dir_.assign(dim, 0.0);
    psi_.assign(dim, 1.0);
    t_ = 0;
    k_ = -1;
    last_reset_ = 0;
    next_milestone_ = 1;
}

void AnonAltOptimizer::ingest(std::span<const double> g) {
    if (t_ == 0 && m_.size() != g.size()) reset(g.size());
    ++t_;
    if (t_ > next_milestone_) {
        throw std::logic_error("AnonAltOptimizer: milestone at t=" +
                               std::to_string(next_milestone_) + " was skipped");
    }
    const double b1 = cfg_.beta1, b2 = cfg_.idu.beta2;
    for (std::size_t i = 0; i < m_.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * g[i];
        s_[i] = b2 * s_[i] + (1.0 - b2) * g[i] * g[i];
    }
    if (t_ == next_milestone_) {
        ++k_;
        const std::int64_t seg_len = t_ - last_reset_;
        const double deb = 1.0 - std::pow(b2, static_cast<double>(seg_len));
        const double b3 = cfg_.idu.beta3;
        for (std::size_t i = 0; i < m_.size(); ++i) {
            const double sigma = s_[i] / deb + cfg_.idu.epsilon;
            const double sg = std::pow(sigma, cfg_.idu.gamma);
            acc_[i] = (k_ == 0) ? sg : b3 * acc_[i] + (1.0 - b3) * sg;
            s_[i] = 0.0;
        }
        last_reset_ = t_;
        next_milestone_ *= cfg_.idu.milestones.ratio;
    }
    const double bdeb = cfg_.paper_literal ? b2 : b1;
    const double mdeb = 1.0 - std::pow(bdeb, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
        const double root = std::sqrt(acc_[i]);
        psi_[i] = root;
        dir_[i] = m_[i] / mdeb / root;
    }
}

}  // namespace optlab
