#include "optlab/anon.hpp"
#include "optlab/core.hpp"
#include "optlab/preconditioners.hpp"

namespace optlab {

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const HyperParams& hp) {
    const double eps = hp.resolved_epsilon(kind);
    switch (kind) {
        case OptimizerKind::sgd:
            return std::make_unique<SgdOptimizer>();
        case OptimizerKind::sgdm:
            return std::make_unique<SgdmOptimizer>(hp.beta1, hp.sgdm_mode);
        case OptimizerKind::rmsprop:
            return std::make_unique<RmspropOptimizer>(hp.beta2, eps);
        case OptimizerKind::adam:
            return std::make_unique<AdamOptimizer>(hp.beta1, hp.beta2, eps,
                                                   hp.paper_literal);
        case OptimizerKind::amsgrad:
            return std::make_unique<AmsgradOptimizer>(hp.beta1, hp.beta2, eps,
                                                      hp.paper_literal);
        case OptimizerKind::adabound:
            return std::make_unique<AdaboundOptimizer>(hp.beta1, hp.beta2, eps,
                                                       hp.bound_scale);
        case OptimizerKind::adabelief:
            return std::make_unique<AdabeliefOptimizer>(hp.beta1, hp.beta2, eps,
                                                        hp.paper_literal);
        case OptimizerKind::padam:
            return std::make_unique<PadamOptimizer>(hp.beta1, hp.beta2, eps,
                                                    hp.padam_p);
        case OptimizerKind::anon: {
            AnonConfig cfg{{hp.gamma, hp.beta2, hp.beta3, eps, {hp.ratio}},
                           hp.beta1, hp.paper_literal};
            return std::make_unique<AnonOptimizer>(cfg);
        }
        case OptimizerKind::anon_alt: {
            AnonConfig cfg{{hp.gamma, hp.beta2, hp.beta3, eps, {hp.ratio}},
                           hp.beta1, hp.paper_literal};
            return std::make_unique<AnonAltOptimizer>(cfg);
        }
    }
    throw std::logic_error("make_optimizer: unknown kind");
}

}  // namespace optlab
