#pragma once

#include "dcleo/netmodel.hpp"
#include "dcleo/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dcleo {

/// Hidden consumer behaviour: realized = A1^T p + A0 + eps, eps ~ N(0, diag(noise_std^2)).
struct ConsumerModel {
    Matrix a1_true;
    Vector a0_true;
    Vector noise_std;
    std::uint64_t seed = 0;
    bool clip = false;
    Vector clip_max;  // upper clip bound per DRP (dr_max); used when clip is set

    void validate() const;
};

/// Default world: A1 = 0.8 I, A0 = 0, noise 2% of each DRP's baseline.
ConsumerModel default_consumer_model(const PowerSystem& sys, std::uint64_t seed);

/// Noise-free identity response, i.e. purely exogenous behaviour.
ConsumerModel identity_consumer_model(const PowerSystem& sys, std::uint64_t seed = 0);

/// One observed (accepted, realized) commitment pair.
struct ResponsePair {
    Vector p_rd;
    Vector p_rd_enu;
};

/// The environment the learner queries. Holds the RNG state, so one
/// instance per thread.
class ResponseOracle {
public:
    explicit ResponseOracle(ConsumerModel model);

    Vector respond(const Vector& p_rd);
    /// One respond() per decision, in order. Throws std::invalid_argument on an empty list.
    std::vector<ResponsePair> collect(std::span<const Vector> decisions);

    /// Noise-free expectation psi(p) (before clipping).
    Vector mean(const Vector& p_rd) const;

    const ConsumerModel& model() const { return model_; }
    std::size_t calls() const { return calls_; }

private:
    ConsumerModel model_;
    Rng rng_;
    std::size_t calls_ = 0;
};

}  // namespace dcleo
