#include "dcleo/oracle.hpp"

#include "dcleo/dispatch.hpp"
#include "dcleo/error.hpp"

#include <algorithm>
#include <stdexcept>

namespace dcleo {

void ConsumerModel::validate() const {
    const auto n = a0_true.size();
    if (a1_true.rows() != n || a1_true.cols() != n || noise_std.size() != n) {
        throw ValidationError("consumer model: a1, a0 and noise_std dimensions disagree");
    }
    if ((noise_std.array() < 0.0).any()) throw ValidationError("consumer model: noise_std must be >= 0");
    if (clip && clip_max.size() != n) throw ValidationError("consumer model: clip requires clip_max per DRP");
}

ConsumerModel default_consumer_model(const PowerSystem& sys, std::uint64_t seed) {
    const int n = sys.num_drps();
    ConsumerModel m;
    m.a1_true = 0.8 * Matrix::Identity(n, n);
    m.a0_true = Vector::Zero(n);
    m.noise_std = Vector(n);
    for (int j = 0; j < n; ++j) m.noise_std(j) = 0.02 * sys.drps[j].p_base;
    m.seed = seed;
    m.clip_max = dr_max(sys);
    return m;
}

ConsumerModel identity_consumer_model(const PowerSystem& sys, std::uint64_t seed) {
    const int n = sys.num_drps();
    ConsumerModel m;
    m.a1_true = Matrix::Identity(n, n);
    m.a0_true = Vector::Zero(n);
    m.noise_std = Vector::Zero(n);
    m.seed = seed;
    m.clip_max = dr_max(sys);
    return m;
}

ResponseOracle::ResponseOracle(ConsumerModel model) : model_(std::move(model)), rng_(model_.seed) {
    model_.validate();
}

Vector ResponseOracle::mean(const Vector& p_rd) const {
    return model_.a1_true.transpose() * p_rd + model_.a0_true;
}

Vector ResponseOracle::respond(const Vector& p_rd) {
    if (p_rd.size() != model_.a0_true.size()) throw std::invalid_argument("respond: p_rd has wrong length");
    Vector out = mean(p_rd);
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        // draw even when the std is zero so streams do not shift with the noise setting
        const double z = rng_.normal();
        out(j) += model_.noise_std(j) * z;
        if (model_.clip) out(j) = std::clamp(out(j), 0.0, model_.clip_max(j));
    }
    ++calls_;
    return out;
}

std::vector<ResponsePair> ResponseOracle::collect(std::span<const Vector> decisions) {
    if (decisions.empty()) throw std::invalid_argument("collect: decision list is empty");
    std::vector<ResponsePair> out;
    out.reserve(decisions.size());
    for (const auto& p : decisions) out.push_back({p, respond(p)});
    return out;
}

}  // namespace dcleo
