#include "dynamics.hpp"

namespace ctmg::detail {

LinearDynamics::LinearDynamics(const CtmgModel& model) : model_(model) {
    for (LocationIndex l = 0; l < model.numLocations(); ++l) {
        if (model.frozen(l))
            frozen_.push_back(l);
        else if (model.location(l).continuous())
            continuous_.push_back(l);
    }
    for (LocationIndex l : discreteEvaluationOrder(model))
        if (!model.frozen(l)) discrete_.push_back(l);
    const std::size_t n = model.numLocations();
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
}

BoundRows LinearDynamics::bind(const PositionalProfile& profile) const {
    BoundRows rows(model_.numLocations(), nullptr);
    for (LocationIndex l = 0; l < model_.numLocations(); ++l) {
        ActionIndex a = profile.choice.at(l);
        if (a != kNoAction) rows[l] = model_.row(l, a);
    }
    return rows;
}

void LinearDynamics::initialValues(std::span<double> v, const BoundRows& rows) const {
    for (LocationIndex l = 0; l < model_.numLocations(); ++l) v[l] = model_.location(l).goal ? 1.0 : 0.0;
    complete(v, rows);
}

void LinearDynamics::complete(std::span<double> v, const BoundRows& rows) const {
    for (LocationIndex l : frozen_) v[l] = 1.0;
    for (LocationIndex l : discrete_) {
        double acc = 0.0;
        if (const ActionRow* r = rows[l])
            for (const auto& t : r->entries) acc += t.value * v[t.target];
        v[l] = acc;
    }
}

void LinearDynamics::derivative(std::span<const double> v, const BoundRows& rows, std::span<double> out) const {
    for (LocationIndex l : frozen_) out[l] = 0.0;
    for (LocationIndex l : continuous_) {
        double acc = 0.0;
        if (const ActionRow* r = rows[l]) {
            const double here = v[l];
            for (const auto& t : r->entries) acc += t.value * (v[t.target] - here);
        }
        out[l] = acc;
    }
    for (LocationIndex l : discrete_) {
        double acc = 0.0;
        if (const ActionRow* r = rows[l])
            for (const auto& t : r->entries) acc += t.value * out[t.target];
        out[l] = acc;
    }
}

void LinearDynamics::rk4(std::span<const double> v, double h, const BoundRows& rows, std::span<double> out) const {
    const std::size_t n = v.size();
    derivative(v, rows, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = v[i] + 0.5 * h * k1_[i];
    complete(tmp_, rows);
    derivative(tmp_, rows, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = v[i] + 0.5 * h * k2_[i];
    complete(tmp_, rows);
    derivative(tmp_, rows, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = v[i] + h * k3_[i];
    complete(tmp_, rows);
    derivative(tmp_, rows, k4_);
    for (std::size_t i = 0; i < n; ++i) out[i] = v[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    complete(out, rows);
}

} // namespace ctmg::detail
