#pragma once

// Linear backward dynamics of a model under a fixed positional profile.
// Vectors are indexed by location; continuous entries are state, discrete
// entries are recomputed from them in increasing depth order.

#include <span>
#include <vector>

#include "ctmg/model.hpp"
#include "ctmg/solver.hpp"

namespace ctmg::detail {

/// Rows selected by a profile, one per location (nullptr if none).
using BoundRows = std::vector<const ActionRow*>;

class LinearDynamics {
public:
    explicit LinearDynamics(const CtmgModel& model);

    const CtmgModel& model() const noexcept { return model_; }
    std::size_t size() const noexcept { return model_.numLocations(); }

    BoundRows bind(const PositionalProfile& profile) const;

    /// Values at t_max: one on goals, zero elsewhere, discrete completed.
    void initialValues(std::span<double> v, const BoundRows& rows) const;

    /// Recomputes discrete entries (and pins frozen goals to one).
    void complete(std::span<double> v, const BoundRows& rows) const;

    /// d/ds of v where s = t_max - t. `v` must be completed; the discrete
    /// entries of `out` hold the derivative of the discrete values.
    void derivative(std::span<const double> v, const BoundRows& rows, std::span<double> out) const;

    /// Classical RK4 step of size h in s.
    void rk4(std::span<const double> v, double h, const BoundRows& rows, std::span<double> out) const;

private:
    const CtmgModel& model_;
    std::vector<LocationIndex> continuous_; // non-frozen continuous locations
    std::vector<LocationIndex> discrete_;   // non-frozen discrete, by depth
    std::vector<LocationIndex> frozen_;
    mutable std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

} // namespace ctmg::detail
