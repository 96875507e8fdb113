#include "fig1.hpp"

namespace ctmg::testing {

CtmgModel fig1Model(GoalMode mode) {
    ModelBuilder b;
    b.timeBound(1.0).goalMode(mode);
    auto A = b.addLocation("A", LocationKind::Continuous, Player::Reachability);
    auto B = b.addLocation("B", LocationKind::Continuous, Player::Reachability);
    auto C = b.addLocation("C", LocationKind::Continuous, Player::Reachability, true);
    auto a = b.action("a");
    auto bb = b.action("b");
    b.setRate(A, a, B, 4.0).setRate(A, bb, C, 2.0).setRate(B, a, C, 4.0);
    if (mode == GoalMode::AtDeadline) b.setRate(C, a, C, 1.0);
    b.setInitial(A, 1.0);
    return b.build();
}

} // namespace ctmg::testing
