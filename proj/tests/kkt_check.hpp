#pragma once

#include <cmath>

#include "carboneq/lp_core.hpp"
#include "doctest.h"

inline void require_kkt(const carboneq::lp::Problem& p, const carboneq::lp::Solution& s) {
    REQUIRE(s.status == carboneq::lp::Status::Optimal);
    const auto k = carboneq::lp::check_kkt(p, s);
    CHECK(k.primal_infeasibility <= 1e-7);
    CHECK(k.dual_infeasibility <= 1e-7);
    CHECK(k.complementarity <= 1e-6);
    CHECK(k.duality_gap <= 1e-6 * (1.0 + std::abs(k.primal_objective)));
}
