#pragma once

// Nash equilibrium with an endogenous average-carbon signal.
//
// A fixed point is a lambda for which the lambda-parameterized welfare
// optimum admits a solution whose ex-post average carbon equals lambda. The
// search is one-dimensional in lambda; every returned point is checked
// against each player's best response independently of the LP that built it.

#include <utility>
#include <vector>

#include "carboneq/clearing.hpp"
#include "carboneq/network.hpp"

namespace carboneq {

struct FixedPointOptions {
    double lambda_tol = 1e-6;
    double residual_tol = 1e-6;
    int max_iterations = 200;
    int scan_points = 64;
    lp::Tolerances lp;
};

struct ResidualReport {
    std::vector<double> generator_gaps;  // $, best-response value minus realized profit
    std::vector<double> consumer_gaps;   // $
    double transmission_gap = 0.0;       // $, over the whole transmission-owner problem
    double line_overload = 0.0;          // MW above the tightest limit; 0 when feasible
    std::vector<double> balance;         // MW per bus (one entry in pool mode)
    double carbon = 0.0;                 // |lambda * sum P_D - sum e_G P_G|, tons

    double max_player_gap() const;
    double max_balance() const;
    /// Gaps and balance within `tol`, carbon within tol * (1 + total_demand).
    bool passes(double tol, double total_demand) const;
};

struct TracePoint {
    double lambda = 0.0;
    double lambda_low = 0.0;
    double lambda_high = 0.0;
};

struct EquilibriumCertificate {
    ClearingSolution solution;
    double lambda_star = 0.0;
    ResidualReport residuals;
    bool converged = false;
    int iterations = 0;  // clearing evaluations
    std::vector<TracePoint> lambda_trace;
    /// Lambda intervals beyond the returned one that also bracket a fixed point.
    std::vector<std::pair<double, double>> other_brackets;
};

EquilibriumCertificate solve_equilibrium(const Network& network, const FixedPointOptions& options = {});

/// Pool mode is inferred from `candidate.angles` being empty.
ResidualReport verify_equilibrium(const Network& network, const ClearingSolution& candidate, double lambda_candidate);

struct BruteForceOptions {
    /// Consumption levels per consumer; empty means {d_min, d_max} for all.
    std::vector<std::vector<double>> levels;
    bool interior = true;  // also solve each consumer's 1-D indifference condition
    std::size_t budget = 4096;  // maximum number of profiles
    double residual_tol = 1e-6;
    lp::Tolerances lp;
};

std::vector<EquilibriumCertificate> brute_force_equilibrium(const Network& network,
                                                            const BruteForceOptions& options = {});

}  // namespace carboneq
