#pragma once

// Dense bounded-variable primal simplex.
//
// Problems are stated in maximize orientation:
//
//     max  c'x   s.t.  a_i'x {<=,=,>=} b_i,   l <= x <= u
//
// with l/u allowed to be -inf/+inf. Row duals are reported as dz*/db_i and
// reduced costs as c_j - y'A_j, so at an optimum a variable sitting at its
// upper bound has a nonnegative reduced cost.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace carboneq::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense : std::uint8_t { LessEqual, Equal, GreaterEqual };
enum class Status : std::uint8_t { Optimal, Infeasible, Unbounded };
enum class Direction : std::uint8_t { Minimize, Maximize };

const char* to_string(Status status) noexcept;

struct Problem {
    std::vector<double> objective;
    std::vector<double> lower;
    std::vector<double> upper;
    Eigen::MatrixXd matrix;  // rows x vars
    std::vector<Sense> senses;
    std::vector<double> rhs;

    std::size_t num_vars() const noexcept { return objective.size(); }
    std::size_t num_rows() const noexcept { return rhs.size(); }

    /// Throws DimensionMismatch on inconsistent sizes, inverted or NaN bounds.
    void check() const;

    /// Appends `coeffs'x (sense) rhs` as a new last row.
    void add_row(std::span<const double> coeffs, Sense sense, double rhs_value);
};

struct Tolerances {
    double feasibility = 1e-7;
    double optimality = 1e-6;  // objective slack that defines the optimal face
    double dual = 1e-9;        // reduced-cost threshold for pricing
    double pivot = 1e-9;
    int degenerate_streak = 50;  // switch to Bland's rule after this many
    int max_iterations = 200000;
    int refactor_interval = 100;
};

/// Position of each column (structurals first, then one logical per row).
enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

struct Basis {
    std::vector<VarStatus> status;
    bool empty() const noexcept { return status.empty(); }
};

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> primal;
    double objective = 0.0;
    std::vector<double> duals;
    std::vector<double> reduced_costs;
    /// Unbounded: improving primal ray. Infeasible: row weights of the
    /// phase-one multipliers (a Farkas-style witness). Empty otherwise.
    std::vector<double> certificate;
    double infeasibility = 0.0;  // phase-one residual when Infeasible
    Basis basis;
    int iterations = 0;
};

Solution solve(const Problem& problem, const Tolerances& tol = {}, const Basis* warm_start = nullptr);

/// Optimizes `secondary` over the face {x feasible : c'x >= primary_value - tol.optimality}.
/// The returned `objective` is the secondary objective value (in its own
/// orientation); duals cover the appended face row as their last entry.
/// `warm_start` may be a basis of the primary problem.
Solution solve_secondary(const Problem& problem, double primary_value, std::span<const double> secondary,
                         Direction direction, const Tolerances& tol = {}, const Basis* warm_start = nullptr);

/// The optimal face of `problem` stated as a problem of its own, using the
/// complementary-slackness characterization with the duals of `solution`:
/// variables whose reduced cost exceeds `threshold` in magnitude are fixed at
/// the bound it points to, and rows whose dual exceeds it become equalities.
Problem optimal_face(const Problem& problem, const Solution& solution, double threshold = 1e-9);

/// Karush-Kuhn-Tucker residuals of a (claimed) optimal primal/dual pair.
struct KktReport {
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    double complementarity = 0.0;
    double duality_gap = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
};

KktReport check_kkt(const Problem& problem, const Solution& solution);

}  // namespace carboneq::lp
