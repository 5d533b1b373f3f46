#include "carboneq/lp_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "carboneq/errors.hpp"

namespace carboneq::lp {

const char* to_string(Status status) noexcept {
    switch (status) {
        case Status::Optimal: return "Optimal";
        case Status::Infeasible: return "Infeasible";
        case Status::Unbounded: return "Unbounded";
    }
    return "?";
}

void Problem::check() const {
    const auto n = objective.size();
    const auto m = rhs.size();
    if (lower.size() != n || upper.size() != n)
        throw DimensionMismatch("bound vectors must match the objective length " + std::to_string(n));
    if (senses.size() != m)
        throw DimensionMismatch("senses must match the rhs length " + std::to_string(m));
    if (static_cast<std::size_t>(matrix.rows()) != m || static_cast<std::size_t>(matrix.cols()) != n)
        throw DimensionMismatch("constraint matrix is " + std::to_string(matrix.rows()) + "x" +
                                std::to_string(matrix.cols()) + ", expected " + std::to_string(m) + "x" +
                                std::to_string(n));
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInf ||
            upper[j] == -kInf)
            throw DimensionMismatch("invalid bounds on variable " + std::to_string(j));
        if (!std::isfinite(objective[j]))
            throw DimensionMismatch("non-finite objective coefficient on variable " + std::to_string(j));
    }
    for (std::size_t i = 0; i < m; ++i)
        if (!std::isfinite(rhs[i])) throw DimensionMismatch("non-finite rhs on row " + std::to_string(i));
    if (!matrix.allFinite()) throw DimensionMismatch("non-finite constraint coefficient");
}

void Problem::add_row(std::span<const double> coeffs, Sense sense, double rhs_value) {
    if (coeffs.size() != num_vars()) throw DimensionMismatch("appended row has wrong length");
    const auto m = matrix.rows();
    matrix.conservativeResize(m + 1, static_cast<Eigen::Index>(num_vars()));
    for (std::size_t j = 0; j < coeffs.size(); ++j) matrix(m, static_cast<Eigen::Index>(j)) = coeffs[j];
    senses.push_back(sense);
    rhs.push_back(rhs_value);
}

namespace {

// Columns are the n structurals followed by one logical r_i = a_i'x per row,
// so the working system is [A  -I] (x, r) = 0 with all bounds on (x, r).
class Simplex {
public:
    Simplex(const Problem& problem, const Tolerances& tol)
        : p_(problem),
          tol_(tol),
          n_(static_cast<int>(problem.num_vars())),
          m_(static_cast<int>(problem.num_rows())),
          total_(n_ + m_) {
        lo_.resize(total_);
        up_.resize(total_);
        cost_.assign(total_, 0.0);
        for (int j = 0; j < n_; ++j) {
            lo_[j] = p_.lower[j];
            up_[j] = p_.upper[j];
            cost_[j] = p_.objective[j];
        }
        for (int i = 0; i < m_; ++i) {
            const double b = p_.rhs[i];
            switch (p_.senses[i]) {
                case Sense::LessEqual: lo_[n_ + i] = -kInf; up_[n_ + i] = b; break;
                case Sense::GreaterEqual: lo_[n_ + i] = b; up_[n_ + i] = kInf; break;
                case Sense::Equal: lo_[n_ + i] = b; up_[n_ + i] = b; break;
            }
        }
    }

    Solution run(const Basis* warm) {
        if (!(warm && load_basis(*warm) && refactor())) {
            cold_basis();
            if (!refactor()) throw NumericalBreakdown("slack basis is singular");
        }
        compute_basic_values();
        return iterate();
    }

private:
    void cold_basis() {
        status_.assign(total_, VarStatus::AtLower);
        x_ = Eigen::VectorXd::Zero(total_);
        for (int j = 0; j < n_; ++j) place_nonbasic(j);
        head_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            head_[i] = n_ + i;
            status_[n_ + i] = VarStatus::Basic;
        }
    }

    void place_nonbasic(int j) {
        if (std::isfinite(lo_[j])) {
            status_[j] = VarStatus::AtLower;
            x_[j] = lo_[j];
        } else if (std::isfinite(up_[j])) {
            status_[j] = VarStatus::AtUpper;
            x_[j] = up_[j];
        } else {
            status_[j] = VarStatus::FreeZero;
            x_[j] = 0.0;
        }
    }

    bool load_basis(const Basis& basis) {
        if (static_cast<int>(basis.status.size()) != total_) return false;
        status_ = basis.status;
        x_ = Eigen::VectorXd::Zero(total_);
        head_.clear();
        for (int j = 0; j < total_; ++j) {
            switch (status_[j]) {
                case VarStatus::Basic: head_.push_back(j); break;
                case VarStatus::AtLower:
                    if (std::isfinite(lo_[j])) x_[j] = lo_[j];
                    else place_nonbasic(j);
                    break;
                case VarStatus::AtUpper:
                    if (std::isfinite(up_[j])) x_[j] = up_[j];
                    else place_nonbasic(j);
                    break;
                case VarStatus::FreeZero: place_nonbasic(j); break;
            }
        }
        return static_cast<int>(head_.size()) == m_;
    }

    bool refactor() {
        if (m_ == 0) {
            binv_.resize(0, 0);
            since_refactor_ = 0;
            return true;
        }
        Eigen::MatrixXd b(m_, m_);
        for (int r = 0; r < m_; ++r) {
            const int j = head_[r];
            if (j < n_) {
                b.col(r) = p_.matrix.col(j);
            } else {
                b.col(r).setZero();
                b(j - n_, r) = -1.0;
            }
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
        const auto diag = lu.matrixLU().diagonal().cwiseAbs();
        if (diag.minCoeff() <= 1e-11 * std::max(1.0, diag.maxCoeff())) return false;
        binv_ = lu.inverse();
        since_refactor_ = 0;
        return true;
    }

    void compute_basic_values() {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
        for (int j = 0; j < n_; ++j)
            if (status_[j] != VarStatus::Basic && x_[j] != 0.0) rhs -= p_.matrix.col(j) * x_[j];
        for (int i = 0; i < m_; ++i)
            if (status_[n_ + i] != VarStatus::Basic) rhs[i] += x_[n_ + i];
        const Eigen::VectorXd xb = binv_ * rhs;
        for (int r = 0; r < m_; ++r) x_[head_[r]] = xb[r];
    }

    double violation(int j) const {
        if (x_[j] < lo_[j]) return lo_[j] - x_[j];
        if (x_[j] > up_[j]) return x_[j] - up_[j];
        return 0.0;
    }

    double max_violation() const {
        double v = 0.0;
        for (int r = 0; r < m_; ++r) v = std::max(v, violation(head_[r]));
        return v;
    }

    double total_violation() const {
        double v = 0.0;
        for (int r = 0; r < m_; ++r) v += violation(head_[r]);
        return v;
    }

    // Simplex multipliers for the current phase's costs.
    Eigen::VectorXd multipliers(bool phase_one) const {
        Eigen::VectorXd cb(m_);
        for (int r = 0; r < m_; ++r) {
            const int j = head_[r];
            if (phase_one) {
                if (x_[j] < lo_[j] - tol_.feasibility) cb[r] = 1.0;
                else if (x_[j] > up_[j] + tol_.feasibility) cb[r] = -1.0;
                else cb[r] = 0.0;
            } else {
                cb[r] = cost_[j];
            }
        }
        return binv_.transpose() * cb;
    }

    Eigen::VectorXd reduced_costs(const Eigen::VectorXd& pi, bool phase_one) const {
        Eigen::VectorXd d(total_);
        if (n_ > 0) {
            d.head(n_) = -(p_.matrix.transpose() * pi);
            if (!phase_one)
                for (int j = 0; j < n_; ++j) d[j] += cost_[j];
        }
        for (int i = 0; i < m_; ++i) d[n_ + i] = pi[i];
        return d;
    }

    bool eligible(int j, double dj) const {
        switch (status_[j]) {
            case VarStatus::Basic: return false;
            case VarStatus::AtLower: return dj > tol_.dual && up_[j] > lo_[j];
            case VarStatus::AtUpper: return dj < -tol_.dual && up_[j] > lo_[j];
            case VarStatus::FreeZero: return std::abs(dj) > tol_.dual;
        }
        return false;
    }

    int choose_entering(const Eigen::VectorXd& d, bool bland) const {
        int best = -1;
        double best_score = 0.0;
        for (int j = 0; j < total_; ++j) {
            if (!eligible(j, d[j])) continue;
            if (bland) return j;
            const double score = std::abs(d[j]);
            if (score > best_score) {
                best = j;
                best_score = score;
            }
        }
        return best;
    }

    Eigen::VectorXd column_ftran(int j) const {
        if (j < n_) return binv_ * p_.matrix.col(j);
        return -binv_.col(j - n_);
    }

    struct Ratio {
        int row = -1;  // -1: bound flip or unbounded
        double step = kInf;
        bool to_upper = false;
    };

    // Limit imposed by basic row r moving at `rate` per unit step, honouring
    // the phase-one convention that infeasible variables only block once they
    // reach the violated bound. Returns +inf when unrestricted.
    double row_limit(int r, double rate, double slack, bool& to_upper) const {
        const int j = head_[r];
        const double xv = x_[j];
        if (rate > 0.0) {
            if (xv < lo_[j] - tol_.feasibility) {
                to_upper = false;
                return (lo_[j] - xv + slack) / rate;
            }
            if (xv > up_[j] + tol_.feasibility || !std::isfinite(up_[j])) return kInf;
            to_upper = true;
            return (up_[j] - xv + slack) / rate;
        }
        if (xv > up_[j] + tol_.feasibility) {
            to_upper = true;
            return (xv - up_[j] + slack) / -rate;
        }
        if (xv < lo_[j] - tol_.feasibility || !std::isfinite(lo_[j])) return kInf;
        to_upper = false;
        return (xv - lo_[j] + slack) / -rate;
    }

    Ratio ratio_test(const Eigen::VectorXd& alpha, double dir, bool bland) const {
        Ratio best;
        if (!bland) {
            // Harris two-pass: bound the step with relaxed bounds, then take
            // the largest pivot among rows that block within that step.
            double relaxed = kInf;
            for (int r = 0; r < m_; ++r) {
                if (std::abs(alpha[r]) <= tol_.pivot) continue;
                bool up = false;
                relaxed = std::min(relaxed, row_limit(r, -dir * alpha[r], tol_.feasibility, up));
            }
            if (!std::isfinite(relaxed)) return best;
            double best_pivot = 0.0;
            for (int r = 0; r < m_; ++r) {
                if (std::abs(alpha[r]) <= tol_.pivot) continue;
                bool up = false;
                const double lim = row_limit(r, -dir * alpha[r], 0.0, up);
                if (lim <= relaxed && std::abs(alpha[r]) > best_pivot) {
                    best_pivot = std::abs(alpha[r]);
                    best.row = r;
                    best.step = std::max(lim, 0.0);
                    best.to_upper = up;
                }
            }
            return best;
        }
        for (int r = 0; r < m_; ++r) {
            if (std::abs(alpha[r]) <= tol_.pivot) continue;
            bool up = false;
            const double lim = std::max(row_limit(r, -dir * alpha[r], 0.0, up), 0.0);
            if (lim < best.step || (lim == best.step && best.row >= 0 && head_[r] < head_[best.row])) {
                best.row = r;
                best.step = lim;
                best.to_upper = up;
            }
        }
        return best;
    }

    void pivot(int q, double dir, const Eigen::VectorXd& alpha, const Ratio& ratio) {
        const double step = ratio.step;
        if (step != 0.0) {
            x_[q] += dir * step;
            for (int r = 0; r < m_; ++r) x_[head_[r]] -= dir * step * alpha[r];
        }
        if (ratio.row < 0) {  // bound flip
            status_[q] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
            x_[q] = dir > 0 ? up_[q] : lo_[q];
            return;
        }
        const int r = ratio.row;
        const int leaving = head_[r];
        if (lo_[leaving] == up_[leaving] || !ratio.to_upper) {
            status_[leaving] = VarStatus::AtLower;
            x_[leaving] = lo_[leaving];
        } else {
            status_[leaving] = VarStatus::AtUpper;
            x_[leaving] = up_[leaving];
        }
        head_[r] = q;
        status_[q] = VarStatus::Basic;

        const Eigen::RowVectorXd pivot_row = binv_.row(r) / alpha[r];
        binv_.noalias() -= alpha * pivot_row;
        binv_.row(r) = pivot_row;
        if (++since_refactor_ >= tol_.refactor_interval) {
            if (!refactor()) throw NumericalBreakdown("basis became singular during refactorization");
            compute_basic_values();
        }
    }

    Solution iterate() {
        int degenerate = 0;
        int verifications = 0;
        for (;;) {
            if (iterations_ >= tol_.max_iterations)
                throw NumericalBreakdown("simplex iteration limit reached (" + std::to_string(iterations_) + ")");
            const bool phase_one = max_violation() > tol_.feasibility;
            const Eigen::VectorXd pi = multipliers(phase_one);
            const Eigen::VectorXd d = reduced_costs(pi, phase_one);
            const bool bland = degenerate >= tol_.degenerate_streak;
            const int q = choose_entering(d, bland);

            if (q < 0) {
                // Re-derive the iterate from a fresh factorization before
                // trusting the termination test.
                if (since_refactor_ > 0 && verifications < 5) {
                    ++verifications;
                    if (!refactor()) throw NumericalBreakdown("basis is singular at termination");
                    compute_basic_values();
                    continue;
                }
                if (phase_one) return infeasible(pi);
                return optimal();
            }

            const double dir = (status_[q] == VarStatus::AtUpper || (status_[q] == VarStatus::FreeZero && d[q] < 0))
                                   ? -1.0
                                   : 1.0;
            const Eigen::VectorXd alpha = column_ftran(q);
            Ratio ratio = ratio_test(alpha, dir, bland);
            const double flip = up_[q] - lo_[q];
            if (flip <= ratio.step) {
                ratio.row = -1;
                ratio.step = flip;
            }
            if (!std::isfinite(ratio.step)) {
                if (phase_one) throw NumericalBreakdown("phase-one ratio test found no blocking variable");
                return unbounded(q, dir, alpha);
            }
            degenerate = ratio.step <= 1e-12 ? degenerate + 1 : 0;
            pivot(q, dir, alpha, ratio);
            ++iterations_;
        }
    }

    Solution base_solution(Status status) const {
        Solution s;
        s.status = status;
        s.primal.assign(x_.data(), x_.data() + n_);
        s.basis.status = status_;
        s.iterations = iterations_;
        return s;
    }

    Solution optimal() const {
        Solution s = base_solution(Status::Optimal);
        const Eigen::VectorXd pi = multipliers(false);
        const Eigen::VectorXd d = reduced_costs(pi, false);
        s.duals.assign(pi.data(), pi.data() + m_);
        s.reduced_costs.assign(d.data(), d.data() + n_);
        double obj = 0.0;
        for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
        s.objective = obj;
        return s;
    }

    Solution infeasible(const Eigen::VectorXd& pi) const {
        Solution s = base_solution(Status::Infeasible);
        s.certificate.assign(pi.data(), pi.data() + m_);
        s.infeasibility = total_violation();
        return s;
    }

    Solution unbounded(int q, double dir, const Eigen::VectorXd& alpha) const {
        Solution s = base_solution(Status::Unbounded);
        Eigen::VectorXd ray = Eigen::VectorXd::Zero(total_);
        ray[q] = dir;
        for (int r = 0; r < m_; ++r) ray[head_[r]] = -dir * alpha[r];
        s.certificate.assign(ray.data(), ray.data() + n_);
        s.objective = kInf;
        return s;
    }

    const Problem& p_;
    Tolerances tol_;
    int n_;
    int m_;
    int total_;
    std::vector<double> lo_, up_, cost_;
    std::vector<int> head_;
    std::vector<VarStatus> status_;
    Eigen::VectorXd x_;
    Eigen::MatrixXd binv_;
    int iterations_ = 0;
    int since_refactor_ = 0;
};

}  // namespace

Solution solve(const Problem& problem, const Tolerances& tol, const Basis* warm_start) {
    problem.check();
    Simplex simplex(problem, tol);
    return simplex.run(warm_start);
}

Solution solve_secondary(const Problem& problem, double primary_value, std::span<const double> secondary,
                         Direction direction, const Tolerances& tol, const Basis* warm_start) {
    if (secondary.size() != problem.num_vars())
        throw DimensionMismatch("secondary objective has length " + std::to_string(secondary.size()) +
                                ", expected " + std::to_string(problem.num_vars()));
    Problem face = problem;
    face.add_row(problem.objective, Sense::GreaterEqual, primary_value - tol.optimality);
    const double sign = direction == Direction::Maximize ? 1.0 : -1.0;
    for (std::size_t j = 0; j < secondary.size(); ++j) face.objective[j] = sign * secondary[j];

    Basis warm;
    if (warm_start && warm_start->status.size() == problem.num_vars() + problem.num_rows()) {
        warm.status = warm_start->status;
        warm.status.push_back(VarStatus::Basic);
    } else if (warm_start && warm_start->status.size() == face.num_vars() + face.num_rows()) {
        warm = *warm_start;
    }
    Solution s = solve(face, tol, warm.empty() ? nullptr : &warm);
    if (s.status == Status::Optimal) {
        s.objective *= sign;
        for (auto& y : s.duals) y *= sign;
        for (auto& z : s.reduced_costs) z *= sign;
    }
    return s;
}

Problem optimal_face(const Problem& problem, const Solution& solution, double threshold) {
    if (solution.status != Status::Optimal) throw DimensionMismatch("optimal face needs an optimal solution");
    if (solution.reduced_costs.size() != problem.num_vars() || solution.duals.size() != problem.num_rows())
        throw DimensionMismatch("solution does not match problem dimensions");
    Problem face = problem;
    for (std::size_t j = 0; j < face.num_vars(); ++j) {
        const double d = solution.reduced_costs[j];
        if (d > threshold && std::isfinite(face.upper[j])) face.lower[j] = face.upper[j];
        else if (d < -threshold && std::isfinite(face.lower[j])) face.upper[j] = face.lower[j];
    }
    for (std::size_t i = 0; i < face.num_rows(); ++i) {
        const double y = solution.duals[i];
        if ((face.senses[i] == Sense::LessEqual && y > threshold) ||
            (face.senses[i] == Sense::GreaterEqual && y < -threshold))
            face.senses[i] = Sense::Equal;
    }
    return face;
}

KktReport check_kkt(const Problem& problem, const Solution& solution) {
    KktReport rep;
    const auto n = problem.num_vars();
    const auto m = problem.num_rows();
    const auto& x = solution.primal;
    const auto& y = solution.duals;
    if (x.size() != n || y.size() != m) throw DimensionMismatch("solution does not match problem dimensions");

    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n));
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(m));
    const Eigen::VectorXd activity = problem.matrix * xv;
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(problem.objective.data(), static_cast<Eigen::Index>(n)) -
                              problem.matrix.transpose() * yv;

    for (std::size_t j = 0; j < n; ++j) {
        rep.primal_infeasibility = std::max({rep.primal_infeasibility, problem.lower[j] - x[j], x[j] - problem.upper[j]});
        rep.primal_objective += problem.objective[j] * x[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double r = activity[static_cast<Eigen::Index>(i)] - problem.rhs[i];
        switch (problem.senses[i]) {
            case Sense::LessEqual:
                rep.primal_infeasibility = std::max(rep.primal_infeasibility, r);
                rep.dual_infeasibility = std::max(rep.dual_infeasibility, -y[i]);
                break;
            case Sense::GreaterEqual:
                rep.primal_infeasibility = std::max(rep.primal_infeasibility, -r);
                rep.dual_infeasibility = std::max(rep.dual_infeasibility, y[i]);
                break;
            case Sense::Equal:
                rep.primal_infeasibility = std::max(rep.primal_infeasibility, std::abs(r));
                break;
        }
        rep.complementarity = std::max(rep.complementarity, std::abs(y[i] * r));
        rep.dual_objective += y[i] * problem.rhs[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double zj = z[static_cast<Eigen::Index>(j)];
        if (zj > 0.0) {
            if (std::isfinite(problem.upper[j])) {
                rep.complementarity = std::max(rep.complementarity, zj * (problem.upper[j] - x[j]));
                rep.dual_objective += zj * problem.upper[j];
            } else {
                rep.dual_infeasibility = std::max(rep.dual_infeasibility, zj);
            }
        } else if (zj < 0.0) {
            if (std::isfinite(problem.lower[j])) {
                rep.complementarity = std::max(rep.complementarity, -zj * (x[j] - problem.lower[j]));
                rep.dual_objective += zj * problem.lower[j];
            } else {
                rep.dual_infeasibility = std::max(rep.dual_infeasibility, -zj);
            }
        }
    }
    rep.primal_infeasibility = std::max(rep.primal_infeasibility, 0.0);
    rep.duality_gap = std::abs(rep.primal_objective - rep.dual_objective);
    return rep;
}

}  // namespace carboneq::lp
