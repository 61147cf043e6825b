#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace carpet {

// Covering QP with 0/1 constraint rows:
//
//     minimize ½‖x‖²   subject to   Σ_{i∈S_p} x_i ≥ 1  for every stored row p.
//
// Solved by the Goldfarb–Idnani dual active-set method with G = I. Rows can
// be appended at any time and the solver resumes from its current active
// set, which is what column generation needs. Multipliers satisfy
// x = Σ_p u_p 1_{S_p} at every optimum.
class CoveringQP {
public:
    explicit CoveringQP(std::size_t dim) : n_(dim), x_(dim, 0.0), J_(dim * dim, 0.0), R_(dim * dim, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) J_[i * n_ + i] = 1.0;
    }

    [[nodiscard]] std::size_t dim() const noexcept { return n_; }
    [[nodiscard]] std::size_t row_count() const noexcept { return rows_.size(); }
    [[nodiscard]] std::span<const int> row(std::size_t p) const noexcept { return rows_[p]; }
    [[nodiscard]] const std::vector<double>& x() const noexcept { return x_; }
    [[nodiscard]] const std::vector<std::size_t>& active() const noexcept { return active_; }
    [[nodiscard]] const std::vector<double>& multipliers() const noexcept { return u_; }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }

    std::size_t add_row(std::vector<int> support) {
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        rows_.push_back(std::move(support));
        return rows_.size() - 1;
    }

    [[nodiscard]] double row_value(std::size_t p) const noexcept {
        double s = 0.0;
        for (int i : rows_[p]) s += x_[static_cast<std::size_t>(i)];
        return s;
    }

    // Runs until every stored row has value >= 1 - tol. Returns false if the
    // step budget ran out.
    bool solve(double tol = 1e-13, std::size_t max_steps = 50'000'000) {
        while (true) {
            std::size_t worst = rows_.size();
            double worst_s = -tol;
            for (std::size_t p = 0; p < rows_.size(); ++p) {
                if (is_active(p)) continue;
                const double s = row_value(p) - 1.0;
                if (s < worst_s) {
                    worst_s = s;
                    worst = p;
                }
            }
            if (worst == rows_.size()) return true;
            if (!enforce(worst, max_steps)) return false;
        }
    }

private:
    [[nodiscard]] double& J(std::size_t i, std::size_t k) noexcept { return J_[k * n_ + i]; }
    [[nodiscard]] double& R(std::size_t i, std::size_t k) noexcept { return R_[i * n_ + k]; }

    [[nodiscard]] bool is_active(std::size_t p) const noexcept {
        return std::find(active_.begin(), active_.end(), p) != active_.end();
    }

    // d = Jᵀ n_p for the sparse 0/1 row p.
    void project(std::size_t p, std::vector<double>& d) {
        d.assign(n_, 0.0);
        for (std::size_t k = 0; k < n_; ++k) {
            const double* col = &J_[k * n_];
            double s = 0.0;
            for (int i : rows_[p]) s += col[static_cast<std::size_t>(i)];
            d[k] = s;
        }
    }

    static void givens(double a, double b, double& c, double& s, double& h) noexcept {
        h = std::hypot(a, b);
        if (h == 0.0) {
            c = 1.0;
            s = 0.0;
            return;
        }
        c = a / h;
        s = b / h;
    }

    void rotate_J_columns(std::size_t a, std::size_t b, double c, double s) noexcept {
        for (std::size_t i = 0; i < n_; ++i) {
            double& ja = J(i, a);
            double& jb = J(i, b);
            const double ta = c * ja + s * jb;
            const double tb = -s * ja + c * jb;
            ja = ta;
            jb = tb;
        }
    }

    void add_to_active(std::size_t p, std::vector<double>& d) {
        const std::size_t q = active_.size();
        for (std::size_t j = n_ - 1; j > q; --j) {
            if (d[j] == 0.0) continue;
            double c, s, h;
            givens(d[j - 1], d[j], c, s, h);
            d[j - 1] = h;
            d[j] = 0.0;
            rotate_J_columns(j - 1, j, c, s);
        }
        if (d[q] < 0.0) {
            d[q] = -d[q];
            for (std::size_t i = 0; i < n_; ++i) J(i, q) = -J(i, q);
        }
        for (std::size_t i = 0; i <= q; ++i) R(i, q) = d[i];
        active_.push_back(p);
    }

    void drop_from_active(std::size_t l) {
        const std::size_t q = active_.size();
        for (std::size_t k = l; k + 1 < q; ++k)
            for (std::size_t i = 0; i <= k + 1; ++i) R(i, k) = R(i, k + 1);
        for (std::size_t i = 0; i < q; ++i) R(i, q - 1) = 0.0;
        // R is now upper Hessenberg from column l; restore triangularity.
        for (std::size_t j = l; j + 1 < q; ++j) {
            double c, s, h;
            givens(R(j, j), R(j + 1, j), c, s, h);
            for (std::size_t k = j; k + 1 < q; ++k) {
                const double a = R(j, k), b = R(j + 1, k);
                R(j, k) = c * a + s * b;
                R(j + 1, k) = -s * a + c * b;
            }
            R(j + 1, j) = 0.0;
            rotate_J_columns(j, j + 1, c, s);
            if (R(j, j) < 0.0) {
                for (std::size_t k = j; k + 1 < q; ++k) R(j, k) = -R(j, k);
                for (std::size_t i = 0; i < n_; ++i) J(i, j) = -J(i, j);
            }
        }
        active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(l));
        u_.erase(u_.begin() + static_cast<std::ptrdiff_t>(l));
    }

    // One outer Goldfarb–Idnani iteration: make row p active.
    bool enforce(std::size_t p, std::size_t max_steps) {
        std::vector<double> d, z(n_), r;
        double u_new = 0.0;
        const double support = static_cast<double>(rows_[p].size());
        while (true) {
            if (++steps_ > max_steps) return false;
            const std::size_t q = active_.size();
            project(p, d);
            std::fill(z.begin(), z.end(), 0.0);
            double zz = 0.0;
            for (std::size_t k = q; k < n_; ++k) {
                if (d[k] == 0.0) continue;
                zz += d[k] * d[k];
                for (std::size_t i = 0; i < n_; ++i) z[i] += J(i, k) * d[k];
            }
            // r = R⁻¹ d[0:q] by back substitution.
            r.assign(q, 0.0);
            for (std::size_t i = q; i-- > 0;) {
                double s = d[i];
                for (std::size_t k = i + 1; k < q; ++k) s -= R(i, k) * r[k];
                r[i] = s / R(i, i);
            }
            double t1 = std::numeric_limits<double>::infinity();
            std::size_t drop = q;
            for (std::size_t j = 0; j < q; ++j)
                if (r[j] > 1e-14) {
                    const double t = u_[j] / r[j];
                    if (t < t1) {
                        t1 = t;
                        drop = j;
                    }
                }
            const double slack = row_value(p) - 1.0;
            const bool full_possible = zz > 1e-14 * support;
            const double t2 = full_possible ? -slack / zz : std::numeric_limits<double>::infinity();
            if (!std::isfinite(t1) && !std::isfinite(t2)) return true;  // cannot happen for covering rows

            const double t = std::min(t1, t2);
            if (full_possible)
                for (std::size_t i = 0; i < n_; ++i) x_[i] += t * z[i];
            for (std::size_t j = 0; j < q; ++j) u_[j] -= t * r[j];
            u_new += t;
            if (t2 <= t1) {
                u_.push_back(u_new);
                add_to_active(p, d);
                return true;
            }
            u_[drop] = 0.0;
            drop_from_active(drop);
        }
    }

    std::size_t n_;
    std::vector<double> x_;
    std::vector<double> J_;  // column-major n×n, orthogonal
    std::vector<double> R_;  // row-major, leading q×q block upper triangular
    std::vector<std::vector<int>> rows_;
    std::vector<std::size_t> active_;
    std::vector<double> u_;
    std::size_t steps_ = 0;
};

}  // namespace carpet
