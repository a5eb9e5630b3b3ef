// Affine-PSD feasibility at desk scale: Dykstra alternating projections
// between a closed-form affine projection and the product of PSD cones
// (with optional per-block trace caps), plus linear optimization by
// bisection on top of it. Deterministic: no randomness, fixed order.
#pragma once

#include <matmom/hermitian.hpp>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace matmom {

struct SpectrahedronBlock {
    std::string label;
    int size = 1;
    std::optional<double> trace_cap;
};

struct LinearTerm {
    int block;
    HermitianMatrix coeff;
};

struct Equality {
    std::vector<LinearTerm> terms;  // sum_b <coeff_b, X_b> = rhs
    double rhs = 0.0;
};

struct BlockSpectrahedron {
    std::vector<SpectrahedronBlock> blocks;
    std::vector<Equality> equalities;
};

enum class FeasStatus { feasible, infeasible, inconclusive };

struct FeasibilityResult {
    FeasStatus status = FeasStatus::inconclusive;
    std::vector<HermitianMatrix> solution;  // cone-exact blocks when feasible
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

namespace detail {

// Isometric real coordinates of a Hermitian block: <X, H_jk> in row-major
// (j,k) order, so Euclidean norms on coordinates equal Frobenius norms.
inline void to_coords(const HermitianMatrix& x, double* out) {
    const int q = x.q();
    const double s2 = std::sqrt(2.0);
    int m = 0;
    for (int j = 0; j < q; ++j)
        for (int k = 0; k < q; ++k, ++m) {
            if (j == k)
                out[m] = x(j, j).real();
            else if (j < k)
                out[m] = s2 * x(j, k).real();
            else
                out[m] = s2 * x(j, k).imag();
        }
}

inline HermitianMatrix from_coords(int q, const double* in) {
    const double r = 1.0 / std::sqrt(2.0);
    Mat m(q, q);
    int idx = 0;
    for (int j = 0; j < q; ++j)
        for (int k = 0; k < q; ++k, ++idx) {
            if (j == k)
                m(j, j) += in[idx];
            else if (j < k) {
                m(j, k) += r * in[idx];
                m(k, j) += r * in[idx];
            } else {
                m(j, k) += cplx(0.0, r * in[idx]);
                m(k, j) += cplx(0.0, -r * in[idx]);
            }
        }
    return HermitianMatrix(std::move(m));
}

// Euclidean projection of eigenvalues onto {l >= 0, sum l <= cap}.
inline void project_eigenvalues(std::vector<double>& lam, std::optional<double> cap) {
    for (double& l : lam) l = std::max(0.0, l);
    if (!cap) return;
    double total = 0.0;
    for (double l : lam) total += l;
    if (total <= *cap) return;
    // water-filling: l_i <- max(0, l_i - theta) with sum = cap
    std::vector<double> sorted = lam;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0;
    double theta = 0.0;
    for (size_t k = 0; k < sorted.size(); ++k) {
        cum += sorted[k];
        const double cand = (cum - *cap) / double(k + 1);
        if (k + 1 == sorted.size() || cand >= sorted[k + 1]) {
            theta = cand;
            break;
        }
    }
    for (double& l : lam) l = std::max(0.0, l - theta);
}

}  // namespace detail

class SpectrahedronSolver {
  public:
    SpectrahedronSolver(const BlockSpectrahedron& problem, const Tolerances& tol)
        : problem_(problem), tol_(tol) {
        offsets_.reserve(problem.blocks.size());
        int n = 0;
        for (const auto& b : problem.blocks) {
            offsets_.push_back(n);
            n += b.size * b.size;
        }
        n_ = n;
        m_ = int(problem.equalities.size());

        e_.assign(size_t(m_) * n_, 0.0);
        b_.assign(size_t(m_), 0.0);
        std::vector<double> buf;
        for (int r = 0; r < m_; ++r) {
            const auto& eq = problem.equalities[size_t(r)];
            for (const auto& term : eq.terms) {
                const auto& blk = problem.blocks[size_t(term.block)];
                if (term.coeff.q() != blk.size)
                    throw std::invalid_argument("SpectrahedronSolver: coefficient size mismatch");
                buf.resize(size_t(blk.size) * blk.size);
                detail::to_coords(term.coeff, buf.data());
                double* row = e_.data() + size_t(r) * n_;
                for (size_t i = 0; i < buf.size(); ++i)
                    row[size_t(offsets_[size_t(term.block)]) + i] += buf[i];
            }
            b_[size_t(r)] = eq.rhs;
            // scale the row once for conditioning and residual comparability
            double nrm = 0.0;
            double* row = e_.data() + size_t(r) * n_;
            for (int i = 0; i < n_; ++i) nrm += row[i] * row[i];
            nrm = std::sqrt(nrm);
            const double s = 1.0 / std::max(1.0, nrm);
            for (int i = 0; i < n_; ++i) row[i] *= s;
            b_[size_t(r)] *= s;
        }

        build_normal_inverse();
    }

    // Dykstra between the affine set {Ex = b} and the cone product.
    FeasibilityResult solve(double target_residual = -1.0,
                            const std::vector<double>* warm = nullptr) const {
        FeasibilityResult res;
        const double target = target_residual > 0 ? target_residual : tol_.feas_eps;

        if (structurally_inconsistent_) {
            res.status = FeasStatus::infeasible;
            res.residual = ls_residual_;
            return res;
        }

        std::vector<double> x = warm && int(warm->size()) == n_ ? *warm : least_squares_point_;
        std::vector<double> p(size_t(n_), 0.0);  // Dykstra correction for the cone
        std::vector<double> y(size_t(n_), 0.0);
        std::vector<double> best_y;
        double best_r = std::numeric_limits<double>::infinity();

        const int check_every = 8;
        const int window = 64;  // checks without relative progress before bailing
        int stall = 0;
        bool stalled = false;
        int it = 0;
        for (; it < tol_.max_iter; ++it) {
            for (int i = 0; i < n_; ++i) y[size_t(i)] = x[size_t(i)] + p[size_t(i)];
            project_cone(y);
            for (int i = 0; i < n_; ++i) p[size_t(i)] = x[size_t(i)] + p[size_t(i)] - y[size_t(i)];
            x = y;
            project_affine(x);

            if (it % check_every == 0) {
                const double r = residual(y);
                if (r < best_r * (1.0 - 1e-3)) {
                    stall = 0;
                } else {
                    ++stall;
                }
                if (r < best_r) {
                    best_r = r;
                    best_y = y;
                }
                if (r <= target) break;
                if (stall >= window) {
                    stalled = true;
                    break;
                }
            }
        }

        res.iterations = it;
        res.residual = best_r;
        if (best_r <= target) {
            res.status = FeasStatus::feasible;
            res.solution = blocks_from(best_y);
            for (const auto& blk : res.solution)
                if (lambda_min(blk) < -tol_.psd_eps)
                    throw SolverError("SpectrahedronSolver: cone projection left a negative block");
            return res;
        }
        // A flat plateau clearly above the target is read as a gap, i.e.
        // infeasible up to tolerance; anything still moving stays inconclusive.
        if (stalled && best_r > 10.0 * target)
            res.status = FeasStatus::infeasible;
        else
            res.status = FeasStatus::inconclusive;
        if (!best_y.empty()) res.solution = blocks_from(best_y);
        return res;
    }

    int coord_dim() const { return n_; }

    std::vector<double> coords_of(const std::vector<HermitianMatrix>& blocks) const {
        std::vector<double> x(size_t(n_), 0.0);
        for (size_t b = 0; b < blocks.size(); ++b)
            detail::to_coords(blocks[b], x.data() + offsets_[b]);
        return x;
    }

  private:
    void build_normal_inverse() {
        if (m_ == 0) {
            least_squares_point_.assign(size_t(n_), 0.0);
            return;
        }
        // G = E E^T, inverted spectrally (pseudo-inverse for redundant rows)
        Mat g(m_, m_);
        for (int r = 0; r < m_; ++r)
            for (int c = r; c < m_; ++c) {
                double s = 0.0;
                const double* rr = e_.data() + size_t(r) * n_;
                const double* rc = e_.data() + size_t(c) * n_;
                for (int i = 0; i < n_; ++i) s += rr[i] * rc[i];
                g(r, c) = s;
                g(c, r) = s;
            }
        const EigResult eg = eig_hermitian(HermitianMatrix(g));
        const double thr = 1e-12 * std::max(1.0, eg.values.front());
        ginv_ = Mat(m_, m_);
        for (int i = 0; i < m_; ++i) {
            if (eg.values[size_t(i)] <= thr) continue;
            const Vec v = eig_column(eg, i);
            for (int r = 0; r < m_; ++r)
                for (int c = 0; c < m_; ++c)
                    ginv_(r, c) +=
                        (1.0 / eg.values[size_t(i)]) * v[size_t(r)] * std::conj(v[size_t(c)]);
        }
        // minimal-norm solution of Ex = b and its residual
        least_squares_point_.assign(size_t(n_), 0.0);
        std::vector<double> gb(size_t(m_), 0.0);
        for (int r = 0; r < m_; ++r) {
            double s = 0.0;
            for (int c = 0; c < m_; ++c) s += ginv_(r, c).real() * b_[size_t(c)];
            gb[size_t(r)] = s;
        }
        for (int r = 0; r < m_; ++r) {
            const double* row = e_.data() + size_t(r) * n_;
            for (int i = 0; i < n_; ++i) least_squares_point_[size_t(i)] += row[i] * gb[size_t(r)];
        }
        ls_residual_ = residual(least_squares_point_);
        structurally_inconsistent_ = ls_residual_ > tol_.feas_eps;
    }

    void project_affine(std::vector<double>& x) const {
        if (m_ == 0) return;
        std::vector<double> r(size_t(m_), 0.0);
        for (int e = 0; e < m_; ++e) {
            const double* row = e_.data() + size_t(e) * n_;
            double s = -b_[size_t(e)];
            for (int i = 0; i < n_; ++i) s += row[i] * x[size_t(i)];
            r[size_t(e)] = s;
        }
        std::vector<double> gr(size_t(m_), 0.0);
        for (int e = 0; e < m_; ++e) {
            double s = 0.0;
            for (int c = 0; c < m_; ++c) s += ginv_(e, c).real() * r[size_t(c)];
            gr[size_t(e)] = s;
        }
        for (int e = 0; e < m_; ++e) {
            if (gr[size_t(e)] == 0.0) continue;
            const double* row = e_.data() + size_t(e) * n_;
            for (int i = 0; i < n_; ++i) x[size_t(i)] -= row[i] * gr[size_t(e)];
        }
    }

    void project_cone(std::vector<double>& x) const {
        for (size_t b = 0; b < problem_.blocks.size(); ++b) {
            const auto& blk = problem_.blocks[b];
            HermitianMatrix h = detail::from_coords(blk.size, x.data() + offsets_[b]);
            if (blk.size == 1) {
                std::vector<double> lam{h(0, 0).real()};
                detail::project_eigenvalues(lam, blk.trace_cap);
                x[size_t(offsets_[b])] = lam[0];
                continue;
            }
            EigResult e = eig_hermitian(h);
            detail::project_eigenvalues(e.values, blk.trace_cap);
            Mat rec(blk.size, blk.size);
            for (int k = 0; k < blk.size; ++k) {
                if (e.values[size_t(k)] == 0.0) continue;
                const Vec v = eig_column(e, k);
                for (int i = 0; i < blk.size; ++i)
                    for (int j = 0; j < blk.size; ++j)
                        rec(i, j) += e.values[size_t(k)] * v[size_t(i)] * std::conj(v[size_t(j)]);
            }
            detail::to_coords(hermitian_part(rec), x.data() + offsets_[b]);
        }
    }

    double residual(const std::vector<double>& x) const {
        double worst = 0.0;
        for (int e = 0; e < m_; ++e) {
            const double* row = e_.data() + size_t(e) * n_;
            double s = -b_[size_t(e)];
            for (int i = 0; i < n_; ++i) s += row[i] * x[size_t(i)];
            worst = std::max(worst, std::abs(s));
        }
        return worst;
    }

    std::vector<HermitianMatrix> blocks_from(const std::vector<double>& x) const {
        std::vector<HermitianMatrix> out;
        out.reserve(problem_.blocks.size());
        for (size_t b = 0; b < problem_.blocks.size(); ++b)
            out.push_back(detail::from_coords(problem_.blocks[b].size, x.data() + offsets_[b]));
        return out;
    }

    const BlockSpectrahedron problem_;
    Tolerances tol_;
    std::vector<int> offsets_;
    int n_ = 0, m_ = 0;
    std::vector<double> e_;
    std::vector<double> b_;
    Mat ginv_;
    std::vector<double> least_squares_point_;
    double ls_residual_ = 0.0;
    bool structurally_inconsistent_ = false;
};

inline FeasibilityResult feasibility(const BlockSpectrahedron& s, const Tolerances& tol,
                                     double target_residual = -1.0) {
    return SpectrahedronSolver(s, tol).solve(target_residual);
}

struct MaximizeResult {
    double value = 0.0;
    std::vector<HermitianMatrix> solution;
    bool conclusive = true;  // false when some bisection step was inconclusive
};

// Largest t with {<objective, X> = t + slack, slack >= 0} feasible, located by
// bisection; assumes the objective is nonnegative over the feasible set and
// bounded by upper_bound.
inline MaximizeResult maximize_linear(const BlockSpectrahedron& s,
                                      const std::vector<LinearTerm>& objective,
                                      double upper_bound, const Tolerances& tol) {
    {
        const FeasibilityResult base = feasibility(s, tol);
        if (base.status == FeasStatus::infeasible)
            throw std::domain_error("maximize_linear: base problem is infeasible");
    }

    BlockSpectrahedron aug = s;
    const int slack = int(aug.blocks.size());
    aug.blocks.push_back({"slack", 1, std::max(1.0, upper_bound)});
    Equality cut;
    cut.terms = objective;
    cut.terms.push_back({slack, -1.0 * HermitianMatrix::identity(1)});
    cut.rhs = 0.0;
    aug.equalities.push_back(cut);

    MaximizeResult out;
    double lo = 0.0, hi = upper_bound;
    const double gap = 1e-6 * std::max(1.0, upper_bound);
    std::vector<double> warm;

    auto try_level = [&](double t) {
        BlockSpectrahedron prob = aug;
        prob.equalities.back().rhs = t;
        SpectrahedronSolver solver(prob, tol);
        FeasibilityResult r = solver.solve(-1.0, warm.empty() ? nullptr : &warm);
        if (r.status == FeasStatus::feasible) {
            warm = solver.coords_of(r.solution);
            out.solution.assign(r.solution.begin(), r.solution.end() - 1);  // drop slack
        }
        return r.status;
    };

    if (try_level(hi) == FeasStatus::feasible) {
        out.value = hi;
        return out;
    }
    while (hi - lo > gap) {
        const double mid = 0.5 * (lo + hi);
        const FeasStatus st = try_level(mid);
        if (st == FeasStatus::feasible) {
            lo = mid;
        } else {
            if (st == FeasStatus::inconclusive) out.conclusive = false;
            hi = mid;
        }
    }
    if (out.solution.empty() && try_level(lo) != FeasStatus::feasible) {
        // objective floor: the zero level must be reachable for a bounded
        // nonnegative objective over a feasible set
        out.conclusive = false;
    }
    out.value = lo;
    return out;
}

}  // namespace matmom
