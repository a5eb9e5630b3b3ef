// Membership in the pointwise-PSD cone, strict-positivity certification by
// minimizing Lambda over the trace-normalized slice of that cone, measure
// construction for feasible functionals, and the atom-augmentation bound.
#pragma once

#include <matmom/tchakaloff.hpp>

namespace matmom {

enum class Tri { yes, no, unknown };

struct PositivityReport {
    Tri strictly_positive = Tri::unknown;
    double margin = 0.0;  // attained minimum of Lambda over the slice
    std::optional<std::vector<double>> witness;  // coefficients, when not strict
    bool slice_empty = false;  // the cone is trivial; positivity is vacuous
};

inline bool is_in_cone(const std::vector<double>& coeffs, const MatrixSpace& space,
                       const PointSet& pts, const Tolerances& tol) {
    for (int p = 0; p < pts.size(); ++p)
        if (!is_psd(space.eval(coeffs, p), tol)) return false;
    return true;
}

namespace detail {

// The evaluation map T: coefficients -> tuple of per-point tables, as a dense
// real matrix in the isometric block coordinates.
struct EvaluationMap {
    int dim = 0;      // coefficient dimension
    int tuple = 0;    // q^2 * #points
    std::vector<double> t;  // tuple x dim, column-major by coefficient

    static EvaluationMap build(const MatrixSpace& space, const PointSet& pts) {
        EvaluationMap em;
        em.dim = space.dim();
        const int q = space.q();
        em.tuple = pts.size() * q * q;
        em.t.assign(size_t(em.tuple) * em.dim, 0.0);
        std::vector<double> buf(size_t(q) * q);
        for (int b = 0; b < em.dim; ++b)
            for (int p = 0; p < pts.size(); ++p) {
                to_coords(space[b].table[size_t(p)], buf.data());
                for (int i = 0; i < q * q; ++i)
                    em.t[size_t(b) * em.tuple + size_t(p) * q * q + size_t(i)] = buf[size_t(i)];
            }
        return em;
    }

    std::vector<double> apply(const std::vector<double>& c) const {
        std::vector<double> out(static_cast<size_t>(tuple), 0.0);
        for (int b = 0; b < dim; ++b) {
            if (c[size_t(b)] == 0.0) continue;
            const double* col = t.data() + size_t(b) * tuple;
            for (int i = 0; i < tuple; ++i) out[size_t(i)] += c[size_t(b)] * col[i];
        }
        return out;
    }

    // least-squares preimage via the (dim x dim) normal equations
    std::vector<double> preimage(const std::vector<double>& g, const Tolerances& tol) const {
        Mat gram(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
                double s = 0.0;
                const double* ci = t.data() + size_t(i) * tuple;
                const double* cj = t.data() + size_t(j) * tuple;
                for (int r = 0; r < tuple; ++r) s += ci[r] * cj[r];
                gram(i, j) = s;
                gram(j, i) = s;
            }
        std::vector<double> rhs(static_cast<size_t>(dim), 0.0);
        for (int i = 0; i < dim; ++i) {
            const double* ci = t.data() + size_t(i) * tuple;
            double s = 0.0;
            for (int r = 0; r < tuple; ++r) s += ci[r] * g[size_t(r)];
            rhs[size_t(i)] = s;
        }
        const Mat ginv = pinv(HermitianMatrix(gram), tol);
        std::vector<double> c(static_cast<size_t>(dim), 0.0);
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += ginv(i, j).real() * rhs[size_t(j)];
            c[size_t(i)] = s;
        }
        return c;
    }

    // orthonormal basis of range(T)^perp in tuple coordinates
    std::vector<std::vector<double>> range_complement(const Tolerances& tol) const {
        // orthonormalize the columns, then complement the coordinate frame
        std::vector<std::vector<double>> range;
        for (int b = 0; b < dim; ++b) {
            std::vector<double> v(t.begin() + size_t(b) * tuple,
                                  t.begin() + size_t(b + 1) * tuple);
            for (const auto& r : range) {
                double d = 0.0;
                for (int i = 0; i < tuple; ++i) d += v[size_t(i)] * r[size_t(i)];
                for (int i = 0; i < tuple; ++i) v[size_t(i)] -= d * r[size_t(i)];
            }
            double n2 = 0.0;
            for (double x : v) n2 += x * x;
            if (std::sqrt(n2) <= tol.rank_eps) continue;
            const double inv = 1.0 / std::sqrt(n2);
            for (double& x : v) x *= inv;
            range.push_back(std::move(v));
        }
        std::vector<std::vector<double>> comp;
        for (int i = 0; i < tuple && int(comp.size()) < tuple - int(range.size()); ++i) {
            std::vector<double> v(static_cast<size_t>(tuple), 0.0);
            v[size_t(i)] = 1.0;
            for (const auto& r : range) {
                double d = 0.0;
                for (int k = 0; k < tuple; ++k) d += v[size_t(k)] * r[size_t(k)];
                for (int k = 0; k < tuple; ++k) v[size_t(k)] -= d * r[size_t(k)];
            }
            for (const auto& r : comp) {
                double d = 0.0;
                for (int k = 0; k < tuple; ++k) d += v[size_t(k)] * r[size_t(k)];
                for (int k = 0; k < tuple; ++k) v[size_t(k)] -= d * r[size_t(k)];
            }
            double n2 = 0.0;
            for (double x : v) n2 += x * x;
            if (std::sqrt(n2) <= 1e-8) continue;
            const double inv = 1.0 / std::sqrt(n2);
            for (double& x : v) x *= inv;
            comp.push_back(std::move(v));
        }
        return comp;
    }
};

inline HermitianMatrix tuple_block(const std::vector<double>& g, int q, int point) {
    return from_coords(q, g.data() + size_t(point) * q * q);
}

}  // namespace detail

// Minimize Lambda over {F pointwise PSD, sum_x tr F(x) = 1} by bisection on
// the level sets, each a Dykstra feasibility problem in tuple space.
inline PositivityReport certify_strict_positivity(const Functional& lam, const PointSet& pts,
                                                  const Tolerances& tol,
                                                  double strict_eps = 1e-6) {
    const MatrixSpace& space = *lam.space;
    const int q = space.q();
    PositivityReport rep;

    const auto em = detail::EvaluationMap::build(space, pts);
    const auto comp = em.range_complement(tol);

    // objective tuple W = T (T^T T)^+ Lambda, so <W, T c> = Lambda(c) for all c
    std::vector<double> y(static_cast<size_t>(em.dim), 0.0);
    {
        Mat gram(em.dim, em.dim);
        for (int i = 0; i < em.dim; ++i)
            for (int j = i; j < em.dim; ++j) {
                double s = 0.0;
                const double* ci = em.t.data() + size_t(i) * em.tuple;
                const double* cj = em.t.data() + size_t(j) * em.tuple;
                for (int r = 0; r < em.tuple; ++r) s += ci[r] * cj[r];
                gram(i, j) = s;
                gram(j, i) = s;
            }
        const Mat ginv = pinv(HermitianMatrix(gram), tol);
        for (int i = 0; i < em.dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < em.dim; ++j) s += ginv(i, j).real() * lam.values[size_t(j)];
            y[size_t(i)] = s;
        }
    }
    const std::vector<double> wt = em.apply(y);
    double wnorm = 0.0;
    for (double x : wt) wnorm += x * x;
    wnorm = std::sqrt(wnorm);

    // blocks: one per point plus a slack scalar for the objective level
    auto level_problem = [&](double t) {
        BlockSpectrahedron s;
        for (int p = 0; p < pts.size(); ++p) s.blocks.push_back({pts[p].label, q, 1.0});
        const int slack = pts.size();
        s.blocks.push_back({"slack", 1, 2.0 * (wnorm + 1.0)});
        for (const auto& k : comp) {
            Equality eq;
            for (int p = 0; p < pts.size(); ++p)
                eq.terms.push_back({p, detail::tuple_block(k, q, p)});
            eq.rhs = 0.0;
            s.equalities.push_back(std::move(eq));
        }
        {
            Equality norm;
            for (int p = 0; p < pts.size(); ++p)
                norm.terms.push_back({p, HermitianMatrix::identity(q)});
            norm.rhs = 1.0;
            s.equalities.push_back(std::move(norm));
        }
        {
            Equality level;  // <W, G> + slack = t  i.e.  Lambda(F) <= t
            for (int p = 0; p < pts.size(); ++p)
                level.terms.push_back({p, detail::tuple_block(wt, q, p)});
            level.terms.push_back({slack, HermitianMatrix::identity(1)});
            level.rhs = t;
            s.equalities.push_back(std::move(level));
        }
        return s;
    };

    // the slice itself can be empty (trivial cone): then positivity is vacuous
    {
        auto base = level_problem(wnorm + 1.0);
        const FeasibilityResult r = feasibility(base, tol);
        if (r.status == FeasStatus::infeasible) {
            rep.slice_empty = true;
            rep.strictly_positive = Tri::yes;
            rep.margin = std::numeric_limits<double>::infinity();
            return rep;
        }
        if (r.status == FeasStatus::inconclusive) {
            rep.strictly_positive = Tri::unknown;
            return rep;
        }
    }

    double lo = -wnorm - 1.0, hi = wnorm + 1.0;
    std::vector<HermitianMatrix> witness_blocks;
    const double gap = std::min(1e-7, 0.05 * strict_eps);
    while (hi - lo > gap) {
        const double mid = 0.5 * (lo + hi);
        const FeasibilityResult r = feasibility(level_problem(mid), tol, 1e-9);
        if (r.status == FeasStatus::feasible) {
            hi = mid;
            witness_blocks.assign(r.solution.begin(), r.solution.end() - 1);
        } else {
            lo = mid;
        }
    }
    rep.margin = hi;

    if (rep.margin > strict_eps) {
        rep.strictly_positive = Tri::yes;
        return rep;
    }
    // recover the witness coefficients from the minimizing tuple
    if (!witness_blocks.empty()) {
        std::vector<double> g;
        std::vector<double> buf(size_t(q) * q);
        for (const auto& blk : witness_blocks) {
            detail::to_coords(blk, buf.data());
            g.insert(g.end(), buf.begin(), buf.end());
        }
        rep.witness = em.preimage(g, tol);
    }
    rep.strictly_positive = rep.margin <= tol.eq_eps * 10 ? Tri::no : Tri::unknown;
    return rep;
}

struct RepresentResult {
    FeasStatus status = FeasStatus::inconclusive;
    AtomicMeasure measure;  // rank-one atoms, at most dim(E) of them
    double residual = 0.0;
};

// Feasibility over the full point set, then Richter-Tchakaloff reduction.
inline RepresentResult find_representing_measure(const Functional& lam, const PointSet& pts,
                                                 const Tolerances& tol,
                                                 std::optional<double> trace_cap = std::nullopt) {
    RepresentResult out;
    const FeasibilityResult r = representing_feasibility(lam, pts, all_points(pts), tol, trace_cap);
    out.status = r.status;
    out.residual = r.residual;
    if (r.status != FeasStatus::feasible) return out;
    const MatrixSpace& space = *lam.space;
    AtomicMeasure raw = measure_from_blocks(space.q(), all_points(pts), r.solution, tol);
    if (raw.empty()) {  // Lambda = 0 on everything: the empty measure represents it
        out.measure = raw;
        return out;
    }
    RankOneAtomList reduced = caratheodory_reduce(rank1_expand(raw, space, tol), space, tol);
    out.measure = reduced.to_measure(space.q(), tol);
    return out;
}

struct AugmentResult {
    AtomicMeasure measure;
    double epsilon = 0.0;
};

// Largest epsilon (by bisection) with Lambda - eps<F(x), M> still a moment
// functional; the returned measure puts at least eps*M at the point.
inline AugmentResult augment_atom(const Functional& lam, const PointSet& pts, int point,
                                  const HermitianMatrix& m, const Tolerances& tol) {
    if (m.frob() <= tol.rank_eps || !is_psd(m, tol))
        throw std::invalid_argument("augment_atom: M must be PSD and nonzero");
    PositivityReport cert = certify_strict_positivity(lam, pts, tol);
    if (cert.strictly_positive != Tri::yes)
        throw std::domain_error("augment_atom: Lambda is not certified strictly positive");

    const MatrixSpace& space = *lam.space;
    // upper bound: Lambda(G) / <G(x), M> for a pointwise-PSD reference G
    double eps_max = 1.0;
    if (auto cid = identity_coefficients(space, pts, tol)) {
        const double denom = m.trace();
        if (denom > tol.rank_eps) eps_max = std::max(1e-9, lam(*cid) / denom);
    }

    auto shifted = [&](double eps) {
        Functional le = lam;
        for (int b = 0; b < space.dim(); ++b)
            le.values[size_t(b)] -= eps * trace_inner(space[b].table[size_t(point)], m);
        return le;
    };

    double lo = 0.0, hi = eps_max;
    RepresentResult best;
    const double gap = std::max(1e-9, 1e-6 * eps_max);
    if (auto r = find_representing_measure(shifted(hi), pts, tol); r.status == FeasStatus::feasible) {
        lo = hi;
        best = std::move(r);
    }
    while (hi - lo > gap) {
        const double mid = 0.5 * (lo + hi);
        auto r = find_representing_measure(shifted(mid), pts, tol);
        if (r.status == FeasStatus::feasible) {
            lo = mid;
            best = std::move(r);
        } else {
            hi = mid;
        }
    }
    if (lo <= 0.0 || best.status != FeasStatus::feasible)
        throw SolverError("augment_atom: no feasible epsilon above threshold");

    std::vector<MeasureAtom> atoms(best.measure.atoms().begin(), best.measure.atoms().end());
    atoms.push_back({point, lo * m});
    AugmentResult out;
    out.measure = AtomicMeasure(space.q(), std::move(atoms), tol);
    out.epsilon = lo;
    return out;
}

}  // namespace matmom
