// Bridge between functionals and the feasibility engine: the spectrahedron
// of representing measures on a finite support, trace-cap derivation, and
// per-point mass maximization.
#pragma once

#include <matmom/functional.hpp>
#include <matmom/sdp.hpp>

namespace matmom {

// Coefficients c with sum_b c_b F_b(x) = H at every point, if that constant
// element exists in the span (least squares on the stacked tables, verified
// pointwise).
inline std::optional<std::vector<double>> constant_coefficients(const MatrixSpace& space,
                                                                const PointSet& pts,
                                                                const HermitianMatrix& h,
                                                                const Tolerances& tol) {
    const int dim = space.dim();
    const int q = space.q();
    const int rows = pts.size() * q * q;
    std::vector<std::vector<double>> cols(static_cast<size_t>(dim));
    std::vector<double> target;
    for (int b = 0; b < dim; ++b) {
        for (int p = 0; p < pts.size(); ++p) {
            auto part = detail::flatten(space[b].table[size_t(p)]);
            cols[size_t(b)].insert(cols[size_t(b)].end(), part.begin(), part.end());
        }
    }
    for (int p = 0; p < pts.size(); ++p) {
        auto part = detail::flatten(h);
        target.insert(target.end(), part.begin(), part.end());
    }

    Mat g(dim, dim);
    std::vector<double> rhs(size_t(dim), 0.0);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            double s = 0.0;
            for (int r = 0; r < rows; ++r) s += cols[size_t(i)][size_t(r)] * cols[size_t(j)][size_t(r)];
            g(i, j) = s;
            g(j, i) = s;
        }
        double s = 0.0;
        for (int r = 0; r < rows; ++r) s += cols[size_t(i)][size_t(r)] * target[size_t(r)];
        rhs[size_t(i)] = s;
    }
    const Mat ginv = pinv(HermitianMatrix(g), tol);
    std::vector<double> c(size_t(dim), 0.0);
    for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim; ++j) s += ginv(i, j).real() * rhs[size_t(j)];
        c[size_t(i)] = s;
    }
    for (int p = 0; p < pts.size(); ++p) {
        HermitianMatrix diff = space.eval(c, p) - h;
        if (diff.frob() > 1e-8 * std::max(1.0, h.frob()) * std::sqrt(double(q)))
            return std::nullopt;
    }
    return c;
}

// The Lambda-value of the constant-identity element, when it exists, bounds
// the total trace of every representing measure.
inline std::optional<std::vector<double>> identity_coefficients(const MatrixSpace& space,
                                                                const PointSet& pts,
                                                                const Tolerances& tol) {
    return constant_coefficients(space, pts, HermitianMatrix::identity(space.q()), tol);
}

// sum_x M_x is Lambda-observable when every constant H_jk lies in the span;
// its rank is then a lower bound for rank(mu) over all representing mu.
inline std::optional<HermitianMatrix> total_mass_matrix(const Functional& lam,
                                                        const PointSet& pts,
                                                        const Tolerances& tol) {
    const MatrixSpace& space = *lam.space;
    const int q = space.q();
    const auto hjk = hjk_basis(q);
    HermitianMatrix total = HermitianMatrix::zero(q);
    for (int m = 0; m < q * q; ++m) {
        auto c = constant_coefficients(space, pts, hjk[size_t(m)], tol);
        if (!c) return std::nullopt;
        total += lam(*c) * hjk[size_t(m)];
    }
    return total;
}

inline std::optional<double> derive_trace_cap(const Functional& lam, const PointSet& pts,
                                              const Tolerances& tol) {
    auto c = identity_coefficients(*lam.space, pts, tol);
    if (!c) return std::nullopt;
    const double cap = lam(*c);
    if (cap < -tol.eq_eps) return std::nullopt;  // not even trace-positive
    return std::max(cap, 0.0) * (1.0 + 1e-9) + 1e-12;
}

// Blocks M_x >= 0 on the given support with sum_x <F_b(x), M_x> = Lambda_b.
inline BlockSpectrahedron representing_spectrahedron(const Functional& lam, const PointSet& pts,
                                                     const std::vector<int>& support,
                                                     std::optional<double> trace_cap) {
    const MatrixSpace& space = *lam.space;
    BlockSpectrahedron s;
    for (int x : support) s.blocks.push_back({pts[x].label, space.q(), trace_cap});
    for (int b = 0; b < space.dim(); ++b) {
        Equality eq;
        for (size_t i = 0; i < support.size(); ++i)
            eq.terms.push_back({int(i), space[b].table[size_t(support[i])]});
        eq.rhs = lam.values[size_t(b)];
        s.equalities.push_back(std::move(eq));
    }
    return s;
}

inline std::vector<int> all_points(const PointSet& pts) {
    std::vector<int> v(size_t(pts.size()));
    for (int i = 0; i < pts.size(); ++i) v[size_t(i)] = i;
    return v;
}

inline FeasibilityResult representing_feasibility(const Functional& lam, const PointSet& pts,
                                                  const std::vector<int>& support,
                                                  const Tolerances& tol,
                                                  std::optional<double> trace_cap = std::nullopt,
                                                  double target_residual = -1.0) {
    if (!trace_cap) trace_cap = derive_trace_cap(lam, pts, tol);
    return feasibility(representing_spectrahedron(lam, pts, support, trace_cap), tol,
                       target_residual);
}

// Turn solver blocks into a measure; tiny masses dropped, near-PSD clipped.
inline AtomicMeasure measure_from_blocks(int q, const std::vector<int>& support,
                                         const std::vector<HermitianMatrix>& blocks,
                                         const Tolerances& tol) {
    std::vector<MeasureAtom> atoms;
    for (size_t i = 0; i < support.size(); ++i) {
        if (blocks[i].frob() <= 10 * tol.feas_eps) continue;
        // clip the spectrum at zero to absorb projection round-off
        EigResult e = eig_hermitian(blocks[i]);
        Mat rec(q, q);
        for (int k = 0; k < q; ++k) {
            const double lam = std::max(0.0, e.values[size_t(k)]);
            if (lam == 0.0) continue;
            const Vec v = eig_column(e, k);
            for (int r = 0; r < q; ++r)
                for (int c = 0; c < q; ++c)
                    rec(r, c) += lam * v[size_t(r)] * std::conj(v[size_t(c)]);
        }
        atoms.push_back({support[i], hermitian_part(rec)});
    }
    return AtomicMeasure(q, std::move(atoms), tol);
}

struct MassMaximum {
    double value = 0.0;
    AtomicMeasure witness;        // a representing measure attaining ~value at the point
    bool conclusive = true;
};

// max <objective, M_x> over representing measures restricted to `support`.
inline MassMaximum max_point_mass(const Functional& lam, const PointSet& pts,
                                  const std::vector<int>& support, int point,
                                  const HermitianMatrix& objective, const Tolerances& tol,
                                  std::optional<double> trace_cap, double fallback_cap) {
    if (!trace_cap) trace_cap = derive_trace_cap(lam, pts, tol);
    BlockSpectrahedron s = representing_spectrahedron(lam, pts, support, trace_cap);
    int block = -1;
    for (size_t i = 0; i < support.size(); ++i)
        if (support[i] == point) block = int(i);
    if (block < 0) throw std::invalid_argument("max_point_mass: point not in support");

    const double obj_gain = std::max(1e-12, lambda_max(objective));
    const double ub = obj_gain * (trace_cap ? *trace_cap : fallback_cap);
    MaximizeResult r = maximize_linear(s, {{block, objective}}, std::max(ub, 1e-9), tol);

    MassMaximum out;
    out.value = r.value;
    out.conclusive = r.conclusive;
    if (!r.solution.empty())
        out.witness = measure_from_blocks(lam.space->q(), support, r.solution, tol);
    return out;
}

}  // namespace matmom
