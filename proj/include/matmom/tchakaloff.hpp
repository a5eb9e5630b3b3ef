// Constructive matricial Richter-Tchakaloff reduction: split every mass into
// rank-one pieces, then run Caratheodory null-steps on the cone of point
// evaluation functionals until at most dim(E) atoms survive. Also computes
// the two Caratheodory numbers by support enumeration + rank minimization.
#pragma once

#include <matmom/represent.hpp>

namespace matmom {

struct RankOneAtom {
    int point;
    Vec v;  // nonzero; the mass is v v*
};

class RankOneAtomList {
  public:
    RankOneAtomList() = default;

    // the induced measure must reproduce `reference` within eq_eps
    RankOneAtomList(std::vector<RankOneAtom> atoms, const Functional& reference,
                    const Tolerances& tol)
        : atoms_(std::move(atoms)) {
        const MatrixSpace& space = *reference.space;
        for (const auto& a : atoms_)
            if (vec_norm(a.v) == 0.0)
                throw std::invalid_argument("RankOneAtomList: zero vector atom");
        for (int b = 0; b < space.dim(); ++b) {
            const double got = evaluate(space, b);
            const double want = reference.values[size_t(b)];
            if (std::abs(got - want) > tol.eq_eps * (1.0 + std::abs(want)) * 10)
                throw std::invalid_argument(
                    "RankOneAtomList: atoms do not reproduce the reference functional");
        }
    }

    const std::vector<RankOneAtom>& atoms() const { return atoms_; }
    int size() const { return int(atoms_.size()); }

    double evaluate(const MatrixSpace& space, int basis_index) const {
        double s = 0.0;
        for (const auto& a : atoms_) {
            const HermitianMatrix& f = space[basis_index].table[size_t(a.point)];
            cplx quad = 0.0;
            for (int i = 0; i < f.q(); ++i)
                for (int j = 0; j < f.q(); ++j)
                    quad += std::conj(a.v[size_t(i)]) * f(i, j) * a.v[size_t(j)];
            s += quad.real();
        }
        return s;
    }

    AtomicMeasure to_measure(int q, const Tolerances& tol) const {
        std::vector<MeasureAtom> out;
        for (const auto& a : atoms_) out.push_back({a.point, HermitianMatrix::rank_one(a.v)});
        return AtomicMeasure(q, std::move(out), tol);
    }

  private:
    std::vector<RankOneAtom> atoms_;
};

inline RankOneAtomList rank1_expand(const AtomicMeasure& mu, const MatrixSpace& space,
                                    const Tolerances& tol) {
    std::vector<RankOneAtom> atoms;
    for (const auto& a : mu.atoms())
        for (auto& v : rank_one_decompose(a.mass, tol)) atoms.push_back({a.point, std::move(v)});
    return RankOneAtomList(std::move(atoms), lambda_from_measure(mu, space), tol);
}

namespace detail {

// null vector of the columns {a_i} (dim x N): eigenvector of the smallest
// eigenvalue of the N x N Gram matrix, or empty when independent
inline std::vector<double> null_combination(const std::vector<std::vector<double>>& cols,
                                            const Tolerances& tol) {
    const int n = int(cols.size());
    if (n == 0) return {};
    Mat g(n, n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < cols[size_t(i)].size(); ++k)
                s += cols[size_t(i)][k] * cols[size_t(j)][k];
            g(i, j) = s;
            g(j, i) = s;
            scale = std::max(scale, std::abs(s));
        }
    const EigResult e = eig_hermitian(HermitianMatrix(g));
    // exact dependences land at round-off level in the Gram spectrum; the
    // caller re-checks the candidate's true residual before stepping
    const double thr = std::max(tol.rank_eps * tol.rank_eps, 1e-13) * std::max(1.0, scale);
    if (e.values.back() > thr) return {};
    std::vector<double> alpha(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) alpha[size_t(i)] = e.vectors(i, n - 1).real();
    return alpha;
}

}  // namespace detail

// Caratheodory reduction over the evaluation vectors l_{v,x} = (v* F_b(x) v)_b.
// Weights are carried separately and folded back into the vectors at the end.
inline RankOneAtomList caratheodory_reduce(const RankOneAtomList& input, const MatrixSpace& space,
                                           const Tolerances& tol) {
    if (input.size() == 0)
        throw std::invalid_argument("caratheodory_reduce: no atoms");

    struct Entry {
        int point;
        Vec unit;       // direction, norm 1
        double weight;  // so the mass is weight * unit unit*
        std::vector<double> eval;
    };

    const int dim = space.dim();
    std::vector<Entry> entries;
    double eval_scale = 1.0;
    for (const auto& a : input.atoms()) {
        Entry en;
        en.point = a.point;
        const double nrm = vec_norm(a.v);
        en.weight = nrm * nrm;
        en.unit = a.v;
        for (auto& z : en.unit) z /= nrm;
        en.eval.resize(static_cast<size_t>(dim));
        for (int b = 0; b < dim; ++b) {
            const HermitianMatrix& f = space[b].table[size_t(a.point)];
            cplx quad = 0.0;
            for (int i = 0; i < f.q(); ++i)
                for (int j = 0; j < f.q(); ++j)
                    quad += std::conj(en.unit[size_t(i)]) * f(i, j) * en.unit[size_t(j)];
            en.eval[size_t(b)] = quad.real();
        }
        double n2 = 0.0;
        for (double x : en.eval) n2 += x * x;
        eval_scale = std::max(eval_scale, std::sqrt(n2));
        entries.push_back(std::move(en));
    }

    // atoms invisible to the space contribute nothing to Lambda
    std::erase_if(entries, [&](const Entry& en) {
        double n2 = 0.0;
        for (double x : en.eval) n2 += x * x;
        return std::sqrt(n2) <= tol.rank_eps * eval_scale;
    });

    while (!entries.empty()) {
        std::vector<std::vector<double>> weighted;
        for (const auto& en : entries) {
            std::vector<double> col = en.eval;
            for (double& x : col) x *= en.weight;
            weighted.push_back(std::move(col));
        }
        std::vector<double> alpha = detail::null_combination(weighted, tol);
        if (alpha.empty()) break;

        // measure the true residual of the candidate null combination; a
        // loose one would silently perturb the functional
        double col_scale = 1.0;
        for (const auto& c : weighted) {
            double n2 = 0.0;
            for (double x : c) n2 += x * x;
            col_scale = std::max(col_scale, std::sqrt(n2));
        }
        std::vector<double> res(static_cast<size_t>(dim), 0.0);
        for (size_t i = 0; i < entries.size(); ++i)
            for (int b = 0; b < dim; ++b) res[size_t(b)] += alpha[i] * weighted[i][size_t(b)];
        double rnorm = 0.0;
        for (double x : res) rnorm += x * x;
        rnorm = std::sqrt(rnorm);
        if (rnorm > 1e-10 * col_scale * double(entries.size())) {
            if (int(entries.size()) <= dim) break;  // near-dependence only; stop reducing
            throw SolverError("caratheodory_reduce: null combination too inaccurate");
        }

        // flip so some entry is positive, then the largest step keeping all
        // weight factors (1 - theta*alpha_i) nonnegative
        double amax = 0.0;
        for (double a : alpha) amax = std::max(amax, std::abs(a));
        double apos = 0.0;
        for (double a : alpha) apos = std::max(apos, a);
        if (apos <= 1e-12 * amax)
            for (double& a : alpha) a = -a;
        double theta = std::numeric_limits<double>::infinity();
        int kill = -1;
        for (size_t i = 0; i < entries.size(); ++i) {
            if (alpha[i] <= 1e-12 * amax) continue;
            const double cand = 1.0 / alpha[i];
            if (cand < theta - 1e-15) {
                theta = cand;
                kill = int(i);
            }
        }
        if (kill < 0)
            throw SolverError("caratheodory_reduce: no positive step, numerical stall");
        std::vector<Entry> next;
        for (size_t i = 0; i < entries.size(); ++i) {
            const double factor = 1.0 - theta * alpha[i];
            if (int(i) == kill || factor <= 1e-14) continue;
            if (factor < 0)
                throw SolverError("caratheodory_reduce: negative weight after null step");
            Entry en = entries[i];
            en.weight *= factor;
            next.push_back(std::move(en));
        }
        entries = std::move(next);
    }

    std::vector<RankOneAtom> out;
    for (const auto& en : entries) {
        Vec v = en.unit;
        const double s = std::sqrt(en.weight);
        for (auto& z : v) z *= s;
        out.push_back({en.point, std::move(v)});
    }
    // revalidate against the input functional
    Functional ref;
    ref.space = &space;
    ref.values.resize(static_cast<size_t>(dim));
    for (int b = 0; b < dim; ++b) ref.values[size_t(b)] = input.evaluate(space, b);
    return RankOneAtomList(std::move(out), ref, tol);
}

// Reduction restricted to an allowed support; the algorithm never adds
// points, so this is a checked precondition plus an asserted postcondition.
inline RankOneAtomList reduce_within(const RankOneAtomList& input, const MatrixSpace& space,
                                     const std::vector<int>& allowed_points,
                                     const Tolerances& tol) {
    auto allowed = [&](int p) {
        for (int a : allowed_points)
            if (a == p) return true;
        return false;
    };
    for (const auto& a : input.atoms())
        if (!allowed(a.point))
            throw std::invalid_argument("reduce_within: input atom outside the allowed set");
    RankOneAtomList out = caratheodory_reduce(input, space, tol);
    for (const auto& a : out.atoms())
        if (!allowed(a.point)) throw SolverError("reduce_within: reduction left the allowed set");
    return out;
}

struct CaratheodoryNumbers {
    int car = 0;
    int Car = 0;
    AtomicMeasure car_witness;
    AtomicMeasure Car_witness;
    bool car_certified = true;   // false when inconclusive solves below car exist
    bool Car_certified = false;  // true when Car meets a proven lower bound
    bool budget_exhausted = false;
};

// car: smallest feasible support size (exact over supports). Car: best total
// rank found by reducing feasible supports' solutions, certified when it
// meets the car- or rank(L(1))-forced lower bound.
inline CaratheodoryNumbers caratheodory_numbers(const Functional& lam, const PointSet& pts,
                                                const Tolerances& tol, int budget = 4096) {
    const MatrixSpace& space = *lam.space;
    const int n = pts.size();
    if (lam.norm() == 0.0)
        throw std::domain_error("caratheodory_numbers: Lambda = 0 has no Caratheodory numbers");
    auto cap = derive_trace_cap(lam, pts, tol);

    {
        FeasibilityResult all = representing_feasibility(lam, pts, all_points(pts), tol, cap);
        if (all.status == FeasStatus::infeasible)
            throw std::domain_error("caratheodory_numbers: not a moment functional");
    }

    CaratheodoryNumbers out;
    int solves = 0;
    bool saw_inconclusive_below = false;

    AtomicMeasure best_rank_measure;
    int best_rank = std::numeric_limits<int>::max();

    for (int size = 1; size <= n && out.car == 0; ++size) {
        // enumerate supports of this cardinality
        std::vector<int> idx(static_cast<size_t>(size));
        for (int i = 0; i < size; ++i) idx[size_t(i)] = i;
        while (true) {
            if (solves >= budget) {
                out.budget_exhausted = true;
                break;
            }
            ++solves;
            FeasibilityResult r = representing_feasibility(lam, pts, idx, tol, cap);
            if (r.status == FeasStatus::feasible) {
                out.car = size;
                out.car_witness = measure_from_blocks(space.q(), idx, r.solution, tol);

                break;
            }
            if (r.status == FeasStatus::inconclusive) saw_inconclusive_below = true;
            // next combination
            int k = size - 1;
            while (k >= 0 && idx[size_t(k)] == n - size + k) --k;
            if (k < 0) break;
            ++idx[size_t(k)];
            for (int j = k + 1; j < size; ++j) idx[size_t(j)] = idx[size_t(j - 1)] + 1;
        }
        if (out.budget_exhausted) break;
    }
    if (out.car == 0) {
        if (out.budget_exhausted)
            throw SolverError("caratheodory_numbers: budget exhausted before any feasible support");
        throw std::domain_error("caratheodory_numbers: no feasible support found");
    }
    out.car_certified = !saw_inconclusive_below;

    // Car search: reduce the witnesses of feasible supports to rank-one atoms
    auto consider = [&](const AtomicMeasure& mu) {
        RankOneAtomList reduced = caratheodory_reduce(rank1_expand(mu, space, tol), space, tol);
        MeasureStats st = measure_stats(reduced.to_measure(space.q(), tol), pts, tol);
        if (st.rank < best_rank) {
            best_rank = st.rank;
            best_rank_measure = reduced.to_measure(space.q(), tol);
        }
    };
    consider(out.car_witness);
    // sweep per-block trace caps to nudge the solver toward low-rank masses
    for (double shrink : {0.75, 0.5, 0.25}) {
        if (solves >= budget) {
            out.budget_exhausted = true;
            break;
        }
        ++solves;
        const std::optional<double> small_cap =
            cap ? std::optional<double>(*cap * shrink) : std::nullopt;
        FeasibilityResult r = representing_feasibility(lam, pts, all_points(pts), tol, small_cap);
        if (r.status == FeasStatus::feasible)
            consider(measure_from_blocks(space.q(), all_points(pts), r.solution, tol));
    }
    out.Car = best_rank;
    out.Car_witness = best_rank_measure;

    // lower bounds: rank >= atnr >= car, and rank(mu) >= rank(sum_x M_x)
    // whenever the total mass matrix is Lambda-observable
    int lower = out.car;
    if (auto total = total_mass_matrix(lam, pts, tol))
        lower = std::max(lower, rank(*total, tol));
    if (out.Car == lower) out.Car_certified = true;

    if (out.car > space.dim() || out.Car > space.dim())
        throw SolverError("caratheodory_numbers: bound dim(E) violated");
    if (out.car > out.Car) throw SolverError("caratheodory_numbers: car > Car");
    return out;
}

}  // namespace matmom
