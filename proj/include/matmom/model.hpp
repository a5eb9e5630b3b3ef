// Finite point sets, the scalar and matrix function spaces over them,
// atomic matrix-valued measures, and the trace-measure / density split.
#pragma once

#include <matmom/hermitian.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace matmom {

struct Point {
    std::string label;
    std::optional<double> coord;  // present for polynomial-instantiated sets
};

class PointSet {
  public:
    PointSet() = default;
    explicit PointSet(std::vector<Point> pts) : points_(std::move(pts)) {
        bool any_coord = false, all_coord = true;
        for (size_t i = 0; i < points_.size(); ++i) {
            if (!index_.emplace(points_[i].label, int(i)).second)
                throw std::invalid_argument("PointSet: duplicate label " + points_[i].label);
            any_coord |= points_[i].coord.has_value();
            all_coord &= points_[i].coord.has_value();
        }
        if (any_coord && !all_coord)
            throw std::invalid_argument("PointSet: coordinates must be all present or all absent");
    }

    int size() const { return int(points_.size()); }
    const Point& operator[](int i) const { return points_[size_t(i)]; }
    const std::vector<Point>& points() const { return points_; }

    int index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end()) throw std::invalid_argument("PointSet: unknown label " + label);
        return it->second;
    }
    bool contains(const std::string& label) const { return index_.count(label) > 0; }

  private:
    std::vector<Point> points_;
    std::map<std::string, int> index_;
};

struct ScalarFunction {
    std::string name;
    std::vector<double> table;  // one value per point, in PointSet order
};

struct MatrixFunction {
    std::string name;
    std::vector<HermitianMatrix> table;  // one value per point
};

namespace detail {

// rank of a real Gram matrix, used for basis-independence checks
inline int gram_rank(const std::vector<std::vector<double>>& rows, const Tolerances& tol) {
    const int n = int(rows.size());
    if (n == 0) return 0;
    Mat g(n, n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < rows[size_t(i)].size(); ++k)
                s += rows[size_t(i)][k] * rows[size_t(j)][k];
            g(i, j) = s;
            scale = std::max(scale, std::abs(s));
        }
    const EigResult e = eig_hermitian(HermitianMatrix(g));
    const double thr = tol.rank_eps * tol.rank_eps * std::max(1.0, scale);
    int r = 0;
    for (double lam : e.values)
        if (lam > thr) ++r;
    return r;
}

inline std::vector<double> flatten(const HermitianMatrix& h) {
    std::vector<double> out;
    out.reserve(size_t(h.q()) * h.q());
    for (int i = 0; i < h.q(); ++i) {
        out.push_back(h(i, i).real());
        for (int j = i + 1; j < h.q(); ++j) {
            out.push_back(h(i, j).real());
            out.push_back(h(i, j).imag());
        }
    }
    return out;
}

}  // namespace detail

class ScalarSpace {
  public:
    ScalarSpace() = default;
    ScalarSpace(const PointSet& pts, std::vector<ScalarFunction> basis, const Tolerances& tol)
        : basis_(std::move(basis)) {
        std::vector<std::vector<double>> rows;
        for (const auto& f : basis_) {
            if (int(f.table.size()) != pts.size())
                throw std::invalid_argument("ScalarSpace: table of " + f.name +
                                            " does not cover the point set");
            rows.push_back(f.table);
        }
        if (detail::gram_rank(rows, tol) != int(basis_.size()))
            throw std::invalid_argument("ScalarSpace: basis tables are linearly dependent");
    }

    int dim() const { return int(basis_.size()); }
    const std::vector<ScalarFunction>& basis() const { return basis_; }
    const ScalarFunction& operator[](int i) const { return basis_[size_t(i)]; }

  private:
    std::vector<ScalarFunction> basis_;
};

// Metadata tying an H_q(E) basis element back to (scalar index, j, k).
struct HqTag {
    int scalar_index;
    int j, k;
};

class MatrixSpace {
  public:
    MatrixSpace() = default;
    MatrixSpace(int q, const PointSet& pts, std::vector<MatrixFunction> basis,
                const Tolerances& tol)
        : q_(q), basis_(std::move(basis)) {
        std::vector<std::vector<double>> rows;
        for (const auto& f : basis_) {
            if (int(f.table.size()) != pts.size())
                throw std::invalid_argument("MatrixSpace: table of " + f.name +
                                            " does not cover the point set");
            std::vector<double> row;
            for (const auto& h : f.table) {
                if (h.q() != q_)
                    throw std::invalid_argument("MatrixSpace: inconsistent matrix size in " +
                                                f.name);
                auto part = detail::flatten(h);
                row.insert(row.end(), part.begin(), part.end());
            }
            rows.push_back(std::move(row));
        }
        if (detail::gram_rank(rows, tol) != int(basis_.size()))
            throw std::invalid_argument("MatrixSpace: basis tables are linearly dependent");
    }

    int q() const { return q_; }
    int dim() const { return int(basis_.size()); }
    const std::vector<MatrixFunction>& basis() const { return basis_; }
    const MatrixFunction& operator[](int i) const { return basis_[size_t(i)]; }

    bool has_hq_structure() const { return !tags_.empty(); }
    const std::vector<HqTag>& hq_tags() const { return tags_; }
    int scalar_dim() const { return scalar_dim_; }
    void set_hq_structure(std::vector<HqTag> tags, int scalar_dim) {
        tags_ = std::move(tags);
        scalar_dim_ = scalar_dim;
    }

    // F_c(x) for a coefficient vector c on the basis
    HermitianMatrix eval(const std::vector<double>& coeffs, int point) const {
        if (int(coeffs.size()) != dim())
            throw std::invalid_argument("MatrixSpace::eval: coefficient length mismatch");
        HermitianMatrix out = HermitianMatrix::zero(q_);
        for (int b = 0; b < dim(); ++b)
            if (coeffs[size_t(b)] != 0.0)
                out += coeffs[size_t(b)] * basis_[size_t(b)].table[size_t(point)];
        return out;
    }

  private:
    int q_ = 0;
    std::vector<MatrixFunction> basis_;
    std::vector<HqTag> tags_;
    int scalar_dim_ = 0;
};

struct MeasureAtom {
    int point;  // index into the PointSet
    HermitianMatrix mass;
};

// mu = sum_j M_j delta_{x_j}; duplicates merged, negligible atoms dropped,
// PSD enforced on construction.
class AtomicMeasure {
  public:
    AtomicMeasure() = default;
    AtomicMeasure(int q, std::vector<MeasureAtom> atoms, const Tolerances& tol) : q_(q) {
        std::map<int, HermitianMatrix> merged;
        for (auto& a : atoms) {
            if (a.mass.q() != q) throw std::invalid_argument("AtomicMeasure: mass size mismatch");
            auto it = merged.find(a.point);
            if (it == merged.end())
                merged.emplace(a.point, a.mass);
            else
                it->second += a.mass;
        }
        for (auto& [pt, m] : merged) {
            if (m.frob() <= tol.rank_eps) continue;
            if (!is_psd(m, tol))
                throw std::domain_error("AtomicMeasure: mass at point index " +
                                        std::to_string(pt) + " is not PSD");
            atoms_.push_back({pt, m});
        }
    }

    int q() const { return q_; }
    const std::vector<MeasureAtom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }

    AtomicMeasure scaled(double s, const Tolerances& tol) const {
        std::vector<MeasureAtom> out = atoms_;
        for (auto& a : out) a.mass *= s;
        return AtomicMeasure(q_, std::move(out), tol);
    }

  private:
    int q_ = 0;
    std::vector<MeasureAtom> atoms_;
};

struct MeasureStats {
    int atnr = 0;
    int rank = 0;
    std::vector<std::string> atom_labels;
};

inline MeasureStats measure_stats(const AtomicMeasure& mu, const PointSet& pts,
                                  const Tolerances& tol) {
    MeasureStats s;
    for (const auto& a : mu.atoms()) {
        ++s.atnr;
        s.rank += rank(a.mass, tol);
        s.atom_labels.push_back(pts[a.point].label);
    }
    return s;
}

struct TraceMeasure {
    std::vector<std::pair<int, double>> tau;          // (point, tr M_j)
    std::vector<std::pair<int, HermitianMatrix>> phi;  // (point, M_j / tr M_j)
};

// tau({x_j}) = tr M_j and Phi(x_j) = M_j / tr M_j; Phi is PSD everywhere and
// O off the atoms.
inline TraceMeasure trace_measure_and_density(const AtomicMeasure& mu) {
    TraceMeasure out;
    for (const auto& a : mu.atoms()) {
        const double t = a.mass.trace();
        out.tau.emplace_back(a.point, t);
        out.phi.emplace_back(a.point, (1.0 / t) * a.mass);
    }
    return out;
}

// Basis {f_i H_jk} of the Hermitian matrices over the complexification of E,
// in (i, j, k) lexical order; dim = q^2 dim E.
inline MatrixSpace make_hq_space(const ScalarSpace& e, int q, const PointSet& pts,
                                 const Tolerances& tol) {
    if (e.dim() < 1) throw std::invalid_argument("make_hq_space: dim E must be >= 1");
    const auto hjk = hjk_basis(q);
    std::vector<MatrixFunction> basis;
    std::vector<HqTag> tags;
    for (int i = 0; i < e.dim(); ++i)
        for (int j = 0; j < q; ++j)
            for (int k = 0; k < q; ++k) {
                MatrixFunction f;
                f.name = e[i].name + "*H" + std::to_string(j + 1) + std::to_string(k + 1);
                f.table.reserve(size_t(pts.size()));
                for (int p = 0; p < pts.size(); ++p)
                    f.table.push_back(e[i].table[size_t(p)] * hjk[size_t(j) * q + size_t(k)]);
                basis.push_back(std::move(f));
                tags.push_back({i, j, k});
            }
    MatrixSpace space(q, pts, std::move(basis), tol);
    space.set_hq_structure(std::move(tags), e.dim());
    return space;
}

// Real-coefficient polynomial entries for instantiating the 1-d examples.
// Real parts symmetric, imaginary parts antisymmetric, so the value is
// Hermitian at every real x.
struct PolynomialMatrixDescriptor {
    std::string name;
    int q = 0;
    std::vector<std::vector<std::vector<double>>> re;  // [j][k] -> coefficients
    std::vector<std::vector<std::vector<double>>> im;

    static double eval_poly(const std::vector<double>& c, double x) {
        double v = 0.0;
        for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
        return v;
    }

    HermitianMatrix eval(double x) const {
        Mat m(q, q);
        for (int j = 0; j < q; ++j)
            for (int k = 0; k < q; ++k) {
                const double rj = re.empty() ? 0.0 : eval_poly(re[size_t(j)][size_t(k)], x);
                const double ij = im.empty() ? 0.0 : eval_poly(im[size_t(j)][size_t(k)], x);
                m(j, k) = cplx(rj, ij);
            }
        return HermitianMatrix(std::move(m));  // throws if not Hermitian
    }
};

inline std::string coord_label(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

inline std::pair<PointSet, MatrixSpace> instantiate_polynomial(
    const std::vector<PolynomialMatrixDescriptor>& descriptors, const std::vector<double>& grid,
    const Tolerances& tol) {
    std::vector<Point> pts;
    for (double x : grid) pts.push_back({coord_label(x), x});
    PointSet ps(std::move(pts));  // rejects duplicate grid values via labels

    if (descriptors.empty()) throw std::invalid_argument("instantiate_polynomial: no descriptors");
    const int q = descriptors.front().q;
    std::vector<MatrixFunction> basis;
    for (const auto& d : descriptors) {
        if (d.q != q) throw std::invalid_argument("instantiate_polynomial: inconsistent q");
        MatrixFunction f;
        f.name = d.name;
        for (double x : grid) f.table.push_back(d.eval(x));
        basis.push_back(std::move(f));
    }
    return {ps, MatrixSpace(q, ps, std::move(basis), tol)};
}

}  // namespace matmom
