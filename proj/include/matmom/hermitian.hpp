// Dense complex Hermitian linear algebra at desk scale (q <= ~16):
// H_jk orthonormal basis, trace inner product, cyclic Jacobi eigensolver,
// PSD tests, rank-one splitting, kernel projections, Moore-Penrose inverse.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace matmom {

using cplx = std::complex<double>;
using Vec = std::vector<cplx>;

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical policy shared by every module.
struct Tolerances {
    double psd_eps = 1e-9;    // eigenvalue slack for the Loewner test
    double rank_eps = 1e-8;   // relative threshold for rank/kernel decisions
    double eq_eps = 1e-8;     // equality of functional values
    double feas_eps = 1e-7;   // feasibility residual of the projection solver
    int max_iter = 200000;

    void validate() const {
        if (psd_eps <= 0 || rank_eps <= 0 || eq_eps <= 0 || feas_eps <= 0 || max_iter <= 0)
            throw std::invalid_argument("Tolerances: all fields must be strictly positive");
    }
};

// General dense complex matrix, row-major. Value type; no views.
class Mat {
  public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols, cplx(0.0)) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    cplx& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    Mat adjoint() const {
        Mat r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    Mat transpose() const {
        Mat r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    cplx trace() const {
        cplx t = 0.0;
        for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double frob() const {
        double s = 0.0;
        for (const cplx& z : a_) s += std::norm(z);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const cplx& z : a_) m = std::max(m, std::abs(z));
        return m;
    }

    Mat& operator+=(const Mat& o) {
        check_same(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        check_same(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Mat& operator*=(cplx s) {
        for (cplx& z : a_) z *= s;
        return *this;
    }

    friend Mat operator+(Mat l, const Mat& r) { return l += r; }
    friend Mat operator-(Mat l, const Mat& r) { return l -= r; }
    friend Mat operator*(cplx s, Mat m) { return m *= s; }
    friend Mat operator*(Mat m, cplx s) { return m *= s; }

    friend Mat operator*(const Mat& l, const Mat& r) {
        if (l.cols_ != r.rows_) throw std::invalid_argument("Mat: shape mismatch in product");
        Mat out(l.rows_, r.cols_);
        for (int i = 0; i < l.rows_; ++i)
            for (int k = 0; k < l.cols_; ++k) {
                const cplx lik = l(i, k);
                if (lik == cplx(0.0)) continue;
                for (int j = 0; j < r.cols_; ++j) out(i, j) += lik * r(k, j);
            }
        return out;
    }

    Vec apply(const Vec& v) const {
        if (int(v.size()) != cols_) throw std::invalid_argument("Mat: shape mismatch in apply");
        Vec out(rows_, cplx(0.0));
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) out[size_t(i)] += (*this)(i, j) * v[size_t(j)];
        return out;
    }

  private:
    void check_same(const Mat& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("Mat: shape mismatch");
    }

    int rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx(0.0)) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return out;
}

inline Mat outer(const Vec& v) {
    Mat m(int(v.size()), int(v.size()));
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) m(int(i), int(j)) = v[i] * std::conj(v[j]);
    return m;
}

inline double vec_norm(const Vec& v) {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

// Hermitian q x q matrix; symmetry is an invariant checked on construction
// and restored exactly by averaging with the adjoint.
class HermitianMatrix {
  public:
    HermitianMatrix() = default;

    explicit HermitianMatrix(Mat m) {
        if (m.rows() != m.cols())
            throw std::invalid_argument("HermitianMatrix: matrix must be square");
        const double scale = std::max(1.0, m.max_abs());
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j <= i; ++j)
                if (std::abs(m(i, j) - std::conj(m(j, i))) > 1e-12 * scale)
                    throw std::invalid_argument("HermitianMatrix: entries violate A = A*");
        for (int i = 0; i < m.rows(); ++i) {
            m(i, i) = cplx(m(i, i).real(), 0.0);
            for (int j = 0; j < i; ++j) {
                const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
                m(i, j) = v;
                m(j, i) = std::conj(v);
            }
        }
        m_ = std::move(m);
    }

    static HermitianMatrix zero(int q) { return HermitianMatrix(Mat(q, q)); }
    static HermitianMatrix identity(int q) { return HermitianMatrix(Mat::identity(q)); }

    static HermitianMatrix diag(const std::vector<double>& d) {
        Mat m(int(d.size()), int(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = d[i];
        return HermitianMatrix(m);
    }

    // v v* for a complex vector v
    static HermitianMatrix rank_one(const Vec& v) { return HermitianMatrix(outer(v)); }

    int q() const { return m_.rows(); }
    const Mat& mat() const { return m_; }
    const cplx& operator()(int i, int j) const { return m_(i, j); }

    double trace() const { return m_.trace().real(); }
    double frob() const { return m_.frob(); }

    HermitianMatrix& operator+=(const HermitianMatrix& o) {
        Mat m = m_;
        m += o.m_;
        m_ = std::move(m);
        return *this;
    }
    HermitianMatrix& operator-=(const HermitianMatrix& o) {
        Mat m = m_;
        m -= o.m_;
        m_ = std::move(m);
        return *this;
    }
    HermitianMatrix& operator*=(double s) {
        m_ *= cplx(s, 0.0);
        return *this;
    }
    friend HermitianMatrix operator+(HermitianMatrix l, const HermitianMatrix& r) { return l += r; }
    friend HermitianMatrix operator-(HermitianMatrix l, const HermitianMatrix& r) { return l -= r; }
    friend HermitianMatrix operator*(double s, HermitianMatrix m) { return m *= s; }

  private:
    Mat m_;
};

// (A + A*)/2, for products that drift off the Hermitian subspace by round-off.
inline HermitianMatrix hermitian_part(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_part: square input required");
    Mat h(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return HermitianMatrix(std::move(h));
}

// Orthonormal basis {H_jk} of the real Hilbert space of Hermitian q x q
// matrices, in row-major (j,k) order:
//   j < k : (e_jk + e_kj)/sqrt(2),  j = k : e_jj,  j > k : i(e_jk - e_kj)/sqrt(2).
inline std::vector<HermitianMatrix> hjk_basis(int q) {
    if (q < 1) throw std::invalid_argument("hjk_basis: q must be >= 1");
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<HermitianMatrix> basis;
    basis.reserve(size_t(q) * q);
    for (int j = 0; j < q; ++j)
        for (int k = 0; k < q; ++k) {
            Mat m(q, q);
            if (j == k) {
                m(j, j) = 1.0;
            } else if (j < k) {
                m(j, k) = r;
                m(k, j) = r;
            } else {
                m(j, k) = cplx(0.0, r);
                m(k, j) = cplx(0.0, -r);
            }
            basis.emplace_back(std::move(m));
        }
    return basis;
}

// <X,Y> = tr(XY); real for Hermitian arguments, imaginary residue discarded.
inline double trace_inner(const HermitianMatrix& x, const HermitianMatrix& y) {
    if (x.q() != y.q()) throw std::invalid_argument("trace_inner: dimension mismatch");
    cplx t = 0.0;
    for (int i = 0; i < x.q(); ++i)
        for (int j = 0; j < x.q(); ++j) t += x(i, j) * y(j, i);
    return t.real();
}

struct EigResult {
    std::vector<double> values;  // descending
    Mat vectors;                 // unitary, columns are eigenvectors
};

// Cyclic complex Jacobi. Deterministic sweep order; each rotation phases out
// the pivot, then applies the classic symmetric Givens zeroing.
inline EigResult eig_hermitian(const HermitianMatrix& a) {
    const int n = a.q();
    Mat m = a.mat();
    Mat v = Mat::identity(n);
    const double scale = std::max(1.0, m.frob());

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += std::norm(m(i, j));
        return std::sqrt(2.0 * s);
    };

    const int max_sweeps = 128;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= 1e-15 * scale) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int r = p + 1; r < n; ++r) {
                const cplx b = m(p, r);
                const double ab = std::abs(b);
                if (ab <= 1e-300) continue;
                // phase so the pivot becomes real, then a real Jacobi angle
                const cplx phase = b / ab;  // e^{i phi}
                const double app = m(p, p).real();
                const double arr = m(r, r).real();
                const double tau = (arr - app) / (2.0 * ab);
                const double t = (tau >= 0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                            : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J columns: (c*phase, -s*phase) over (s, c) up to the phase split;
                // implemented as the 2x2 unitary [ [c*ph, s*ph], [-s, c] ] acting on (p,r)
                const cplx jpp = c * phase, jpr = s * phase;
                const cplx jrp = -s, jrr = c;
                for (int i = 0; i < n; ++i) {  // A <- A J
                    const cplx aip = m(i, p), air = m(i, r);
                    m(i, p) = aip * jpp + air * jrp;
                    m(i, r) = aip * jpr + air * jrr;
                }
                for (int j = 0; j < n; ++j) {  // A <- J* A
                    const cplx apj = m(p, j), arj = m(r, j);
                    m(p, j) = std::conj(jpp) * apj + std::conj(jrp) * arj;
                    m(r, j) = std::conj(jpr) * apj + std::conj(jrr) * arj;
                }
                for (int i = 0; i < n; ++i) {  // V <- V J
                    const cplx vip = v(i, p), vir = v(i, r);
                    v(i, p) = vip * jpp + vir * jrp;
                    v(i, r) = vip * jpr + vir * jrr;
                }
                m(p, r) = 0.0;
                m(r, p) = 0.0;
                m(p, p) = cplx(m(p, p).real(), 0.0);
                m(r, r) = cplx(m(r, r).real(), 0.0);
            }
        }
    }
    if (sweep == max_sweeps && off_norm() > 1e-12 * scale)
        throw SolverError("eig_hermitian: Jacobi sweeps did not converge");

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return m(i, i).real() > m(j, j).real(); });

    EigResult res;
    res.values.resize(size_t(n));
    res.vectors = Mat(n, n);
    for (int col = 0; col < n; ++col) {
        const int src = order[size_t(col)];
        res.values[size_t(col)] = m(src, src).real();
        // fix the phase so the largest component is real positive (determinism)
        int imax = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i)
            if (std::abs(v(i, src)) > best) {
                best = std::abs(v(i, src));
                imax = i;
            }
        cplx ph = 1.0;
        if (best > 0) ph = std::conj(v(imax, src)) / best;
        for (int i = 0; i < n; ++i) res.vectors(i, col) = v(i, src) * ph;
    }
    return res;
}

inline double lambda_min(const HermitianMatrix& a) {
    const EigResult e = eig_hermitian(a);
    return e.values.back();
}

inline double lambda_max(const HermitianMatrix& a) { return eig_hermitian(a).values.front(); }

inline bool is_psd(const HermitianMatrix& a, const Tolerances& tol) {
    return lambda_min(a) >= -tol.psd_eps;
}

inline double rank_threshold(double frob, const Tolerances& tol) {
    return tol.rank_eps * std::max(1.0, frob);
}

inline int rank(const HermitianMatrix& a, const Tolerances& tol) {
    const EigResult e = eig_hermitian(a);
    const double thr = rank_threshold(a.frob(), tol);
    int r = 0;
    for (double lam : e.values)
        if (std::abs(lam) > thr) ++r;
    return r;
}

inline Vec eig_column(const EigResult& e, int col) {
    Vec v(static_cast<size_t>(e.vectors.rows()));
    for (int i = 0; i < e.vectors.rows(); ++i) v[size_t(i)] = e.vectors(i, col);
    return v;
}

// M = sum_i v_i v_i* with exactly rank(M) vectors, v_i = sqrt(lambda_i) u_i.
inline std::vector<Vec> rank_one_decompose(const HermitianMatrix& m, const Tolerances& tol) {
    const EigResult e = eig_hermitian(m);
    if (e.values.back() < -tol.psd_eps * std::max(1.0, m.frob()))
        throw std::domain_error("rank_one_decompose: matrix is not PSD");
    const double thr = rank_threshold(m.frob(), tol);
    std::vector<Vec> out;
    for (int i = 0; i < m.q(); ++i) {
        if (e.values[size_t(i)] <= thr) continue;
        Vec v = eig_column(e, i);
        const double s = std::sqrt(e.values[size_t(i)]);
        for (cplx& z : v) z *= s;
        out.push_back(std::move(v));
    }
    return out;
}

// Orthogonal projection onto ker A, decided at the relative rank threshold.
inline HermitianMatrix kernel_projection(const HermitianMatrix& a, const Tolerances& tol) {
    const EigResult e = eig_hermitian(a);
    const double thr = rank_threshold(a.frob(), tol);
    Mat p(a.q(), a.q());
    for (int i = 0; i < a.q(); ++i) {
        if (std::abs(e.values[size_t(i)]) > thr) continue;
        const Vec v = eig_column(e, i);
        for (int r = 0; r < a.q(); ++r)
            for (int c = 0; c < a.q(); ++c) p(r, c) += v[size_t(r)] * std::conj(v[size_t(c)]);
    }
    return hermitian_part(p);
}

// Projection onto ran A = (ker A)^perp.
inline HermitianMatrix range_projection(const HermitianMatrix& a, const Tolerances& tol) {
    return HermitianMatrix::identity(a.q()) - kernel_projection(a, tol);
}

// Moore-Penrose inverse of a Hermitian matrix via spectral truncation.
inline Mat pinv(const HermitianMatrix& a, const Tolerances& tol) {
    const EigResult e = eig_hermitian(a);
    const double thr = rank_threshold(a.frob(), tol);
    Mat out(a.q(), a.q());
    for (int i = 0; i < a.q(); ++i) {
        const double lam = e.values[size_t(i)];
        if (std::abs(lam) <= thr) continue;
        const Vec v = eig_column(e, i);
        for (int r = 0; r < a.q(); ++r)
            for (int c = 0; c < a.q(); ++c)
                out(r, c) += (1.0 / lam) * v[size_t(r)] * std::conj(v[size_t(c)]);
    }
    return out;
}

// A^{1/2} and A^{-1/2} for PSD input (eigenvalues clamped at 0).
inline HermitianMatrix sqrt_psd(const HermitianMatrix& a) {
    const EigResult e = eig_hermitian(a);
    Mat out(a.q(), a.q());
    for (int i = 0; i < a.q(); ++i) {
        const double lam = std::max(0.0, e.values[size_t(i)]);
        if (lam == 0.0) continue;
        const double s = std::sqrt(lam);
        const Vec v = eig_column(e, i);
        for (int r = 0; r < a.q(); ++r)
            for (int c = 0; c < a.q(); ++c) out(r, c) += s * v[size_t(r)] * std::conj(v[size_t(c)]);
    }
    return hermitian_part(out);
}

inline HermitianMatrix inv_sqrt_pd(const HermitianMatrix& a, const Tolerances& tol) {
    const EigResult e = eig_hermitian(a);
    const double thr = rank_threshold(a.frob(), tol);
    if (e.values.back() <= thr)
        throw std::domain_error("inv_sqrt_pd: matrix is not positive definite");
    Mat out(a.q(), a.q());
    for (int i = 0; i < a.q(); ++i) {
        const double s = 1.0 / std::sqrt(e.values[size_t(i)]);
        const Vec v = eig_column(e, i);
        for (int r = 0; r < a.q(); ++r)
            for (int c = 0; c < a.q(); ++c) out(r, c) += s * v[size_t(r)] * std::conj(v[size_t(c)]);
    }
    return hermitian_part(out);
}

// The six equivalent orthogonality statements for a PSD pair (Lemma on
// trace-zero pairs): the report carries all of them so tests can check they
// agree.
struct OrthogonalityReport {
    bool inner_zero = false;       // <A,B> = 0
    bool aba_zero = false;         // ABA = O
    bool ba_zero = false;          // BA = O
    bool ab_zero = false;          // AB = O
    bool ranges_orthogonal = false;
    bool block_form = false;       // A has zero upper-left block on ran B + ker B
    bool all_agree() const {
        return inner_zero == aba_zero && aba_zero == ba_zero && ba_zero == ab_zero &&
               ab_zero == ranges_orthogonal && ranges_orthogonal == block_form;
    }
};

inline OrthogonalityReport check_orthogonality_equivalences(const HermitianMatrix& a,
                                                            const HermitianMatrix& b,
                                                            const Tolerances& tol) {
    if (!is_psd(a, tol) || !is_psd(b, tol))
        throw std::domain_error("check_orthogonality_equivalences: inputs must be PSD");
    const double scale = std::max({1.0, a.frob(), b.frob()});
    const double thr = 1e-10 * scale * scale;
    OrthogonalityReport rep;
    rep.inner_zero = std::abs(trace_inner(a, b)) <= thr;
    const Mat ab = a.mat() * b.mat();
    rep.ab_zero = ab.frob() <= thr;
    rep.ba_zero = (b.mat() * a.mat()).frob() <= thr;
    rep.aba_zero = (ab * a.mat()).frob() <= thr * scale;
    const HermitianMatrix pa = range_projection(a, tol);
    const HermitianMatrix pb = range_projection(b, tol);
    rep.ranges_orthogonal = (pa.mat() * pb.mat()).frob() <= 1e-8;
    // block test: compress A to ran B
    rep.block_form = (pb.mat() * a.mat() * pb.mat()).frob() <= thr;
    return rep;
}

}  // namespace matmom
