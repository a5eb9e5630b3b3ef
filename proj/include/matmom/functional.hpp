// Linear functionals on a MatrixSpace, matrix maps E -> H_q, the Lambda_L /
// L_otimes constructions and their identity checks, plus kernel bases.
#pragma once

#include <matmom/model.hpp>

#include <cstdint>
#include <random>

namespace matmom {

// Lambda stored as its value vector on the declared basis of the space.
struct Functional {
    const MatrixSpace* space = nullptr;
    std::vector<double> values;

    double operator()(const std::vector<double>& coeffs) const {
        if (coeffs.size() != values.size())
            throw std::invalid_argument("Functional: coefficient length mismatch");
        double s = 0.0;
        for (size_t i = 0; i < values.size(); ++i) s += coeffs[i] * values[i];
        return s;
    }

    double norm() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }
};

// L : E -> H_q stored by its images on the scalar basis.
struct MatrixMap {
    const ScalarSpace* scalar_space = nullptr;
    int q = 0;
    std::vector<HermitianMatrix> images;

    HermitianMatrix operator()(const std::vector<double>& coeffs) const {
        if (coeffs.size() != images.size())
            throw std::invalid_argument("MatrixMap: coefficient length mismatch");
        HermitianMatrix out = HermitianMatrix::zero(q);
        for (size_t i = 0; i < images.size(); ++i)
            if (coeffs[i] != 0.0) out += coeffs[i] * images[i];
        return out;
    }

    int rank_of_range(const Tolerances& tol) const {
        std::vector<std::vector<double>> rows;
        for (const auto& h : images) rows.push_back(detail::flatten(h));
        return detail::gram_rank(rows, tol);
    }
};

// sum_j tr(F(x_j) M_j)
inline double integrate(const AtomicMeasure& mu, const MatrixFunction& f) {
    double s = 0.0;
    for (const auto& a : mu.atoms()) {
        if (a.point < 0 || a.point >= int(f.table.size()))
            throw std::invalid_argument("integrate: measure atom outside the table of " + f.name);
        s += trace_inner(f.table[size_t(a.point)], a.mass);
    }
    return s;
}

inline Functional lambda_from_measure(const AtomicMeasure& mu, const MatrixSpace& space) {
    Functional lam;
    lam.space = &space;
    lam.values.reserve(size_t(space.dim()));
    for (const auto& f : space.basis()) lam.values.push_back(integrate(mu, f));
    return lam;
}

inline MatrixMap L_from_measure(const AtomicMeasure& mu, const ScalarSpace& e, int q) {
    MatrixMap l;
    l.scalar_space = &e;
    l.q = q;
    for (const auto& f : e.basis()) {
        HermitianMatrix img = HermitianMatrix::zero(q);
        for (const auto& a : mu.atoms()) {
            if (a.point >= int(f.table.size()))
                throw std::invalid_argument("L_from_measure: atom outside table of " + f.name);
            img += f.table[size_t(a.point)] * a.mass;
        }
        l.images.push_back(img);
    }
    return l;
}

// Lambda_L(f_i H_jk) = <L(f_i), H_jk> on a space built by make_hq_space.
inline Functional lambda_from_L(const MatrixMap& l, const MatrixSpace& hq_space) {
    if (!hq_space.has_hq_structure())
        throw std::invalid_argument("lambda_from_L: space lacks H_q(E) structure");
    if (hq_space.scalar_dim() != int(l.images.size()))
        throw std::invalid_argument("lambda_from_L: scalar dimension mismatch");
    const auto hjk = hjk_basis(hq_space.q());
    Functional lam;
    lam.space = &hq_space;
    lam.values.reserve(size_t(hq_space.dim()));
    for (const auto& tag : hq_space.hq_tags())
        lam.values.push_back(trace_inner(l.images[size_t(tag.scalar_index)],
                                         hjk[size_t(tag.j) * hq_space.q() + size_t(tag.k)]));
    return lam;
}

// Inverse of lambda_from_L: L(f_i) = sum_jk Lambda(f_i H_jk) H_jk.
inline MatrixMap L_from_lambda(const Functional& lam, const ScalarSpace& e) {
    const MatrixSpace& space = *lam.space;
    if (!space.has_hq_structure())
        throw std::invalid_argument("L_from_lambda: space lacks H_q(E) structure");
    const int q = space.q();
    const auto hjk = hjk_basis(q);
    MatrixMap l;
    l.scalar_space = &e;
    l.q = q;
    l.images.assign(size_t(space.scalar_dim()), HermitianMatrix::zero(q));
    for (int b = 0; b < space.dim(); ++b) {
        const auto& tag = space.hq_tags()[size_t(b)];
        l.images[size_t(tag.scalar_index)] +=
            lam.values[size_t(b)] * hjk[size_t(tag.j) * q + size_t(tag.k)];
    }
    return l;
}

// L_otimes(F) = sum_jk H_jk (x) L(<F, H_jk>) as a q^2 x q^2 matrix.
// transpose_images applies L^T instead of L (needed for the (LT) identity).
inline Mat l_otimes(const MatrixMap& l, const MatrixSpace& hq_space,
                    const std::vector<double>& coeffs, bool transpose_images = false) {
    if (!hq_space.has_hq_structure())
        throw std::invalid_argument("l_otimes: space lacks H_q(E) structure");
    const int q = hq_space.q();
    const auto hjk = hjk_basis(q);
    // <F, H_jk> = sum_i c_{ijk} f_i, so L(<F,H_jk>) = sum_i c_{ijk} L(f_i)
    std::vector<HermitianMatrix> ljk(size_t(q) * q, HermitianMatrix::zero(q));
    for (int b = 0; b < hq_space.dim(); ++b) {
        const double c = coeffs[size_t(b)];
        if (c == 0.0) continue;
        const auto& tag = hq_space.hq_tags()[size_t(b)];
        ljk[size_t(tag.j) * q + size_t(tag.k)] += c * l.images[size_t(tag.scalar_index)];
    }
    Mat out(q * q, q * q);
    for (int j = 0; j < q; ++j)
        for (int k = 0; k < q; ++k) {
            const Mat& img = ljk[size_t(j) * q + size_t(k)].mat();
            out += kron(hjk[size_t(j) * q + size_t(k)].mat(),
                        transpose_images ? img.transpose() : img);
        }
    return out;
}

// Orthonormal basis of {c : <c, values> = 0}; the whole space when Lambda = 0.
inline std::vector<std::vector<double>> kernel_basis(const Functional& lam) {
    const int n = int(lam.values.size());
    const double nrm = lam.norm();
    std::vector<std::vector<double>> basis;
    if (nrm <= 1e-300) {
        for (int i = 0; i < n; ++i) {
            std::vector<double> e(size_t(n), 0.0);
            e[size_t(i)] = 1.0;
            basis.push_back(std::move(e));
        }
        return basis;
    }
    std::vector<double> u(lam.values);
    for (double& x : u) x /= nrm;
    // Gram-Schmidt of the coordinate directions against u
    for (int i = 0; i < n && int(basis.size()) < n - 1; ++i) {
        std::vector<double> v(size_t(n), 0.0);
        v[size_t(i)] = 1.0;
        double du = u[size_t(i)];
        for (int j = 0; j < n; ++j) v[size_t(j)] -= du * u[size_t(j)];
        for (const auto& b : basis) {
            double d = 0.0;
            for (int j = 0; j < n; ++j) d += v[size_t(j)] * b[size_t(j)];
            for (int j = 0; j < n; ++j) v[size_t(j)] -= d * b[size_t(j)];
        }
        double vn = 0.0;
        for (double x : v) vn += x * x;
        vn = std::sqrt(vn);
        if (vn <= 1e-10) continue;
        for (double& x : v) x /= vn;
        basis.push_back(std::move(v));
    }
    return basis;
}

struct IdentityCheck {
    std::string check;
    double residual = 0.0;
    bool pass = false;
};

struct IdentityReport {
    std::vector<IdentityCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

// deterministic normal deviates independent of libstdc++'s distributions
class NormalGen {
  public:
    explicit NormalGen(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(6.283185307179586476925286766559 * u2);
        have_ = true;
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }
    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    bool have_ = false;
    double spare_ = 0.0;
};

inline Vec mat_vec_columns(const Mat& x) {  // vec(X) = sum_r e_r (x) x_r
    Vec v(size_t(x.rows()) * size_t(x.cols()));
    for (int r = 0; r < x.cols(); ++r)
        for (int i = 0; i < x.rows(); ++i) v[size_t(r) * x.rows() + size_t(i)] = x(i, r);
    return v;
}

// Q = sum_j e_j^T (x) I_q (x) e_j, the Kronecker commutation permutation
inline Mat commutation_permutation(int q) {
    Mat qm(q * q, q * q);
    for (int j = 0; j < q; ++j) {
        Mat ejT(1, q), ej(q, 1);
        ejT(0, j) = 1.0;
        ej(j, 0) = 1.0;
        qm += kron(kron(ejT, Mat::identity(q)), ej);
    }
    return qm;
}

}  // namespace detail

// Randomized checks of the basic Lambda_L / L_otimes identities. `corrupt`
// perturbs L_otimes so negative-control tests can see the LT check fail.
inline IdentityReport verify_section3_identities(const MatrixMap& l, const MatrixSpace& hq_space,
                                                 const PointSet& pts, int trials,
                                                 std::uint64_t seed, bool corrupt = false) {
    const int q = hq_space.q();
    const int ne = int(l.images.size());
    const int dim = hq_space.dim();
    const auto hjk = hjk_basis(q);
    const Functional lam = lambda_from_L(l, hq_space);
    detail::NormalGen rng(seed);

    auto rand_coeffs = [&](int n) {
        std::vector<double> c(static_cast<size_t>(n));
        for (double& x : c) x = rng();
        return c;
    };
    auto rand_cvec = [&](int n) {
        Vec v(static_cast<size_t>(n));
        for (auto& z : v) z = cplx(rng(), rng());
        return v;
    };

    // coefficients of f*H in the {f_i H_jk} basis
    auto embed_fH = [&](const std::vector<double>& f, const HermitianMatrix& h) {
        std::vector<double> c(size_t(dim), 0.0);
        for (int b = 0; b < dim; ++b) {
            const auto& tag = hq_space.hq_tags()[size_t(b)];
            c[size_t(b)] = f[size_t(tag.scalar_index)] *
                           trace_inner(h, hjk[size_t(tag.j) * q + size_t(tag.k)]);
        }
        return c;
    };

    double r_a = 0, r_b = 0, r_c = 0, r_d = 0, r_lt = 0, r_lte = 0, r_gen = 0;

    const Mat qperm = detail::commutation_permutation(q);
    const Vec e_diag = [&] {
        Vec e(size_t(q) * q, cplx(0.0));
        for (int j = 0; j < q; ++j) e[size_t(j) * q + size_t(j)] = 1.0;
        return e;
    }();

    for (int t = 0; t < trials; ++t) {
        const std::vector<double> f = rand_coeffs(ne);
        const HermitianMatrix h = [&] {
            Mat m(q, q);
            for (int i = 0; i < q; ++i) {
                m(i, i) = rng();
                for (int j = i + 1; j < q; ++j) {
                    const cplx z(rng(), rng());
                    m(i, j) = z;
                    m(j, i) = std::conj(z);
                }
            }
            return HermitianMatrix(std::move(m));
        }();
        const Vec v = rand_cvec(q);
        const int x = int(rng.raw() % std::uint64_t(pts.size()));
        const std::vector<double> fc = rand_coeffs(dim);

        // (a) Lambda_L(f H) = <L(f), H>
        r_a = std::max(r_a, std::abs(lam(embed_fH(f, h)) - trace_inner(l(f), h)));

        // F(x) for the random coefficient vector
        const HermitianMatrix fx = hq_space.eval(fc, x);

        // (b) Lambda_{H l_x}(F) = <F(x), H>
        MatrixMap hlx{l.scalar_space, q, {}};
        for (int i = 0; i < ne; ++i)
            hlx.images.push_back((*l.scalar_space)[i].table[size_t(x)] * h);
        r_b = std::max(r_b, std::abs(lambda_from_L(hlx, hq_space)(fc) - trace_inner(fx, h)));

        // (c) Lambda_{vv* l_x}(F) = v* F(x) v
        MatrixMap vvlx{l.scalar_space, q, {}};
        const HermitianMatrix vv = HermitianMatrix::rank_one(v);
        for (int i = 0; i < ne; ++i)
            vvlx.images.push_back((*l.scalar_space)[i].table[size_t(x)] * vv);
        cplx quad = 0.0;
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) quad += std::conj(v[size_t(i)]) * fx(i, j) * v[size_t(j)];
        r_c = std::max(r_c, std::abs(lambda_from_L(vvlx, hq_space)(fc) - quad.real()));

        // (d) Lambda_L(f vv*) = v* L(f) v
        const HermitianMatrix lf = l(f);
        cplx quad2 = 0.0;
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) quad2 += std::conj(v[size_t(i)]) * lf(i, j) * v[size_t(j)];
        r_d = std::max(r_d, std::abs(lam(embed_fH(f, vv)) - quad2.real()));

        // (LT) L_otimes(F^T) = (L^T_otimes(F))^T
        // F^T has coefficients eps(k-j) c_{ijk}
        std::vector<double> fct(static_cast<size_t>(dim));
        for (int b = 0; b < dim; ++b) {
            const auto& tag = hq_space.hq_tags()[size_t(b)];
            fct[size_t(b)] = (tag.k >= tag.j ? 1.0 : -1.0) * fc[size_t(b)];
        }
        Mat lhs = l_otimes(l, hq_space, fct, false);
        if (corrupt) lhs(0, 0) += 0.5;
        Mat rhs = l_otimes(l, hq_space, fc, true).transpose();
        rhs -= lhs;
        r_lt = std::max(r_lt, rhs.frob());

        // (LTe) Lambda_L(F) = e* L^T_otimes(F) e
        const Mat lot_t = l_otimes(l, hq_space, fc, true);
        cplx lte = 0.0;
        {
            const Vec w = lot_t.apply(e_diag);
            for (size_t i = 0; i < w.size(); ++i) lte += std::conj(e_diag[i]) * w[i];
        }
        r_lte = std::max(r_lte, std::abs(lte.real() - lam(fc)) + std::abs(lte.imag()));

        // (genLTe) Lambda_L(X* F X) = x* L^T_otimes(F) x with x = Q vec(X)
        Mat xm(q, q);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) xm(i, j) = cplx(rng(), rng());
        // coefficients of X* F X: c'_{irs} = sum_jk c_{ijk} <X* H_jk X, H_rs>
        std::vector<double> cxfx(size_t(dim), 0.0);
        {
            std::vector<Mat> conj_h(size_t(q) * q, Mat(q, q));
            for (int j = 0; j < q; ++j)
                for (int k = 0; k < q; ++k)
                    conj_h[size_t(j) * q + size_t(k)] =
                        xm.adjoint() * hjk[size_t(j) * q + size_t(k)].mat() * xm;
            for (int b = 0; b < dim; ++b) {
                const auto& tb = hq_space.hq_tags()[size_t(b)];
                if (fc[size_t(b)] == 0.0) continue;
                const HermitianMatrix conj_jk =
                    hermitian_part(conj_h[size_t(tb.j) * q + size_t(tb.k)]);
                for (int b2 = 0; b2 < dim; ++b2) {
                    const auto& t2 = hq_space.hq_tags()[size_t(b2)];
                    if (t2.scalar_index != tb.scalar_index) continue;
                    cxfx[size_t(b2)] +=
                        fc[size_t(b)] *
                        trace_inner(conj_jk, hjk[size_t(t2.j) * q + size_t(t2.k)]);
                }
            }
        }
        const Vec xq = qperm.apply(detail::mat_vec_columns(xm));
        cplx gen = 0.0;
        {
            const Vec w = lot_t.apply(xq);
            for (size_t i = 0; i < w.size(); ++i) gen += std::conj(xq[i]) * w[i];
        }
        r_gen = std::max(r_gen, std::abs(gen.real() - lam(cxfx)) + std::abs(gen.imag()));
    }

    const double tol = 1e-10;
    IdentityReport rep;
    auto push = [&](const char* name, double r) { rep.checks.push_back({name, r, r <= tol}); };
    push("propertyL_a_fH", r_a);
    push("propertyL_b_Hlx", r_b);
    push("propertyL_c_vvlx", r_c);
    push("propertyL_d_fvv", r_d);
    push("LT_transpose", r_lt);
    push("LTe_vectorized", r_lte);
    push("genLTe_quadratic", r_gen);
    return rep;
}

}  // namespace matmom
