#include <matmom/positivity.hpp>

#include "doctest.h"
#include "support.hpp"

using namespace matmom;
using testsupport::Rng;

namespace {

PointSet grid_points(const std::vector<double>& xs) {
    std::vector<Point> pts;
    for (double x : xs) pts.push_back({coord_label(x), x});
    return PointSet(std::move(pts));
}

ScalarSpace monomials(const PointSet& pts, int degree, const Tolerances& tol) {
    std::vector<ScalarFunction> basis;
    for (int d = 0; d <= degree; ++d) {
        ScalarFunction f;
        f.name = "x^" + std::to_string(d);
        for (const auto& p : pts.points()) f.table.push_back(std::pow(*p.coord, d));
        basis.push_back(std::move(f));
    }
    return ScalarSpace(pts, std::move(basis), tol);
}

struct Exa1 {
    Tolerances tol;
    PointSet pts = grid_points({-2, -1, -0.5, 0, 0.5, 1, 1.5, 2});
    MatrixSpace space;
    AtomicMeasure mu;

    Exa1() {
        std::vector<MatrixFunction> basis(3);
        basis[0].name = "F1";
        basis[1].name = "F2";
        basis[2].name = "F3";
        Mat a3(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) a3(i, j) = 1.0;
        for (const auto& p : pts.points()) {
            const double x = *p.coord;
            basis[0].table.push_back(HermitianMatrix::diag({1, 0}));
            basis[1].table.push_back(HermitianMatrix::diag({0, x}));
            basis[2].table.push_back(x * x * (x - 1) * (x - 1) * HermitianMatrix(a3));
        }
        space = MatrixSpace(2, pts, std::move(basis), tol);
        mu = AtomicMeasure(2, {{pts.index_of("0"), HermitianMatrix::identity(2)}}, tol);
    }
};

// the constant-space instance: E = H_2(span{1}) on two points, Lambda = trace
struct TraceInstance {
    Tolerances tol;
    PointSet pts = grid_points({0, 1});
    ScalarSpace e = monomials(pts, 0, tol);
    MatrixSpace hq = make_hq_space(e, 2, pts, tol);
    Functional lam;

    TraceInstance() {
        lam.space = &hq;
        const auto hjk = hjk_basis(2);
        for (const auto& tag : hq.hq_tags())
            lam.values.push_back(2.0 *
                                 trace_inner(HermitianMatrix::identity(2),
                                             hjk[size_t(tag.j) * 2 + size_t(tag.k)]));
    }
};

}  // namespace

TEST_SUITE("positivity") {

TEST_CASE("cone membership") {
    Exa1 fx;
    CHECK(is_in_cone({0, 0, 1}, fx.space, fx.pts, fx.tol));   // F3
    CHECK(is_in_cone({1, 0, 0}, fx.space, fx.pts, fx.tol));   // F1
    CHECK_FALSE(is_in_cone({0, 1, 0}, fx.space, fx.pts, fx.tol));  // F2 changes sign
    CHECK(is_in_cone({0, 0, 0}, fx.space, fx.pts, fx.tol));
}

TEST_CASE("exa1 functional is not strictly positive; witness spans F3") {
    Exa1 fx;
    auto lam = lambda_from_measure(fx.mu, fx.space);
    auto rep = certify_strict_positivity(lam, fx.pts, fx.tol);
    CHECK(rep.strictly_positive == Tri::no);
    CHECK(std::abs(rep.margin) <= 1e-6);
    REQUIRE(rep.witness.has_value());
    const auto& w = *rep.witness;
    // Lambda(witness) ~ 0 and pointwise PSD
    CHECK(std::abs(lam(w)) <= 1e-6);
    for (int p = 0; p < fx.pts.size(); ++p)
        CHECK(lambda_min(fx.space.eval(w, p)) >= -1e-6);
    // the witness is (numerically) a multiple of F3
    const double scale = std::max({std::abs(w[0]), std::abs(w[1]), std::abs(w[2])});
    CHECK(std::abs(w[0]) <= 1e-4 * scale);
    CHECK(std::abs(w[1]) <= 1e-4 * scale);
}

TEST_CASE("trace functional is strictly positive with margin 1") {
    // on the normalization sum_x tr F(x) = 1 this Lambda IS the normalization,
    // so the slice minimum is exactly 1
    TraceInstance fx;
    auto rep = certify_strict_positivity(fx.lam, fx.pts, fx.tol);
    CHECK(rep.strictly_positive == Tri::yes);
    CHECK(rep.margin == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("a negative value on a PSD basis element fails immediately") {
    Exa1 fx;
    Functional bad{&fx.space, {1.0, 0.0, -0.5}};  // Lambda(F3) < 0, F3 in the cone
    auto rep = certify_strict_positivity(bad, fx.pts, fx.tol);
    CHECK(rep.strictly_positive == Tri::no);
    CHECK(rep.margin < -1e-3);
}

TEST_CASE("find_representing_measure on E0635") {
    const Tolerances tol;
    auto pts = grid_points({-2, -1, 0, 1, 2});
    auto e = monomials(pts, 2, tol);
    auto hq = make_hq_space(e, 2, pts, tol);
    MatrixMap l{&e, 2, {}};
    for (int i = 0; i < 3; ++i)
        l.images.push_back(HermitianMatrix::diag({e[i].table[size_t(pts.index_of("1"))],
                                                  e[i].table[size_t(pts.index_of("-1"))]}));
    auto lam = lambda_from_L(l, hq);

    auto res = find_representing_measure(lam, pts, tol);
    REQUIRE(res.status == FeasStatus::feasible);
    // reproduces Lambda and lives on {-1, 1} with masses e11 / e22
    auto back = lambda_from_measure(res.measure, hq);
    for (int b = 0; b < hq.dim(); ++b)
        CHECK(std::abs(back.values[size_t(b)] - lam.values[size_t(b)]) <= 1e-5);
    CHECK(int(res.measure.atoms().size()) <= hq.dim());
    for (const auto& a : res.measure.atoms()) {
        const std::string& lbl = pts[a.point].label;
        const bool on_support = lbl == "1" || lbl == "-1";
        CHECK(on_support);
    }
}

TEST_CASE("infeasible functional is reported, not fabricated") {
    // Case 1.1 flavour: R = diag(0,1) with S = e12 + e21 has no measure
    const Tolerances tol;
    auto pts = grid_points({-1, 0, 1});
    auto e = monomials(pts, 1, tol);
    auto hq = make_hq_space(e, 2, pts, tol);
    Mat s01(2, 2);
    s01(0, 1) = 1.0;
    s01(1, 0) = 1.0;
    MatrixMap l{&e, 2, {HermitianMatrix::diag({0, 1}), HermitianMatrix(s01)}};
    auto lam = lambda_from_L(l, hq);
    auto res = find_representing_measure(lam, pts, tol);
    CHECK(res.status != FeasStatus::feasible);
}

TEST_CASE("representing-measure round trip on random functionals") {
    const Tolerances tol;
    Rng rng(55);
    auto pts = grid_points({-1, 0, 1, 2});
    auto e = monomials(pts, 1, tol);
    auto hq = make_hq_space(e, 2, pts, tol);
    for (int t = 0; t < 10; ++t) {
        std::vector<MeasureAtom> atoms;
        for (int a = 0; a < 2; ++a)
            atoms.push_back({rng.uniform_int(0, 3), testsupport::random_psd(rng, 2, 1 + a)});
        AtomicMeasure mu(2, std::move(atoms), tol);
        auto lam = lambda_from_measure(mu, hq);
        auto res = find_representing_measure(lam, pts, tol);
        REQUIRE(res.status == FeasStatus::feasible);
        auto back = lambda_from_measure(res.measure, hq);
        for (int b = 0; b < hq.dim(); ++b)
            CHECK(std::abs(back.values[size_t(b)] - lam.values[size_t(b)]) <=
                  1e-5 * (1.0 + std::abs(lam.values[size_t(b)])));
    }
}

TEST_CASE("augment_atom on the trace functional") {
    TraceInstance fx;
    auto res = augment_atom(fx.lam, fx.pts, fx.pts.index_of("0"),
                            HermitianMatrix::diag({1, 0}), fx.tol);
    CHECK(res.epsilon >= 0.5);
    // the combined measure represents Lambda and dominates eps*M at the point
    auto back = lambda_from_measure(res.measure, fx.hq);
    for (int b = 0; b < fx.hq.dim(); ++b)
        CHECK(std::abs(back.values[size_t(b)] - fx.lam.values[size_t(b)]) <= 1e-5);
    HermitianMatrix at0 = HermitianMatrix::zero(2);
    for (const auto& a : res.measure.atoms())
        if (a.point == fx.pts.index_of("0")) at0 += a.mass;
    CHECK(lambda_min(at0 - res.epsilon * HermitianMatrix::diag({1, 0})) >= -fx.tol.psd_eps * 10);

    CHECK_THROWS_AS(augment_atom(fx.lam, fx.pts, 0, HermitianMatrix::zero(2), fx.tol),
                    std::invalid_argument);
}

TEST_CASE("augment_atom rejects non-strictly-positive functionals") {
    const Tolerances tol;
    auto pts = grid_points({-2, -1, 0, 1, 2});
    auto e = monomials(pts, 2, tol);
    auto hq = make_hq_space(e, 2, pts, tol);
    MatrixMap l{&e, 2, {}};
    for (int i = 0; i < 3; ++i)
        l.images.push_back(HermitianMatrix::diag({e[i].table[size_t(pts.index_of("1"))],
                                                  e[i].table[size_t(pts.index_of("-1"))]}));
    auto lam = lambda_from_L(l, hq);
    CHECK_THROWS_AS(augment_atom(lam, pts, pts.index_of("0"), HermitianMatrix::identity(2), tol),
                    std::domain_error);
}

TEST_CASE("measure-induced functionals are cone-nonnegative") {
    const Tolerances tol;
    Rng rng(71);
    Exa1 fx;
    for (int t = 0; t < 100; ++t) {
        std::vector<MeasureAtom> atoms;
        for (int a = 0; a < 2; ++a)
            atoms.push_back({rng.uniform_int(0, fx.pts.size() - 1),
                             testsupport::random_psd(rng, 2, 1 + a % 2)});
        auto lam = lambda_from_measure(AtomicMeasure(2, std::move(atoms), tol), fx.space);
        // random cone elements: conic combinations of F1 and F3
        std::vector<double> c{std::abs(rng.normal()), 0.0, std::abs(rng.normal())};
        CHECK(lam(c) >= -tol.eq_eps);
    }
}

}  // TEST_SUITE
