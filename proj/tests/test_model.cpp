#include <matmom/model.hpp>

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

// exa1-style descriptors: F1 = A1, F2 = x A2, F3 = x^2(x-1)^2 A3
std::vector<PolynomialMatrixDescriptor> exa1_descriptors() {
    auto constant = [](int j, int k) {
        std::vector<std::vector<std::vector<double>>> re(
            2, std::vector<std::vector<double>>(2, std::vector<double>{0.0}));
        re[size_t(j)][size_t(k)] = {1.0};
        return re;
    };
    PolynomialMatrixDescriptor f1{"F1", 2, constant(0, 0), {}};
    PolynomialMatrixDescriptor f2{"F2", 2, constant(1, 1), {}};
    f2.re[1][1] = {0.0, 1.0};  // x
    // x^2 (x-1)^2 = x^4 - 2x^3 + x^2 in every entry of the all-ones block
    const std::vector<double> quartic{0.0, 0.0, 1.0, -2.0, 1.0};
    PolynomialMatrixDescriptor f3{"F3", 2,
                                  std::vector<std::vector<std::vector<double>>>(
                                      2, std::vector<std::vector<double>>(2, quartic)),
                                  {}};
    return {f1, f2, f3};
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("point sets enforce unique labels and coord consistency") {
    CHECK_THROWS_AS(PointSet({{"a", 0.0}, {"a", 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(PointSet({{"a", 0.0}, {"b", std::nullopt}}), std::invalid_argument);
    PointSet ps({{"a", std::nullopt}, {"b", std::nullopt}});
    CHECK(ps.index_of("b") == 1);
}

TEST_CASE("hq space construction") {
    const Tolerances tol;
    auto pts = grid_points({0, 1});
    auto e1 = monomials(pts, 0, tol);
    auto hq = make_hq_space(e1, 2, pts, tol);
    CHECK(hq.dim() == 4);
    CHECK(hq.has_hq_structure());
    for (const auto& f : hq.basis())
        CHECK(testsupport::max_entry_diff(f.table[0], f.table[1]) <= 1e-15);

    auto pts5 = grid_points({-2, -1, 0, 1, 2});
    auto e3 = monomials(pts5, 2, tol);
    auto hq2 = make_hq_space(e3, 2, pts5, tol);
    CHECK(hq2.dim() == 12);

    // stacked tables have full rank q^2 dim E
    std::vector<std::vector<double>> rows;
    for (const auto& f : hq2.basis()) {
        std::vector<double> row;
        for (const auto& h : f.table) {
            auto part = detail::flatten(h);
            row.insert(row.end(), part.begin(), part.end());
        }
        rows.push_back(std::move(row));
    }
    CHECK(detail::gram_rank(rows, tol) == 12);
}

TEST_CASE("hq round trip recovers the scalar slots") {
    const Tolerances tol;
    auto pts = grid_points({-1, 0, 2});
    auto e = monomials(pts, 1, tol);
    auto hq = make_hq_space(e, 2, pts, tol);
    const auto hjk = hjk_basis(2);
    for (int i = 0; i < hq.dim(); ++i) {
        const auto tag = hq.hq_tags()[size_t(i)];
        for (int p = 0; p < pts.size(); ++p) {
            const double got =
                trace_inner(hq[i].table[size_t(p)], hjk[size_t(tag.j) * 2 + size_t(tag.k)]);
            CHECK(got == doctest::Approx(e[tag.scalar_index].table[size_t(p)]).epsilon(1e-13));
        }
    }
}

TEST_CASE("polynomial instantiation matches hand evaluation") {
    const Tolerances tol;
    auto [pts, space] = instantiate_polynomial(exa1_descriptors(), {-2, -1, 0, 0.5, 1, 2}, tol);
    CHECK(pts.size() == 6);
    CHECK(space.dim() == 3);
    const int i0 = pts.index_of("0"), i1 = pts.index_of("1"), i2 = pts.index_of("2");
    CHECK(space[1].table[size_t(i0)].frob() == doctest::Approx(0.0));  // F2(0) = O
    CHECK(space[2].table[size_t(i1)].frob() == doctest::Approx(0.0));  // F3(1) = O
    // F3(2) = 4 * all-ones
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            CHECK(space[2].table[size_t(i2)](a, b).real() == doctest::Approx(4.0).epsilon(1e-13));

    // constant descriptor: identical value at every point
    PolynomialMatrixDescriptor c{"C", 2,
                                 std::vector<std::vector<std::vector<double>>>(
                                     2, std::vector<std::vector<double>>(2, {0.0})),
                                 {}};
    c.re[0][0] = {2.0};
    c.re[1][1] = {3.0};
    auto [pts2, space2] = instantiate_polynomial({c}, {-1, 0, 1}, tol);
    for (int p = 0; p < 3; ++p)
        CHECK(testsupport::max_entry_diff(space2[0].table[size_t(p)],
                                          HermitianMatrix::diag({2, 3})) <= 1e-15);

    // non-Hermitian descriptor rejected
    PolynomialMatrixDescriptor bad = c;
    bad.re[0][1] = {1.0};  // symmetric slot left at 0 on the other side
    CHECK_THROWS_AS(instantiate_polynomial({bad}, {0.0, 1.0}, tol), std::invalid_argument);
}

TEST_CASE("atomic measures merge duplicates and drop null atoms") {
    const Tolerances tol;
    auto pts = grid_points({0, 1});
    AtomicMeasure mu(2,
                     {{0, HermitianMatrix::diag({1, 0})},
                      {0, HermitianMatrix::diag({0, 1})},
                      {1, HermitianMatrix::zero(2)}},
                     tol);
    REQUIRE(mu.atoms().size() == 1);
    CHECK(testsupport::max_entry_diff(mu.atoms()[0].mass, HermitianMatrix::identity(2)) <= 1e-15);

    CHECK_THROWS_AS(AtomicMeasure(2, {{0, HermitianMatrix::diag({1, -1})}}, tol),
                    std::domain_error);
    (void)pts;
}

TEST_CASE("measure statistics") {
    const Tolerances tol;
    auto pts = grid_points({-1, 0, 1});

    auto s1 = measure_stats(AtomicMeasure(2, {{1, HermitianMatrix::identity(2)}}, tol), pts, tol);
    CHECK(s1.atnr == 1);
    CHECK(s1.rank == 2);

    auto s2 = measure_stats(AtomicMeasure(2,
                                          {{2, HermitianMatrix::diag({1, 0})},
                                           {0, HermitianMatrix::diag({0, 1})}},
                                          tol),
                            pts, tol);
    CHECK(s2.atnr == 2);
    CHECK(s2.rank == 2);

    Mat ones(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ones(i, j) = 1.0;
    auto s3 = measure_stats(AtomicMeasure(3, {{1, HermitianMatrix(ones)}}, tol), pts, tol);
    CHECK(s3.atnr == 1);
    CHECK(s3.rank == 1);
    CHECK(s3.atnr <= s3.rank);
}

TEST_CASE("trace measure and density") {
    const Tolerances tol;

    auto tm = trace_measure_and_density(AtomicMeasure(2, {{0, HermitianMatrix::identity(2)}}, tol));
    REQUIRE(tm.tau.size() == 1);
    CHECK(tm.tau[0].second == doctest::Approx(2.0));
    CHECK(testsupport::max_entry_diff(tm.phi[0].second, 0.5 * HermitianMatrix::identity(2)) <=
          1e-15);

    Mat ones(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ones(i, j) = 1.0;
    auto tm3 = trace_measure_and_density(AtomicMeasure(3, {{0, HermitianMatrix(ones)}}, tol));
    CHECK(tm3.tau[0].second == doctest::Approx(3.0));
    CHECK(testsupport::max_entry_diff(tm3.phi[0].second, (1.0 / 3.0) * HermitianMatrix(ones)) <=
          1e-15);

    // sum_j tr(F(x_j) M_j) equals the tau-integral of <F, Phi> for random data
    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
        const int q = 2 + t % 2;
        std::vector<MeasureAtom> atoms;
        for (int j = 0; j < 3; ++j) atoms.push_back({j, testsupport::random_psd(rng, q, 1 + j % q)});
        AtomicMeasure mu(q, std::move(atoms), tol);
        std::vector<HermitianMatrix> f;
        for (int j = 0; j < 3; ++j) f.push_back(testsupport::random_hermitian(rng, q));

        double lhs = 0.0;
        for (const auto& a : mu.atoms()) lhs += trace_inner(f[size_t(a.point)], a.mass);
        double rhs = 0.0;
        auto tmr = trace_measure_and_density(mu);
        for (size_t j = 0; j < tmr.tau.size(); ++j)
            rhs += tmr.tau[j].second * trace_inner(f[size_t(tmr.tau[j].first)], tmr.phi[j].second);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

        // reconstruction tau * Phi = mu atom by atom
        for (size_t j = 0; j < tmr.tau.size(); ++j) {
            HermitianMatrix rec = tmr.tau[j].second * tmr.phi[j].second;
            CHECK(testsupport::max_entry_diff(rec, mu.atoms()[j].mass) <= 1e-12);
        }
    }
}

}  // TEST_SUITE
