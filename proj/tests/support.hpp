// Shared helpers for the test suites: deterministic RNG, random Hermitian /
// PSD generators, and small brute-force oracles kept independent of the
// library code paths they check.
#pragma once

#include <matmom/hermitian.hpp>

#include <cstdint>
#include <random>

namespace testsupport {

using matmom::cplx;
using matmom::HermitianMatrix;
using matmom::Mat;
using matmom::Vec;

// Box-Muller on top of mt19937_64 so the stream is identical across
// standard libraries (std::normal_distribution is not portable).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0,1)
        return double(gen_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    cplx cnormal() { return cplx(normal(), normal()); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + int(gen_() % std::uint64_t(hi - lo + 1));
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline HermitianMatrix random_hermitian(Rng& rng, int q, double scale = 1.0) {
    Mat m(q, q);
    for (int i = 0; i < q; ++i) {
        m(i, i) = scale * rng.normal();
        for (int j = i + 1; j < q; ++j) {
            const cplx z = scale * 0.70710678118654752440 * rng.cnormal();
            m(i, j) = z;
            m(j, i) = std::conj(z);
        }
    }
    return HermitianMatrix(std::move(m));
}

inline Vec random_cvector(Rng& rng, int q, double scale = 1.0) {
    Vec v(static_cast<size_t>(q));
    for (auto& z : v) z = scale * rng.cnormal();
    return v;
}

inline HermitianMatrix random_psd(Rng& rng, int q, int rank, double scale = 1.0) {
    Mat m(q, q);
    for (int r = 0; r < rank; ++r) {
        const Vec v = random_cvector(rng, q, scale);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) m(i, j) += v[size_t(i)] * std::conj(v[size_t(j)]);
    }
    return matmom::hermitian_part(m);
}

inline double max_entry_diff(const HermitianMatrix& a, const HermitianMatrix& b) {
    double d = 0.0;
    for (int i = 0; i < a.q(); ++i)
        for (int j = 0; j < a.q(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

}  // namespace testsupport
