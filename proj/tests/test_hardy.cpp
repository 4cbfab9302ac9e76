#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "qnops/blaschke.hpp"
#include "qnops/hardy.hpp"

using namespace qnops;

namespace {

// Brute-force oracle: the plain coefficient series
// sum_n conj(a)^n * b^n for <k_a, k_b>, truncated at N terms.
cplx kernel_pairing_series(cplx a, cplx b, int N) {
    cplx s = 0.0, term = 1.0;
    for (int n = 0; n < N; ++n) {
        s += term;
        term *= std::conj(a) * b;
    }
    return s;
}

Eigen::MatrixXcd gram(const std::vector<HCoeffVec>& vs) {
    Eigen::MatrixXcd g(vs.size(), vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = 0; j < vs.size(); ++j)
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                inner_product(vs[i], vs[j]).value;
    return g;
}

} // namespace

TEST_CASE("inner product of exact polynomials") {
    auto one = HCoeffVec::polynomial({1.0});
    auto z = HCoeffVec::monomial(1);

    auto p = inner_product(one, one);
    CHECK(p.value.real() == doctest::Approx(1.0));
    CHECK(p.value.imag() == doctest::Approx(0.0));
    CHECK(p.error_bound == 0.0);

    auto q = inner_product(z, one);
    CHECK(std::abs(q.value) == doctest::Approx(0.0));
    CHECK(q.error_bound == 0.0);
}

TEST_CASE("kernel pairing matches the truncated series oracle") {
    cplx a = 0.5, b = 0.25;
    int N = 64;
    auto ka = szego_kernel(a, N);
    auto kb = szego_kernel(b, N);
    auto p = inner_product(ka, kb);

    // reproducing property gives 1/(1 - conj(a) b); the series oracle
    // must agree within both tail bounds
    cplx oracle = kernel_pairing_series(a, b, N);
    CHECK(std::abs(p.value - oracle) <= 1e-15);
    CHECK(std::abs(p.value - 1.0 / 0.875) <= p.error_bound + 1e-12);
    CHECK(p.error_bound > 0.0);
}

TEST_CASE("tail bound soundness for szego kernels") {
    cplx a = 0.7;
    int N = 40;
    auto k = szego_kernel(a, N);
    CHECK(k.tail().constant == doctest::Approx(1.0));
    CHECK(k.tail().ratio == doctest::Approx(0.7));

    // true omitted mass in <k,k> is rho^{2N}/(1-rho^2); the reported
    // bound must dominate it
    double rho = 0.7;
    double true_tail = std::pow(rho, 2 * N) / (1 - rho * rho);
    auto p = norm_squared(k);
    CHECK(p.error_bound >= true_tail);
    CHECK(std::abs(p.value + true_tail - 1.0 / (1 - rho * rho)) <= 1e-12);
}

TEST_CASE("norm_squared is real nonnegative within bound") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 25; ++t) {
        std::vector<cplx> c(6);
        for (auto& x : c) x = cplx(U(rng), U(rng));
        HCoeffVec f(c, TailBound{std::abs(U(rng)), 0.5});
        auto p = norm_squared(f);
        CHECK(std::abs(p.value.imag()) <= 1e-14);
        CHECK(p.value.real() >= -p.error_bound);
    }
}

TEST_CASE("orthonormalize basic families") {
    Tolerances tol;
    auto one = HCoeffVec::polynomial({1.0});
    auto z = HCoeffVec::monomial(1);
    auto one_plus_z = HCoeffVec::polynomial({1.0, 1.0});

    SUBCASE("already orthonormal passes through") {
        auto out = orthonormalize({one, z}, tol);
        REQUIRE(out.size() == 2);
        CHECK(std::abs(out[0].coeff(0) - cplx(1.0)) < 1e-12);
        CHECK(std::abs(out[1].coeff(1) - cplx(1.0)) < 1e-12);
    }
    SUBCASE("gram-schmidt on a dependent-leading pair") {
        auto out = orthonormalize({one, one_plus_z}, tol);
        REQUIRE(out.size() == 2);
        CHECK(std::abs(out[0].coeff(0) - cplx(1.0)) < 1e-12);
        CHECK(std::abs(out[1].coeff(0)) < 1e-12);
        CHECK(std::abs(out[1].coeff(1) - cplx(1.0)) < 1e-12);
    }
    SUBCASE("duplicate collapses to one unit vector") {
        auto out = orthonormalize({one_plus_z, one_plus_z}, tol);
        REQUIRE(out.size() == 1);
        double r = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(out[0].coeff(0) - cplx(r)) < 1e-12);
        CHECK(std::abs(out[0].coeff(1) - cplx(r)) < 1e-12);
        auto g = gram(out);
        CHECK((g - Eigen::MatrixXcd::Identity(1, 1)).cwiseAbs().maxCoeff() < 10 * tol.rank_tol);
    }
    SUBCASE("empty input gives empty output") {
        CHECK(orthonormalize({}, tol).empty());
    }
}

TEST_CASE("orthonormalize is a projection and yields identity gram") {
    Tolerances tol;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        std::vector<HCoeffVec> vs;
        for (int i = 0; i < 4; ++i) {
            std::vector<cplx> c(8);
            for (auto& x : c) x = cplx(U(rng), U(rng));
            vs.push_back(HCoeffVec(c));
        }
        auto once = orthonormalize(vs, tol);
        auto g = gram(once);
        CHECK((g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <
              10 * tol.rank_tol);

        auto twice = orthonormalize(once, tol);
        REQUIRE(twice.size() == once.size());
        for (std::size_t i = 0; i < once.size(); ++i)
            CHECK(norm(subtract(once[i], twice[i])) < 10 * tol.rank_tol);
    }
}

TEST_CASE("complement basis inside a truncation") {
    Tolerances tol;
    SUBCASE("complement of the constants in N=4") {
        auto out = complement_basis({HCoeffVec::polynomial({1.0})}, 4, tol);
        REQUIRE(out.size() == 3);
        for (const auto& f : out) CHECK(std::abs(f.coeff(0)) < 1e-12);
    }
    SUBCASE("complement of {1, z} in N=4") {
        auto out = complement_basis({HCoeffVec::polynomial({1.0}), HCoeffVec::monomial(1)}, 4, tol);
        REQUIRE(out.size() == 2);
        for (const auto& f : out) {
            CHECK(std::abs(f.coeff(0)) < 1e-12);
            CHECK(std::abs(f.coeff(1)) < 1e-12);
        }
    }
    SUBCASE("complement of a kernel is numerically orthogonal to it") {
        auto k = szego_kernel(0.5, 64);
        auto out = complement_basis({k}, 64, tol);
        REQUIRE(out.size() == 63);
        for (const auto& f : out)
            CHECK(std::abs(inner_product(f, k).value) < tol.rank_tol);
    }
    SUBCASE("tail that does not fit raises a truncation error") {
        auto k = szego_kernel(0.9, 300);
        CHECK_THROWS_AS(complement_basis({k}, 8, tol), TruncationError);
    }
}

TEST_CASE("tolerance ordering is enforced") {
    Tolerances tol;
    tol.tail_target = 1.0;
    CHECK_THROWS_AS(tol.validate(), DomainError);
}
