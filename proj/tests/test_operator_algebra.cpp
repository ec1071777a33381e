#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fwt/block_operator.hpp"

using namespace fwt;

namespace {

Matrix random_matrix(int n, std::mt19937& rng) {
    std::normal_distribution<double> dist;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = Complex(dist(rng), dist(rng));
    return a;
}

}  // namespace

TEST_CASE("beta signature: upper spinor blocks positive, lower negative") {
    const RVector s = beta_signature(12, 4);  // rank 4, 3 spatial points
    for (int i = 0; i < 6; ++i) CHECK(s[i] == 1.0);
    for (int i = 6; i < 12; ++i) CHECK(s[i] == -1.0);

    const RVector s2 = beta_signature(6, 2);
    for (int i = 0; i < 3; ++i) CHECK(s2[i] == 1.0);
    for (int i = 3; i < 6; ++i) CHECK(s2[i] == -1.0);

    const Matrix b = beta_matrix(8, 4);
    CHECK((b * b - Matrix::Identity(8, 8)).norm() == 0.0);
    CHECK((b - b.adjoint()).norm() == 0.0);
}

TEST_CASE("grade split: even commutes, odd anticommutes, sum rebuilds exactly") {
    std::mt19937 rng(7);
    for (int rank : {2, 4}) {
        const int n = rank * 3;
        const BlockOperator a{random_matrix(n, rng), rank, "t"};
        const GradedParts parts = grade_split(a);
        const Matrix b = beta_matrix(n, rank);

        // Bitwise reconstruction: the split only flips signs of entries.
        CHECK((parts.even.matrix + parts.odd.matrix - a.matrix).norm() == 0.0);
        CHECK((b * parts.even.matrix - parts.even.matrix * b).norm() == 0.0);
        CHECK((b * parts.odd.matrix + parts.odd.matrix * b).norm() == 0.0);

        // Idempotence: the even part of the even part is itself.
        CHECK((grade_split(parts.even).even.matrix - parts.even.matrix).norm() == 0.0);
        CHECK(grade_split(parts.even).odd.matrix.norm() == 0.0);
        CHECK(grade_split(parts.odd).even.matrix.norm() == 0.0);
    }
}

TEST_CASE("pseudo adjoint is an involution and fixes beta-pseudo-hermitian operators") {
    std::mt19937 rng(11);
    const BlockOperator a{random_matrix(8, rng), 4, "t"};
    CHECK((pseudo_adjoint(pseudo_adjoint(a)).matrix - a.matrix).norm() == 0.0);

    // h + beta h^dagger beta is pseudo-hermitian by construction.
    const Matrix sym = a.matrix + pseudo_adjoint(a).matrix;
    const BlockOperator s{sym, 4, "t"};
    CHECK(is_pseudo_hermitian(s));
    CHECK((pseudo_adjoint(s).matrix - s.matrix).norm() <= 1e-14 * sym.norm());
}

TEST_CASE("commutator and anticommutator identities") {
    std::mt19937 rng(13);
    const BlockOperator a{random_matrix(6, rng), 2, "t"};
    const BlockOperator b{random_matrix(6, rng), 2, "t"};
    CHECK((commutator(a, b).matrix + commutator(b, a).matrix).norm() == 0.0);
    CHECK((anticommutator(a, b).matrix - anticommutator(b, a).matrix).norm() == 0.0);
    CHECK((commutator(a, b).matrix + anticommutator(a, b).matrix -
           2.0 * a.matrix * b.matrix)
              .norm() <= 1e-12 * (a.matrix.norm() * b.matrix.norm()));

    // Product of two odd operators is even; odd times even stays odd.
    const BlockOperator odd_a = grade_split(a).odd;
    const BlockOperator odd_b = grade_split(b).odd;
    const BlockOperator even_b = grade_split(b).even;
    const BlockOperator oo{odd_a.matrix * odd_b.matrix, 2, "t"};
    const BlockOperator oe{odd_a.matrix * even_b.matrix, 2, "t"};
    CHECK(grade_split(oo).odd.matrix.norm() <= 1e-14 * oo.matrix.norm());
    CHECK(grade_split(oe).even.matrix.norm() <= 1e-14 * oe.matrix.norm());
}

TEST_CASE("hermiticity classifiers") {
    std::mt19937 rng(17);
    Matrix a = random_matrix(8, rng);
    const BlockOperator h{Matrix(a + a.adjoint()), 4, "t"};
    CHECK(is_hermitian(h));
    CHECK(is_pseudo_hermitian(h) == false);

    const BlockOperator g{a, 4, "t"};
    const Matrix ph = g.matrix + pseudo_adjoint(g).matrix;
    const BlockOperator p{ph, 4, "t"};
    CHECK(is_pseudo_hermitian(p));
    CHECK(is_hermitian(p) == false);

    // An even hermitian operator is both.
    const BlockOperator both = grade_split(h).even;
    CHECK(is_hermitian(both));
    CHECK(is_pseudo_hermitian(both));
}

TEST_CASE("basis and shape guards") {
    std::mt19937 rng(19);
    const BlockOperator a{random_matrix(4, rng), 4, "basis-one"};
    const BlockOperator b{random_matrix(4, rng), 4, "basis-two"};
    CHECK_THROWS_AS(require_same_basis(a, b), InvalidBasis);
    CHECK_THROWS_AS(commutator(a, b), InvalidBasis);

    BlockOperator bad{Matrix::Zero(4, 3), 4, "t"};
    CHECK_THROWS_AS(bad.check_square(), InvalidBasis);
    BlockOperator odd_dim{Matrix::Zero(6, 6), 4, "t"};
    CHECK_THROWS_AS(odd_dim.check_square(), InvalidBasis);
}

TEST_CASE("rel_norm guards the zero-scale case") {
    const Matrix z = Matrix::Zero(4, 4);
    CHECK(rel_norm(z, z) == 0.0);
    const Matrix a = Matrix::Identity(4, 4);
    CHECK(rel_norm(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rel_norm(a, z) == doctest::Approx(2.0).epsilon(1e-12));
}
