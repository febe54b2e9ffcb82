#include <doctest.h>

#include <cmath>
#include <random>

#include "otto/linalg.hpp"
#include "support.hpp"

using namespace otto;
using otto::testing::kron_loops;
using otto::testing::pauli_x;
using otto::testing::pauli_z;

TEST_CASE("layout dimension is the product of its factors")
{
    HilbertLayout l({2, 3, 4});
    CHECK(l.dimension() == 24);
    CHECK(l.rank() == 3);
    CHECK(l.stride(0) == 12);
    CHECK(l.stride(2) == 1);
    CHECK((HilbertLayout({2}) * HilbertLayout({5})).dimension() == 10);
}

TEST_CASE("layout rejects empty, non-positive and oversized factor lists")
{
    CHECK_THROWS_AS(HilbertLayout(std::vector<Index>{}), DimensionError);
    CHECK_THROWS_AS(HilbertLayout({2, 0}), DimensionError);
    CHECK_THROWS_AS(HilbertLayout({2, 4096}), DimensionError);
    CHECK_THROWS_AS(HilbertLayout({64, 64}, 100), DimensionError);
}

TEST_CASE("tensor of identities is the identity")
{
    CMatrix t = tensor(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3));
    CHECK((t - CMatrix::Identity(6, 6)).norm() == 0.0);
}

TEST_CASE("tensor is qubit-major")
{
    CMatrix t = tensor(CMatrix(pauli_z()), CMatrix::Identity(2, 2));
    CHECK(t.diagonal().real().transpose() == Eigen::RowVector4d(1, 1, -1, -1));
}

TEST_CASE("tensor of sx and the mode quadrature matches an element loop")
{
    CMatrix b = annihilation(3);
    CMatrix x = b + b.adjoint();
    CMatrix sx = pauli_x();
    CHECK((tensor(sx, x) - kron_loops(sx, x)).cwiseAbs().maxCoeff() == 0.0);
    Operator a{HilbertLayout({2}), sx}, c{HilbertLayout({3}), x};
    Operator ac = tensor(a, c);
    CHECK(ac.layout == HilbertLayout({2, 3}));
    CHECK((ac.matrix - kron_loops(sx, x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tensor is associative entry by entry")
{
    std::mt19937_64 rng(7);
    CMatrix a = otto::testing::random_matrix(2, rng);
    CMatrix b = otto::testing::random_matrix(3, rng);
    CMatrix c = otto::testing::random_matrix(2, rng);
    CMatrix left = tensor(tensor(a, b), c);
    CMatrix right = tensor(a, tensor(b, c));
    CHECK((left - right).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("operator tensor enforces the dimension cap")
{
    Operator a{HilbertLayout({64}), CMatrix::Identity(64, 64)};
    Operator b{HilbertLayout({65}), CMatrix::Identity(65, 65)};
    CHECK_THROWS_AS(tensor(a, b), DimensionError);
}

TEST_CASE("density matrix validation")
{
    HilbertLayout q({2});
    CHECK_NOTHROW(DensityMatrix(q, CMatrix::Identity(2, 2) / 2.0));
    CMatrix bad_trace = CMatrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix(q, bad_trace), NumericsError);
    CMatrix non_herm = CMatrix::Identity(2, 2) / 2.0;
    non_herm(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix(q, non_herm), NumericsError);
    CMatrix negative = CMatrix::Zero(2, 2);
    negative(0, 0) = 1.1;
    negative(1, 1) = -0.1;
    CHECK_THROWS_AS(DensityMatrix(q, negative), NumericsError);
    CHECK_THROWS_AS(DensityMatrix(HilbertLayout({3}), CMatrix::Identity(2, 2) / 2.0), DimensionError);
}

TEST_CASE("coherent state of zero amplitude is the vacuum")
{
    DensityMatrix v = coherent_state(0.0, 10);
    CMatrix expect = CMatrix::Zero(11, 11);
    expect(0, 0) = 1.0;
    CHECK((v.matrix() - expect).norm() < 1e-15);
}

TEST_CASE("coherent state occupation equals |alpha|^2")
{
    DensityMatrix s = coherent_state(0.25, 12);
    CHECK(expectation(number_operator(13), s.matrix()) == doctest::Approx(0.0625).epsilon(1e-8));
    CHECK(std::abs(s.matrix().trace() - 1.0) < 1e-14);
}

TEST_CASE("coherent state self fidelity is one")
{
    CVector k = coherent_ket(cplx(0.3, -0.2), 15);
    DensityMatrix s = coherent_state(cplx(0.3, -0.2), 15);
    CHECK(std::abs(k.dot(s.matrix() * k) - 1.0) < 1e-12);
    CHECK(trace_distance(s, s) < 1e-12);
}

TEST_CASE("coherent state with too small a cutoff is a numerics error")
{
    CHECK_THROWS_AS(coherent_state(3.0, 4), NumericsError);
    CHECK_THROWS_AS(coherent_ket(0.0, -1), DimensionError);
    // Poisson weight of the top level.
    CHECK(coherent_level_population(1.0, 3) == doctest::Approx(std::exp(-1.0) / 6.0).epsilon(1e-14));
}

TEST_CASE("partial trace of a product state returns the factor")
{
    std::mt19937_64 rng(11);
    CMatrix a = otto::testing::random_density(2, rng);
    CMatrix b = otto::testing::random_density(3, rng);
    HilbertLayout l({2, 3});
    CHECK((partial_trace(tensor(a, b), l, {0}) - a).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((partial_trace(tensor(a, b), l, {1}) - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial trace matches an explicit double loop")
{
    std::mt19937_64 rng(3);
    CMatrix rho = otto::testing::random_density(6, rng);
    CMatrix keep_a = CMatrix::Zero(2, 2), keep_b = CMatrix::Zero(3, 3);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            for (Index k = 0; k < 3; ++k)
                keep_a(i, j) += rho(i * 3 + k, j * 3 + k);
    for (Index k = 0; k < 3; ++k)
        for (Index l = 0; l < 3; ++l)
            for (Index i = 0; i < 2; ++i)
                keep_b(k, l) += rho(i * 3 + k, i * 3 + l);
    HilbertLayout l({2, 3});
    CHECK((partial_trace(rho, l, {0}) - keep_a).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((partial_trace(rho, l, {1}) - keep_b).cwiseAbs().maxCoeff() < 1e-14);
    DensityMatrix d(l, rho);
    CHECK(std::abs(partial_trace(d, {1}).matrix().trace() - rho.trace()) < 1e-12);
    CHECK_THROWS_AS(partial_trace(rho, l, {2}), DimensionError);
}

TEST_CASE("partial trace over the middle of three factors")
{
    std::mt19937_64 rng(5);
    CMatrix rho = otto::testing::random_density(12, rng);
    CMatrix expect = CMatrix::Zero(4, 4);
    for (Index a = 0; a < 2; ++a)
        for (Index c = 0; c < 2; ++c)
            for (Index a2 = 0; a2 < 2; ++a2)
                for (Index c2 = 0; c2 < 2; ++c2)
                    for (Index b = 0; b < 3; ++b)
                        expect(a * 2 + c, a2 * 2 + c2) += rho(a * 6 + b * 2 + c, a2 * 6 + b * 2 + c2);
    CHECK((partial_trace(rho, HilbertLayout({2, 3, 2}), {0, 2}) - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("unitary action: zero step is the identity")
{
    std::mt19937_64 rng(1);
    CMatrix h = otto::testing::random_hermitian(4, rng);
    CMatrix rho = otto::testing::random_density(4, rng);
    CHECK((herm_expm_action(h, 0.0, rho) - rho).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("qubit precession phase")
{
    const double eps = 1.3, dt = 0.7;
    CMatrix h = 0.5 * eps * CMatrix(pauli_z());
    CMatrix plus = CMatrix::Constant(2, 2, 0.5);
    CMatrix out = herm_expm_action(h, dt, plus);
    cplx expect = 0.5 * std::exp(-I_unit * eps * dt);
    CHECK(std::abs(out(0, 1) - expect) < 1e-14);
    CHECK(std::abs(out(0, 0) - 0.5) < 1e-14);
}

TEST_CASE("unitary action preserves energy, trace and spectrum")
{
    std::mt19937_64 rng(2);
    CMatrix h = otto::testing::random_hermitian(6, rng);
    CMatrix rho = otto::testing::random_density(6, rng);
    CMatrix out = herm_expm_action(h, 2.3, rho);
    CHECK(std::abs(expectation(h, out) - expectation(h, rho)) < 1e-10);
    CHECK(std::abs(out.trace() - rho.trace()) < 1e-10);
    Eigen::SelfAdjointEigenSolver<CMatrix> e0(rho), e1(out);
    CHECK((e0.eigenvalues() - e1.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("n steps of dt equal one step of n dt")
{
    std::mt19937_64 rng(4);
    CMatrix h = otto::testing::random_hermitian(5, rng);
    CMatrix rho = otto::testing::random_density(5, rng);
    CMatrix stepped = rho;
    for (int k = 0; k < 50; ++k)
        stepped = herm_expm_action(h, 0.01, stepped);
    CHECK((stepped - herm_expm_action(h, 0.5, rho)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("unitary action rejects a non-Hermitian generator and mismatched layouts")
{
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(unitary(h, 0.1), NumericsError);
    Operator op{HilbertLayout({3}), CMatrix::Identity(3, 3)};
    DensityMatrix rho(HilbertLayout({2}), CMatrix::Identity(2, 2) / 2.0);
    CHECK_THROWS_AS(herm_expm_action(op, 0.1, rho), DimensionError);
}

TEST_CASE("trace distance examples")
{
    CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    b(1, 1) = 1.0;
    CHECK(trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-14));
    CMatrix p = CMatrix::Zero(2, 2), q = CMatrix::Identity(2, 2) / 2.0;
    p(0, 0) = 0.6;
    p(1, 1) = 0.4;
    CHECK(trace_distance(p, q) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(trace_distance(q, p) == doctest::Approx(trace_distance(p, q)));
    CHECK(trace_distance(p, p) == 0.0);
    DensityMatrix d2(HilbertLayout({2}), q), d3(HilbertLayout({3}), CMatrix::Identity(3, 3) / 3.0);
    CHECK_THROWS_AS(trace_distance(d2, d3), DimensionError);
}

TEST_CASE("vectorization identity vec(A X B) = (B^T kron A) vec(X)")
{
    std::mt19937_64 rng(9);
    CMatrix a = otto::testing::random_matrix(3, rng);
    CMatrix x = otto::testing::random_matrix(3, rng);
    CMatrix b = otto::testing::random_matrix(3, rng);
    CVector lhs = vec(a * x * b);
    CVector rhs = kron_loops(b.transpose(), a) * vec(x);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((unvec(vec(x), 3) - x).norm() == 0.0);
}

TEST_CASE("Lindblad generator is trace-annihilating and matches amplitude damping")
{
    const double g = 0.8;
    CMatrix lower = CMatrix::Zero(2, 2);
    lower(1, 0) = 1.0; // |1><0|, the excited state is |0>
    CMatrix h = 0.5 * CMatrix(pauli_z());
    CMatrix l = lindblad_generator(h, {{g, lower}});
    CVector trace_row = vec(CMatrix::Identity(2, 2)).conjugate();
    CHECK((trace_row.transpose() * l).cwiseAbs().maxCoeff() < 1e-14);

    // Closed form: p_e(t) = p_e(0) exp(-g t), coherence decays at g/2.
    CMatrix rho = CMatrix::Constant(2, 2, 0.5);
    const double t = 1.7;
    SparseC map = propagator_map(l, t);
    CMatrix out = unvec(map * vec(rho), 2);
    CHECK(out(0, 0).real() == doctest::Approx(0.5 * std::exp(-g * t)).epsilon(1e-12));
    CHECK(std::abs(out(0, 1)) == doctest::Approx(0.5 * std::exp(-0.5 * g * t)).epsilon(1e-12));
}

TEST_CASE("propagator map pruning drops small entries only")
{
    CMatrix lower = CMatrix::Zero(2, 2);
    lower(1, 0) = 1.0;
    CMatrix l = lindblad_generator(CMatrix::Zero(2, 2), {{1.0, lower}});
    SparseC full = propagator_map(l, 0.5);
    SparseC pruned = propagator_map(l, 0.5, 1e-3);
    CHECK(pruned.nonZeros() <= full.nonZeros());
    CHECK((CMatrix(full) - CMatrix(pruned)).cwiseAbs().maxCoeff() <= 1e-3);
}
