#ifndef OTTO_TESTS_SUPPORT_HPP
#define OTTO_TESTS_SUPPORT_HPP

#include <random>

#include "otto/linalg.hpp"

namespace otto::testing {

inline CMatrix random_matrix(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    CMatrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            m(i, j) = cplx(g(rng), g(rng));
    return m;
}

inline CMatrix random_hermitian(Index n, std::mt19937_64& rng)
{
    CMatrix m = random_matrix(n, rng);
    return 0.5 * (m + m.adjoint());
}

/// Full-rank random state A A^dagger / Tr.
inline CMatrix random_density(Index n, std::mt19937_64& rng)
{
    CMatrix a = random_matrix(n, rng);
    CMatrix rho = a * a.adjoint();
    return rho / rho.trace();
}

inline Eigen::Matrix2cd pauli_x() { return (Eigen::Matrix2cd() << 0.0, 1.0, 1.0, 0.0).finished(); }
inline Eigen::Matrix2cd pauli_z() { return (Eigen::Matrix2cd() << 1.0, 0.0, 0.0, -1.0).finished(); }

/// Kronecker product by explicit index loops.
inline CMatrix kron_loops(const CMatrix& a, const CMatrix& b)
{
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            for (Index k = 0; k < b.rows(); ++k)
                for (Index l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

} // namespace otto::testing

#endif
