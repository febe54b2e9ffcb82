#ifndef OTTO_LINALG_HPP
#define OTTO_LINALG_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include "otto/errors.hpp"

namespace otto {

using Index = Eigen::Index;
using cplx = std::complex<double>;

template <typename Real>
using MatrixC = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using VectorC = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using CMatrix = MatrixC<double>;
using CVector = VectorC<double>;
using SparseC = Eigen::SparseMatrix<cplx>;

inline constexpr cplx I_unit{0.0, 1.0};

/// Ordered tensor factors of a composite Hilbert space. The first factor is the
/// slowest index of the product basis.
class HilbertLayout {
public:
    static constexpr Index kMaxDimension = 4096;

    HilbertLayout() = default;
    explicit HilbertLayout(std::vector<Index> factors, Index cap = kMaxDimension);

    Index dimension() const { return dim_; }
    std::size_t rank() const { return factors_.size(); }
    Index factor(std::size_t k) const { return factors_.at(k); }
    const std::vector<Index>& factors() const { return factors_; }

    /// Product of factor dimensions strictly after @p k.
    Index stride(std::size_t k) const;

    friend HilbertLayout operator*(const HilbertLayout& a, const HilbertLayout& b);
    friend bool operator==(const HilbertLayout& a, const HilbertLayout& b) { return a.factors_ == b.factors_; }

private:
    std::vector<Index> factors_;
    Index dim_ = 1;
};

struct Operator {
    HilbertLayout layout;
    CMatrix matrix;
};

struct DensityTolerances {
    double hermiticity = 1e-10;
    double trace = 1e-9;
    double min_eigenvalue = -1e-8;
};

/// Unit-trace, Hermitian, positive semidefinite matrix on a layout. Construction
/// validates; use unchecked() inside integrators and validate at checkpoints.
class DensityMatrix {
public:
    DensityMatrix(HilbertLayout layout, CMatrix rho, const DensityTolerances& tol = {});
    static DensityMatrix unchecked(HilbertLayout layout, CMatrix rho);

    const HilbertLayout& layout() const { return layout_; }
    const CMatrix& matrix() const { return rho_; }
    CMatrix& matrix() { return rho_; }

    void validate(const DensityTolerances& tol = {}) const;

private:
    DensityMatrix() = default;
    HilbertLayout layout_;
    CMatrix rho_;
};

template <typename A, typename B>
CMatrix tensor(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b)
{
    return Eigen::kroneckerProduct(a.eval(), b.eval()).eval();
}

Operator tensor(const Operator& a, const Operator& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Re Tr(O rho) without forming the product.
template <typename A, typename B>
double expectation(const Eigen::MatrixBase<A>& op, const Eigen::MatrixBase<B>& rho)
{
    return op.transpose().cwiseProduct(rho).sum().real();
}

template <typename A>
double hermiticity_defect(const Eigen::MatrixBase<A>& m)
{
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Half the trace norm of a - b. Both arguments must be Hermitian.
template <typename A, typename B>
double trace_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b)
{
    using M = Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    M diff = a - b;
    diff = (0.5 * (diff + diff.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<M> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

CMatrix annihilation(Index dim);
CMatrix number_operator(Index dim);

/// Fock amplitudes of |alpha> truncated at n_max and renormalized. Throws
/// NumericsError when the top retained level carries more than @p threshold of
/// the untruncated population.
CVector coherent_ket(cplx alpha, Index n_max, double threshold = 1e-6);
DensityMatrix coherent_state(cplx alpha, Index n_max, double threshold = 1e-6);

/// Population of level n_max for an untruncated coherent state.
double coherent_level_population(double abs_alpha, Index n);

CMatrix partial_trace(const CMatrix& rho, const HilbertLayout& layout, const std::vector<std::size_t>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep);

/// exp(-i H dt) by eigendecomposition. Rejects H with Hermiticity defect above 1e-9.
CMatrix unitary(const CMatrix& h, double dt);
CMatrix herm_expm_action(const CMatrix& h, double dt, const CMatrix& rho);
DensityMatrix herm_expm_action(const Operator& h, double dt, const DensityMatrix& rho);

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Index rows);

struct JumpOperator {
    double rate;
    CMatrix op;
};

/// Lindblad generator -i[H, .] + sum_k rate_k D[L_k] as a superoperator.
CMatrix lindblad_generator(const CMatrix& h, const std::vector<JumpOperator>& jumps);

/// exp(generator * dt) with entries below @p prune (absolute) dropped.
SparseC propagator_map(const CMatrix& generator, double dt, double prune = 0.0);

} // namespace otto

#endif
