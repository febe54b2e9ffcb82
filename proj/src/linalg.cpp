#include "otto/linalg.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace otto {

HilbertLayout::HilbertLayout(std::vector<Index> factors, Index cap)
    : factors_(std::move(factors))
{
    if (factors_.empty())
        throw DimensionError("layout needs at least one factor");
    dim_ = 1;
    for (Index f : factors_) {
        if (f < 1)
            throw DimensionError("layout factor must be positive");
        if (dim_ > cap / f) {
            std::ostringstream os;
            os << "composite dimension exceeds cap " << cap;
            throw DimensionError(os.str());
        }
        dim_ *= f;
    }
}

Index HilbertLayout::stride(std::size_t k) const
{
    Index s = 1;
    for (std::size_t j = k + 1; j < factors_.size(); ++j)
        s *= factors_[j];
    return s;
}

HilbertLayout operator*(const HilbertLayout& a, const HilbertLayout& b)
{
    std::vector<Index> f = a.factors_;
    f.insert(f.end(), b.factors_.begin(), b.factors_.end());
    return HilbertLayout(std::move(f));
}

DensityMatrix::DensityMatrix(HilbertLayout layout, CMatrix rho, const DensityTolerances& tol)
    : layout_(std::move(layout)), rho_(std::move(rho))
{
    validate(tol);
}

DensityMatrix DensityMatrix::unchecked(HilbertLayout layout, CMatrix rho)
{
    DensityMatrix d;
    d.layout_ = std::move(layout);
    d.rho_ = std::move(rho);
    return d;
}

void DensityMatrix::validate(const DensityTolerances& tol) const
{
    if (rho_.rows() != layout_.dimension() || rho_.cols() != layout_.dimension())
        throw DimensionError("density matrix shape does not match layout");
    double herm = hermiticity_defect(rho_);
    if (herm > tol.hermiticity) {
        std::ostringstream os;
        os << "density matrix not Hermitian (defect " << herm << ")";
        throw NumericsError(os.str());
    }
    double tr = rho_.trace().real();
    if (std::abs(tr - 1.0) > tol.trace) {
        std::ostringstream os;
        os << "density matrix trace " << tr << " deviates from 1";
        throw NumericsError(os.str());
    }
    CMatrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    if (lo < tol.min_eigenvalue) {
        std::ostringstream os;
        os << "density matrix has negative eigenvalue " << lo;
        throw NumericsError(os.str());
    }
}

Operator tensor(const Operator& a, const Operator& b)
{
    return {a.layout * b.layout, tensor(a.matrix, b.matrix)};
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b)
{
    return DensityMatrix::unchecked(a.layout() * b.layout(), tensor(a.matrix(), b.matrix()));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b)
{
    if (!(a.layout() == b.layout()))
        throw DimensionError("trace distance between different layouts");
    return trace_distance(a.matrix(), b.matrix());
}

CMatrix annihilation(Index dim)
{
    CMatrix b = CMatrix::Zero(dim, dim);
    for (Index n = 1; n < dim; ++n)
        b(n - 1, n) = std::sqrt(static_cast<double>(n));
    return b;
}

CMatrix number_operator(Index dim)
{
    CMatrix n = CMatrix::Zero(dim, dim);
    for (Index k = 0; k < dim; ++k)
        n(k, k) = static_cast<double>(k);
    return n;
}

double coherent_level_population(double abs_alpha, Index n)
{
    double x = abs_alpha * abs_alpha;
    if (x == 0.0)
        return n == 0 ? 1.0 : 0.0;
    return std::exp(-x + n * std::log(x) - std::lgamma(n + 1.0));
}

CVector coherent_ket(cplx alpha, Index n_max, double threshold)
{
    if (n_max < 0)
        throw DimensionError("negative Fock cutoff");
    double top = coherent_level_population(std::abs(alpha), n_max);
    if (n_max > 0 && top > threshold) {
        std::ostringstream os;
        os << "Fock cutoff " << n_max << " too small for |alpha| = " << std::abs(alpha)
           << ": top-level population " << top;
        throw NumericsError(os.str());
    }
    CVector c(n_max + 1);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (Index n = 1; n <= n_max; ++n)
        c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return c / c.norm();
}

DensityMatrix coherent_state(cplx alpha, Index n_max, double threshold)
{
    CVector c = coherent_ket(alpha, n_max, threshold);
    return DensityMatrix::unchecked(HilbertLayout({n_max + 1}), c * c.adjoint());
}

CMatrix partial_trace(const CMatrix& rho, const HilbertLayout& layout, const std::vector<std::size_t>& keep)
{
    const std::size_t r = layout.rank();
    if (rho.rows() != layout.dimension() || rho.cols() != layout.dimension())
        throw DimensionError("partial trace: matrix does not match layout");
    std::vector<bool> kept(r, false);
    for (std::size_t k : keep) {
        if (k >= r)
            throw DimensionError("partial trace: factor index out of range");
        kept[k] = true;
    }
    Index dk = 1, dt = 1;
    for (std::size_t k = 0; k < r; ++k)
        (kept[k] ? dk : dt) *= layout.factor(k);

    // Split a composite index into (kept, traced) sub-indices in factor order.
    std::vector<Index> kept_of(layout.dimension()), traced_of(layout.dimension());
    for (Index i = 0; i < layout.dimension(); ++i) {
        Index rem = i, ki = 0, ti = 0, kmul = 1, tmul = 1;
        for (std::size_t k = r; k-- > 0;) {
            Index f = layout.factor(k);
            Index digit = rem % f;
            rem /= f;
            if (kept[k]) {
                ki += digit * kmul;
                kmul *= f;
            } else {
                ti += digit * tmul;
                tmul *= f;
            }
        }
        kept_of[i] = ki;
        traced_of[i] = ti;
    }
    CMatrix out = CMatrix::Zero(dk, dk);
    for (Index i = 0; i < layout.dimension(); ++i)
        for (Index j = 0; j < layout.dimension(); ++j)
            if (traced_of[i] == traced_of[j])
                out(kept_of[i], kept_of[j]) += rho(i, j);
    (void)dt;
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep)
{
    std::vector<Index> f;
    std::vector<std::size_t> sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k : sorted)
        f.push_back(rho.layout().factor(k));
    return DensityMatrix::unchecked(HilbertLayout(f), partial_trace(rho.matrix(), rho.layout(), sorted));
}

CMatrix unitary(const CMatrix& h, double dt)
{
    double defect = hermiticity_defect(h);
    if (defect > 1e-9) {
        std::ostringstream os;
        os << "generator is not Hermitian (defect " << defect << ")";
        throw NumericsError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
    CVector phase = (-I_unit * dt * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix herm_expm_action(const CMatrix& h, double dt, const CMatrix& rho)
{
    CMatrix u = unitary(h, dt);
    return u * rho * u.adjoint();
}

DensityMatrix herm_expm_action(const Operator& h, double dt, const DensityMatrix& rho)
{
    if (!(h.layout == rho.layout()))
        throw DimensionError("Hamiltonian and state live on different layouts");
    return DensityMatrix::unchecked(rho.layout(), herm_expm_action(h.matrix, dt, rho.matrix()));
}

CVector vec(const CMatrix& m)
{
    return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, Index rows)
{
    return Eigen::Map<const CMatrix>(v.data(), rows, v.size() / rows);
}

CMatrix lindblad_generator(const CMatrix& h, const std::vector<JumpOperator>& jumps)
{
    const Index d = h.rows();
    const CMatrix id = CMatrix::Identity(d, d);
    CMatrix gen = -I_unit * (tensor(id, h) - tensor(h.transpose(), id));
    for (const auto& j : jumps) {
        CMatrix ldl = j.op.adjoint() * j.op;
        gen += j.rate * (tensor(j.op.conjugate(), j.op) - 0.5 * tensor(id, ldl) - 0.5 * tensor(ldl.transpose(), id));
    }
    return gen;
}

SparseC propagator_map(const CMatrix& generator, double dt, double prune)
{
    CMatrix g = (generator * dt).exp();
    return g.sparseView(1.0, prune);
}

} // namespace otto
