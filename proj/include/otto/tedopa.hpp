#ifndef OTTO_TEDOPA_HPP
#define OTTO_TEDOPA_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "otto/propagate.hpp"

namespace otto {

/// Nearest-neighbour chain equivalent to a bath with spectral density J on
/// [center - support, center + support]. The qubit couples to site 0 with
/// strength head_coupling; frequencies has one entry per site and hoppings
/// one per bond.
struct ChainCoefficients {
    std::vector<double> frequencies;
    std::vector<double> hoppings;
    double head_coupling = 0.0;
    double support = 0.0;
    double center = 0.0;

    int sites() const { return static_cast<int>(frequencies.size()); }
};

/// Stieltjes/Lanczos recurrence for the measure J(w)/pi, discretized with a
/// composite 20-point Gauss-Legendre rule. Throws NumericsError on breakdown.
ChainCoefficients chain_coefficients(const std::function<double(double)>& j, double center, double support,
                                     int sites, double panel_width = 0.25);

/// Chain coefficients for the Lorentzian of the dephasing bath.
ChainCoefficients chain_coefficients(const DephasingBath& b, double support, int sites);

/// Eigenvalues of the Jacobi matrix built from the coefficients.
Eigen::VectorXd jacobi_spectrum(const ChainCoefficients& c);

/// Occupation basis of a truncated chain: every site below local_dim quanta,
/// and at most max_excitations in total when that is positive.
class ChainBasis {
public:
    ChainBasis(int sites, int local_dim, int max_excitations);

    Index size() const { return static_cast<Index>(states_.size()); }
    int sites() const { return sites_; }
    int local_dim() const { return local_dim_; }
    int max_excitations() const { return max_excitations_; }
    const std::vector<int>& occupations(Index i) const { return states_[i]; }
    Index index_of(const std::vector<int>& occ) const; // -1 if outside the basis

    SparseC annihilation(int site) const;
    SparseC number(int site) const;

private:
    int sites_, local_dim_, max_excitations_;
    std::vector<std::vector<int>> states_;
    std::map<std::vector<int>, Index> lookup_;
};

Environment chain_environment(const ChainCoefficients& c, const ChainBasis& basis, double edge_threshold = 1e-4);

struct ChainRun {
    ChainCoefficients coefficients;
    EnergyLedger ledger;
    std::vector<double> top_level_population; // per site, at the end
};

/// Qubit plus truncated chain from a thermal qubit and the chain vacuum,
/// over the first `duration` of the cycle. Throws NumericsError naming the
/// site whose top level exceeds the threshold.
ChainRun evolve_chain(const EngineConfig& cfg, double support, int sites, int local_dim, int max_excitations,
                      double duration, double dt, int stride);

/// The same schedule with the damped mode as environment.
EnergyLedger evolve_dampf(const EngineConfig& cfg, double duration, double dt, int stride);

struct DiscrepancyRow {
    double support;
    double head_coupling;
    double window;            // common reflection-free window [0, window]
    double interaction_max;   // max over the window of |<H_int> chain - <H_int> mode|
    double bath_energy_max;   // same for the bath energy
    double interaction_max_horizon; // the same maxima over the whole horizon
    double bath_energy_max_horizon;
    double plateau;           // chain <H_int> averaged over the last quarter
    double reflection_time;   // sites / (2 mean hopping)
    bool reflection_flag;     // horizon beyond the reflection time
    std::string status;
};

/// Discrepancy table against the damped-mode run, sorted by support. The
/// maxima are taken over [0, window], where window is the horizon clipped to
/// the shortest reflection time among the supports that ran.
std::vector<DiscrepancyRow> compare_dampf_tedopa(const EngineConfig& cfg, std::vector<double> supports);

void write_chain_csv(const std::string& path, const ChainCoefficients& c);
void write_discrepancy_csv(const std::string& path, const std::vector<DiscrepancyRow>& rows);

} // namespace otto

#endif
