#ifndef PERORBIT_THERMO_HPP
#define PERORBIT_THERMO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "perorbit/errors.hpp"
#include "perorbit/logsum.hpp"
#include "perorbit/oracle.hpp"
#include "perorbit/orbits.hpp"
#include "perorbit/systems.hpp"

namespace perorbit {
namespace thermo {

using systems::Potential;
using systems::SystemSpec;

// ---------------------------------------------------------------------------
// Weighted expansive-periodic-orbit partition sums
// ---------------------------------------------------------------------------

struct PressureRow {
    std::size_t n = 0;
    unsigned long long ell = 0;
    double log_q = 0.0;  // log of the partition value
    double q = 0.0;      // exp(log_q); may round to inf for extreme inputs
    double rate = 0.0;   // log_q / n
    bool fallback = false;
    unsigned long long count = 0;  // certified periodic points contributing
};

struct PressureDiagnostics {
    double alpha = 0.0;
    std::size_t tail_length = 0;
    double tail_slope = 0.0;  // slope of rate vs 1/n over the tail (largest ell)
    std::size_t monotonicity_violations = 0;
};

struct PressureReport {
    std::vector<PressureRow> rows;
    std::vector<unsigned long long> ells;
    std::vector<double> p_ep_per_ell;
    double p_ep_limit = 0.0;
    bool per_ell_monotone = true;
    PressureDiagnostics diagnostics;
};

namespace detail {

struct CountAndLog {
    LogSumAcc acc;
    unsigned long long count = 0;
};

// Shared core: one enumeration of period-n points serves every ell in the
// ascending list; each certified point contributes to all ells >= its minimal
// certificate level.
inline std::vector<CountAndLog> accumulate_level(const SystemSpec& sys, const Potential& phi,
                                                 double alpha,
                                                 const std::vector<unsigned long long>& ells,
                                                 std::size_t n,
                                                 unsigned long long budget) {
    std::vector<CountAndLog> out(ells.size());
    std::vector<Potential> pots{phi};
    orbits::Certifier certifier;
    orbits::visit_fixed(
        sys, n, pots,
        [&](const orbits::PeriodicPointRecord& rec) {
            if (rec.log_deriv_per_step.empty())
                throw DerivativeUnavailable(
                    "expansion certificates need a derivative along orbits");
            auto cert = certifier.run(rec.log_deriv_per_step, alpha);
            if (cert.infinite()) return true;
            double s = rec.birkhoff[0];
            bool used = false;
            for (std::size_t i = 0; i < ells.size(); ++i) {
                if (ells[i] < cert.ell_min) continue;
                if (std::isnan(s))
                    throw DerivativeUnavailable(
                        "potential undefined on a certified orbit through a kink");
                out[i].acc.add(s);
                out[i].count += rec.multiplicity;
                used = true;
            }
            (void)used;
            return true;
        },
        budget);
    return out;
}

}  // namespace detail

// log of q_ep: log( sum over EFix(f^n, alpha, ell) of exp S_n phi ), with the
// exact fallback n * min phi when the certified set is empty.
inline double log_q_ep(const SystemSpec& sys, const Potential& phi, double alpha,
                       unsigned long long ell, std::size_t n,
                       unsigned long long budget = orbits::kDefaultBudget) {
    if (n == 0) throw InvalidSpec("q_ep needs n >= 1");
    if (!(alpha > 0.0)) throw InvalidSpec("expansion threshold alpha must be positive");
    if (ell == 0) throw InvalidSpec("certificate level ell must be >= 1");
    std::vector<unsigned long long> ells{ell};
    auto cl = detail::accumulate_level(sys, phi, alpha, ells, n, budget);
    if (cl[0].count > 0) return cl[0].acc.value();
    return double(n) * systems::potential_range(sys, phi).min;
}

inline double q_ep(const SystemSpec& sys, const Potential& phi, double alpha,
                   unsigned long long ell, std::size_t n,
                   unsigned long long budget = orbits::kDefaultBudget) {
    return std::exp(log_q_ep(sys, phi, alpha, ell, n, budget));
}

// Full n-sweep across an ascending list of certificate levels. The limsup per
// level is estimated by the maximum rate over the final third of the n-range;
// the reported limit is the value at the largest level.
inline PressureReport p_ep(const SystemSpec& sys, const Potential& phi, double alpha,
                           const std::vector<unsigned long long>& ell_list, std::size_t n_max,
                           unsigned long long budget = orbits::kDefaultBudget) {
    if (n_max == 0) throw InvalidSpec("p_ep needs n_max >= 1");
    if (!(alpha > 0.0)) throw InvalidSpec("expansion threshold alpha must be positive");
    if (ell_list.empty()) throw InvalidSpec("p_ep needs at least one certificate level");
    for (std::size_t i = 0; i < ell_list.size(); ++i) {
        if (ell_list[i] == 0) throw InvalidSpec("certificate levels must be >= 1");
        if (i > 0 && ell_list[i] <= ell_list[i - 1])
            throw InvalidSpec("certificate levels must be strictly ascending");
    }

    PressureReport rep;
    rep.ells = ell_list;
    rep.diagnostics.alpha = alpha;
    double min_phi = systems::potential_range(sys, phi).min;

    for (std::size_t n = 1; n <= n_max; ++n) {
        auto cl = detail::accumulate_level(sys, phi, alpha, ell_list, n, budget);
        for (std::size_t i = 0; i < ell_list.size(); ++i) {
            PressureRow row;
            row.n = n;
            row.ell = ell_list[i];
            row.fallback = (cl[i].count == 0);
            row.count = cl[i].count;
            row.log_q = row.fallback ? double(n) * min_phi : cl[i].acc.value();
            row.q = std::exp(row.log_q);
            row.rate = row.log_q / double(n);
            rep.rows.push_back(row);
            if (i > 0 && row.log_q < rep.rows[rep.rows.size() - 2].log_q - 1e-12)
                ++rep.diagnostics.monotonicity_violations;
        }
    }

    std::size_t tail = (n_max + 2) / 3;  // final third, rounded up
    rep.diagnostics.tail_length = tail;
    rep.p_ep_per_ell.assign(ell_list.size(), -std::numeric_limits<double>::infinity());
    for (const auto& row : rep.rows) {
        if (row.n + tail <= n_max) continue;
        std::size_t i = std::lower_bound(ell_list.begin(), ell_list.end(), row.ell) -
                        ell_list.begin();
        rep.p_ep_per_ell[i] = std::max(rep.p_ep_per_ell[i], row.rate);
    }
    rep.p_ep_limit = rep.p_ep_per_ell.back();
    for (std::size_t i = 0; i + 1 < rep.p_ep_per_ell.size(); ++i)
        if (rep.p_ep_per_ell[i + 1] < rep.p_ep_per_ell[i] - 1e-12) rep.per_ell_monotone = false;

    // tail slope of rate against 1/n at the largest level: near-zero slope
    // signals a settled limit
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t cnt = 0;
        for (const auto& row : rep.rows) {
            if (row.ell != ell_list.back() || row.n + tail <= n_max) continue;
            double ix = 1.0 / double(row.n);
            sx += ix;
            sy += row.rate;
            sxx += ix * ix;
            sxy += ix * row.rate;
            ++cnt;
        }
        double denom = double(cnt) * sxx - sx * sx;
        rep.diagnostics.tail_slope = (cnt >= 2 && denom != 0.0)
                                         ? (double(cnt) * sxy - sx * sy) / denom
                                         : 0.0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The expansion threshold alpha(phi) and the low-variation test
// ---------------------------------------------------------------------------

struct AlphaReport {
    double alpha = 0.0;
    double p_top = 0.0;
    double b_max = 0.0;  // max over periodic orbits of the mean of phi
    bool oracle_pressure = true;   // false => pressure came from the orbit sweep
    bool b_max_lower_bound = true;  // periodic orbits only reach up to n_max
};

namespace detail {

// P_top(phi): exact transfer-matrix value when the symbolic oracle applies,
// otherwise the periodic-orbit estimate itself (flagged by the caller).
inline double pressure_or_fallback(const SystemSpec& sys, const Potential& phi,
                                   std::size_t n_max, bool& used_oracle,
                                   unsigned long long budget) {
    try {
        double p = oracle::oracle_pressure(sys, phi);
        used_oracle = true;
        return p;
    } catch (const OracleUnavailable&) {
        used_oracle = false;
        std::vector<unsigned long long> ells{1, 4, 16, 64, 256, 1024};
        auto rep = p_ep(sys, phi, 1e-3, ells, n_max, budget);
        return rep.p_ep_limit;
    }
}

}  // namespace detail

// alpha(phi) = P_top(phi) - sup over invariant measures of the mean of phi;
// the supremum is estimated from below by periodic-orbit means up to n_max.
inline AlphaReport alpha_of_phi(const SystemSpec& sys, const Potential& phi, std::size_t n_max,
                                unsigned long long budget = orbits::kDefaultBudget) {
    if (n_max == 0) throw InvalidSpec("alpha_of_phi needs n_max >= 1");
    AlphaReport rep;
    rep.p_top = detail::pressure_or_fallback(sys, phi, n_max, rep.oracle_pressure, budget);

    double best = -std::numeric_limits<double>::infinity();
    std::vector<Potential> pots{phi};
    for (std::size_t n = 1; n <= n_max; ++n) {
        orbits::visit_fixed(
            sys, n, pots,
            [&](const orbits::PeriodicPointRecord& rec) {
                double s = rec.birkhoff[0];
                if (!std::isnan(s)) best = std::max(best, s / double(n));
                return true;
            },
            budget);
    }
    if (best == -std::numeric_limits<double>::infinity())
        throw EmptySetError("no periodic orbit carries a defined potential mean");
    rep.b_max = best;
    rep.alpha = rep.p_top - rep.b_max;
    return rep;
}

struct LowVariationResult {
    bool ok = false;
    double margin = 0.0;  // P_top - rho*h_top - max phi; positive iff ok
    double max_phi = 0.0;
    double p_top = 0.0;
    double h_top = 0.0;
    bool oracle_pressure = true;
};

// Checks max phi < P_top(phi) - rho * h_top (strict).
inline LowVariationResult low_variation_check(const SystemSpec& sys, const Potential& phi,
                                              double rho, std::size_t n_max = 14,
                                              unsigned long long budget = orbits::kDefaultBudget) {
    LowVariationResult res;
    res.max_phi = systems::potential_range(sys, phi).max;
    res.p_top = detail::pressure_or_fallback(sys, phi, n_max, res.oracle_pressure, budget);
    res.h_top = oracle::oracle_h_top(sys);
    res.margin = res.p_top - rho * res.h_top - res.max_phi;
    res.ok = res.margin > 0.0;
    return res;
}

}  // namespace thermo
}  // namespace perorbit

#endif  // PERORBIT_THERMO_HPP
