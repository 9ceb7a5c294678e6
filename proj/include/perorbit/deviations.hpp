#ifndef PERORBIT_DEVIATIONS_HPP
#define PERORBIT_DEVIATIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "perorbit/errors.hpp"
#include "perorbit/oracle.hpp"
#include "perorbit/orbits.hpp"
#include "perorbit/systems.hpp"

namespace perorbit {
namespace deviations {

using systems::Potential;
using systems::PotentialKind;
using systems::SystemSpec;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Pressure-difference functional
// ---------------------------------------------------------------------------

struct QResult {
    double value = 0.0;
    bool exact = true;
    std::string method;
};

// Q(psi) = P_top(phi + psi) - P_top(phi); exact via transfer matrices when the
// potentials reduce to cylinder tables, otherwise a shared Ulam discretization.
inline QResult q_functional_detail(const SystemSpec& sys, const Potential& phi,
                                   const Potential& psi, std::size_t ulam_bins = 4096) {
    QResult out;
    try {
        auto sum = systems::potential_sum_as_cylinder(sys, phi, psi);
        if (!sum) throw OracleUnavailable("no cylinder reduction of the sum");
        double p1 = oracle::oracle_pressure(sys, *sum);
        auto phic = systems::as_cylinder(sys, phi);
        double p0 = oracle::oracle_pressure(sys, *phic);  // sum reduced => phi reduces
        out.value = p1 - p0;
        out.exact = true;
        out.method = "transfer-matrix";
        return out;
    } catch (const OracleUnavailable&) {
        auto r1 = oracle::ulam_pressure(sys, std::vector<Potential>{phi, psi}, ulam_bins);
        auto r0 = oracle::ulam_pressure(sys, phi, ulam_bins);
        out.value = r1.pressure - r0.pressure;
        out.exact = false;
        out.method = "ulam(bins=" + std::to_string(ulam_bins) + ")";
        return out;
    }
}

inline double q_functional(const SystemSpec& sys, const Potential& phi, const Potential& psi) {
    return q_functional_detail(sys, phi, psi).value;
}

// ---------------------------------------------------------------------------
// Rate function by concave dual ascent over depth-m cylinder potentials
// ---------------------------------------------------------------------------

struct DualSearchSpace {
    std::size_t depth = 1;  // cylinder depth m of the candidate potentials
    double box = 24.0;      // coefficient box bound B
};

struct RateReport {
    double i_lower = 0.0;            // value of the dual objective at psi*
    std::vector<Word> words;         // admissible m-words indexing coefficients
    std::vector<double> psi_star;    // maximizing coefficients
    std::size_t depth = 1;
    double box = 0.0;
    double grad_norm = 0.0;          // projected-gradient 2-norm at the optimum
    std::size_t iterations = 0;
    bool converged = false;
    double p_phi = 0.0;              // P_top(phi) used inside the objective
    double hhat = std::numeric_limits<double>::quiet_NaN();  // set by entropy wrapper
};

namespace detail {

// Model skeleton whose edges know the phi-value and the index of the leading
// depth-m word, so re-weighting per coefficient vector is a flat pass.
struct DualWorkspace {
    oracle::MarkovModel model;
    std::vector<std::vector<double>> fe;      // phi edge values
    std::vector<std::vector<uint32_t>> widx;  // edge -> coefficient index
    std::vector<Word> words;                  // admissible depth-m words
    double p_phi = 0.0;

    void set_coeffs(const std::vector<double>& c) {
        for (std::size_t u = 0; u < model.size(); ++u)
            for (std::size_t e = 0; e < model.out_edges[u].size(); ++e)
                model.out_edges[u][e].logw = fe[u][e] + c[widx[u][e]];
        for (std::size_t v = 0; v < model.size(); ++v)
            for (auto& edge : model.in_edges[v])
                for (std::size_t e = 0; e < model.out_edges[edge.to].size(); ++e)
                    if (model.out_edges[edge.to][e].to == v)
                        edge.logw = model.out_edges[edge.to][e].logw;
    }

    // pressure P(phi + psi_c) and the Gibbs masses of the coefficient words
    std::pair<double, std::vector<double>> pressure_and_masses(const std::vector<double>& c) {
        set_coeffs(c);
        oracle::GibbsMeasure gm = oracle::sft_gibbs(model);
        std::vector<double> mass(words.size());
        for (std::size_t i = 0; i < words.size(); ++i) mass[i] = gm.cylinder_mass(words[i]);
        return {gm.pressure, std::move(mass)};
    }
};

inline DualWorkspace make_dual_workspace(const SystemSpec& sys, const Potential& phi,
                                         std::size_t m) {
    auto phic = systems::as_cylinder(sys, phi);
    if (!phic)
        throw OracleUnavailable("base potential does not reduce to a cylinder table");
    if (!oracle::symbolically_exact(sys))
        throw OracleUnavailable("symbolic coding is not exact for " + sys.name());
    const Transition& base = sys.transition();

    DualWorkspace ws;
    ws.words = admissible_words(base, m);
    std::size_t d = std::max({m, phic->depth(), std::size_t(2)});
    auto dwords = admissible_words(base, d);
    Potential skeleton =
        Potential::cylinder_on_admissible(base, d, std::vector<double>(dwords.size(), 0.0));
    ws.model = oracle::model_from_cylinder(base, skeleton);

    // coefficient index of a depth-m prefix
    std::size_t k = base.alphabet_size();
    std::vector<uint32_t> code_to_idx(Potential::word_code(Word(m, uint8_t(k - 1)), k) + 1, 0);
    for (std::size_t i = 0; i < ws.words.size(); ++i)
        code_to_idx[Potential::word_code(ws.words[i], k)] = static_cast<uint32_t>(i);

    ws.fe.resize(ws.model.size());
    ws.widx.resize(ws.model.size());
    for (std::size_t u = 0; u < ws.model.size(); ++u) {
        ws.fe[u].resize(ws.model.out_edges[u].size());
        ws.widx[u].resize(ws.model.out_edges[u].size());
        for (std::size_t e = 0; e < ws.model.out_edges[u].size(); ++e) {
            Word dw = ws.model.edge_word(u, ws.model.out_edges[u][e].to);
            ws.fe[u][e] = phic->table_entry(dw);
            Word prefix(dw.begin(), dw.begin() + m);
            ws.widx[u][e] = code_to_idx[Potential::word_code(prefix, k)];
        }
    }
    // install the base-potential edge weights (zero coefficients) so the
    // reference pressure is P(phi), not the weightless skeleton's h_top
    ws.set_coeffs(std::vector<double>(ws.words.size(), 0.0));
    ws.p_phi = oracle::sft_pressure(ws.model);
    return ws;
}

}  // namespace detail

// Maximizes G(c) = <c, mu-masses> - (P(phi + psi_c) - P(phi)) over the box
// [-B, B]^D by projected gradient ascent (Barzilai-Borwein steps with Armijo
// backtracking). G is concave and the gradient (mu-masses minus Gibbs masses)
// is exact, so the projected-gradient norm certifies the box optimum.
template <class Measure>
RateReport rate_function(const SystemSpec& sys, const Potential& phi, const Measure& mu,
                         const DualSearchSpace& space, std::size_t max_iters = 20000) {
    if (space.depth == 0) throw InvalidSpec("dual search depth must be >= 1");
    if (!(space.box > 0.0)) throw InvalidSpec("dual box bound must be positive");

    auto ws = detail::make_dual_workspace(sys, phi, space.depth);
    const std::size_t D = ws.words.size();
    const double B = space.box;

    // exact target masses: mu of each coefficient cylinder
    std::vector<double> target(D);
    for (std::size_t i = 0; i < D; ++i) {
        std::vector<double> table(D, 0.0);
        table[i] = 1.0;
        Potential ind = Potential::cylinder_on_admissible(sys.transition(), space.depth, table);
        target[i] = mu.integral(sys, ind);
    }

    auto eval = [&](const std::vector<double>& c, std::vector<double>& grad) {
        auto [p, mass] = ws.pressure_and_masses(c);
        double g = -(p - ws.p_phi);
        for (std::size_t i = 0; i < D; ++i) {
            g += c[i] * target[i];
            grad[i] = target[i] - mass[i];
        }
        return g;
    };
    auto project = [&](std::vector<double>& c) {
        for (double& v : c) v = std::clamp(v, -B, B);
    };
    auto projected_gradient = [&](const std::vector<double>& c, const std::vector<double>& g,
                                  std::vector<double>& pg) {
        for (std::size_t i = 0; i < D; ++i) {
            pg[i] = g[i];
            if ((c[i] >= B && g[i] > 0.0) || (c[i] <= -B && g[i] < 0.0)) pg[i] = 0.0;
        }
    };
    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };

    RateReport rep;
    rep.words = ws.words;
    rep.depth = space.depth;
    rep.box = B;
    rep.p_phi = ws.p_phi;

    std::vector<double> c(D, 0.0), g(D), pg(D), cprev, gprev;
    double val = eval(c, g);
    double step = 1.0;
    const double tol = 1e-8;
    std::size_t it = 0;
    for (; it < max_iters; ++it) {
        projected_gradient(c, g, pg);
        if (norm2(pg) <= tol) {
            rep.converged = true;
            break;
        }
        if (!cprev.empty()) {  // Barzilai-Borwein step from the last move
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < D; ++i) {
                double dc = c[i] - cprev[i], dg = g[i] - gprev[i];
                num += dc * dc;
                den += dc * dg;
            }
            if (den < 0.0) step = num / (-den);
            step = std::clamp(step, 1e-12, 1e12);
        }
        cprev = c;
        gprev = g;
        double t = step;
        bool advanced = false;
        for (int bt = 0; bt < 60; ++bt) {
            std::vector<double> cn(D);
            for (std::size_t i = 0; i < D; ++i) cn[i] = c[i] + t * g[i];
            project(cn);
            double lin = 0.0;
            for (std::size_t i = 0; i < D; ++i) lin += g[i] * (cn[i] - c[i]);
            if (lin <= 0.0) break;  // no feasible ascent along the gradient
            std::vector<double> gn(D);
            double vn = eval(cn, gn);
            if (vn >= val + 1e-4 * lin) {
                c = std::move(cn);
                g = std::move(gn);
                val = vn;
                advanced = true;
                break;
            }
            t *= 0.5;
        }
        if (!advanced) {  // stalled: report the certified state we have
            projected_gradient(c, g, pg);
            rep.converged = norm2(pg) <= tol;
            break;
        }
    }
    projected_gradient(c, g, pg);
    rep.i_lower = val;
    rep.psi_star = c;
    rep.grad_norm = norm2(pg);
    rep.iterations = it;
    if (rep.grad_norm <= tol) rep.converged = true;
    return rep;
}

// hhat(nu) = P_top(0) - I_0(nu): restricting the dual search can only lower
// I_0, so the reported entropy is an upper-bound approximation.
template <class Measure>
RateReport generalized_entropy(const SystemSpec& sys, const Measure& nu,
                               const DualSearchSpace& space, std::size_t max_iters = 20000) {
    RateReport rep = rate_function(sys, Potential::constant(0.0), nu, space, max_iters);
    rep.hhat = rep.p_phi - rep.i_lower;
    return rep;
}

// ---------------------------------------------------------------------------
// Large-deviation counting over certified periodic points
// ---------------------------------------------------------------------------

struct LdCount {
    unsigned long long count = 0;       // points with |S_n phi / n - v| >= delta
    unsigned long long efix_card = 0;   // all certified points at (alpha, ell)
    double rate = 0.0;                  // (1/n) log max(count, 1)
};

// Counts x in EFix(f^n, alpha, ell) whose Birkhoff mean of phi deviates from v
// by at least delta. The mean is compared through the same predicate as the
// combinatorial oracle, so integer-valued Birkhoff sums agree bit-for-bit.
// For the doubling map, remember that card Fix(f^n) = 2^n - 1: the all-ones
// itinerary codes the same circle point as the all-zeros one (x = 0), so
// word-level oracles must drop exactly one of them (see
// oracle::doubling_deviation_count).
inline LdCount ld_count(const SystemSpec& sys, const Potential& phi, double v, double delta,
                        double alpha, unsigned long long ell, std::size_t n,
                        unsigned long long budget = orbits::kDefaultBudget) {
    if (n == 0) throw InvalidSpec("ld_count needs n >= 1");
    if (!(delta >= 0.0)) throw InvalidSpec("delta must be nonnegative");
    LdCount out;
    std::vector<Potential> pots{phi};
    orbits::visit_efix(
        sys, n, alpha, ell, pots,
        [&](const orbits::PeriodicPointRecord& rec) {
            double s = rec.birkhoff[0];
            if (std::isnan(s))
                throw DerivativeUnavailable(
                    "potential undefined on a certified orbit through a kink");
            out.efix_card += 1;
            if (oracle::mean_deviates(s / double(n), v, delta)) out.count += 1;
            return true;
        },
        budget);
    out.rate = std::log(double(std::max<unsigned long long>(out.count, 1))) / double(n);
    return out;
}

// ---------------------------------------------------------------------------
// The variational upper bound sup{ h_nu : |int phi dnu - v| >= delta }
// ---------------------------------------------------------------------------

struct LdBoundDetail {
    double value = kNegInf;
    double lo_side = kNegInf;  // sup of entropy over means <= v - delta
    double hi_side = kNegInf;  // sup of entropy over means >= v + delta
    bool minus_infinity = false;
    double m0 = 0.0;     // mean of phi under the measure of maximal entropy
    double h_top = 0.0;  // unconstrained entropy maximum
    double achievable_min = 0.0;
    double achievable_max = 0.0;
};

// The constrained-entropy function c -> K(c) is concave with maximum h_top at
// the MME mean m0, so the supremum over each ray is h_top when m0 lies in the
// ray and the ray-endpoint value otherwise; unachievable sides give -inf.
inline LdBoundDetail ld_bound_detail(const SystemSpec& sys, const Potential& phi, double v,
                                     double delta, const DualSearchSpace& space) {
    if (!(delta >= 0.0)) throw InvalidSpec("delta must be nonnegative");
    auto g = systems::as_cylinder(sys, phi);
    if (!g) throw OracleUnavailable("observable does not reduce to a cylinder table");
    if (!oracle::symbolically_exact(sys))
        throw OracleUnavailable("symbolic coding is not exact for " + sys.name());
    const Transition& base = sys.transition();
    Potential zero = Potential::constant(0.0);

    LdBoundDetail out;
    {
        // entropy maximizer and its mean, at a depth covering both g and space
        std::size_t d = std::max({g->depth(), space.depth, std::size_t(2)});
        auto dwords = admissible_words(base, d);
        Potential skeleton = Potential::cylinder_on_admissible(
            base, d, std::vector<double>(dwords.size(), 0.0));
        auto gm = oracle::sft_gibbs(oracle::model_from_cylinder(base, skeleton));
        out.h_top = gm.pressure;
        out.m0 = gm.mean_cylinder(*g);
    }
    auto [mn, mx] = oracle::achievable_mean_range(base, *g);
    out.achievable_min = mn;
    out.achievable_max = mx;

    auto side = [&](double target, bool ray_below) -> double {
        // sup of K over the ray {mean <= target} (ray_below) or {mean >= target}
        if (ray_below) {
            if (target < mn - 1e-12) return kNegInf;  // ray misses the range
            if (out.m0 <= target) return out.h_top;   // entropy max inside the ray
        } else {
            if (target > mx + 1e-12) return kNegInf;
            if (out.m0 >= target) return out.h_top;
        }
        return oracle::legendre_rate(base, zero, *g, target).value;
    };
    out.lo_side = side(v - delta, true);
    out.hi_side = side(v + delta, false);
    out.value = std::max(out.lo_side, out.hi_side);
    out.minus_infinity = (out.value == kNegInf);
    return out;
}

inline double ld_bound(const SystemSpec& sys, const Potential& phi, double v, double delta,
                       const DualSearchSpace& space) {
    return ld_bound_detail(sys, phi, v, delta, space).value;
}

}  // namespace deviations
}  // namespace perorbit

#endif  // PERORBIT_DEVIATIONS_HPP
