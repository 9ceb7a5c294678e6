#ifndef PERORBIT_ORACLE_HPP
#define PERORBIT_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "perorbit/errors.hpp"
#include "perorbit/logsum.hpp"
#include "perorbit/systems.hpp"
#include "perorbit/words.hpp"

namespace perorbit {
namespace oracle {

using systems::Potential;
using systems::PotentialKind;
using systems::SystemSpec;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Weighted Markov models (transfer matrices) over cylinder states
// ---------------------------------------------------------------------------

// States are the admissible (d-1)-words of the base transition; an edge u->v
// exists when u and v overlap in d-2 symbols and the final pair is admissible.
// The edge carries the d-word u + last(v) and the log-weight of the potential
// on that word.
struct MarkovModel {
    std::size_t base_alphabet = 0;
    std::size_t depth = 2;  // canonical cylinder depth d
    std::vector<Word> states;
    std::vector<int32_t> state_index;  // dense code -> index, -1 if inadmissible
    Transition base;
    Transition stra;  // transition between states
    struct Edge {
        uint32_t to;
        double logw;
    };
    std::vector<std::vector<Edge>> out_edges;
    std::vector<std::vector<Edge>> in_edges;  // (from, logw) mirrored for transposes

    std::size_t size() const { return states.size(); }

    std::size_t state_code(const Word& w, std::size_t offset = 0) const {
        std::size_t code = 0;
        for (std::size_t i = 0; i < depth - 1; ++i)
            code = code * base_alphabet + w[(offset + i) % w.size()];
        return code;
    }

    int32_t state_of(const Word& w, std::size_t offset = 0) const {
        return state_index[state_code(w, offset)];
    }

    // d-word carried by edge (u -> v)
    Word edge_word(std::size_t u, std::size_t v) const {
        Word w = states[u];
        w.push_back(states[v].back());
        return w;
    }
};

inline MarkovModel model_from_cylinder(const Transition& base, const Potential& phi) {
    if (phi.kind() != PotentialKind::CylinderLocallyConstant)
        throw InvalidSpec("transfer-matrix models require a cylinder potential");
    MarkovModel m;
    m.base = base;
    m.base_alphabet = base.alphabet_size();
    m.depth = std::max<std::size_t>(phi.depth(), 2);
    m.states = admissible_words(base, m.depth - 1);
    if (m.states.empty()) throw InvalidSpec("transition admits no words");
    if (m.states.size() > 4096)
        throw InvalidSpec("cylinder depth too large: state space exceeds 4096");

    std::size_t codes = 1;
    for (std::size_t i = 0; i + 1 < m.depth; ++i) codes *= m.base_alphabet;
    m.state_index.assign(codes, -1);
    for (std::size_t s = 0; s < m.states.size(); ++s)
        m.state_index[m.state_code(m.states[s])] = static_cast<int32_t>(s);

    std::size_t k = m.states.size();
    m.stra = Transition(k, false);
    m.out_edges.assign(k, {});
    m.in_edges.assign(k, {});
    for (std::size_t u = 0; u < k; ++u) {
        const Word& a = m.states[u];
        for (std::size_t v = 0; v < k; ++v) {
            const Word& b = m.states[v];
            bool ok = true;
            for (std::size_t i = 0; i + 1 < m.depth - 1 && ok; ++i)
                ok = (a[i + 1] == b[i]);
            if (ok) ok = base.allowed(a.back(), b.back());
            if (!ok) continue;
            Word dword = a;
            dword.push_back(b.back());
            double w = phi.table_entry(dword);
            m.stra.set(u, v, true);
            m.out_edges[u].push_back({static_cast<uint32_t>(v), w});
            m.in_edges[v].push_back({static_cast<uint32_t>(u), w});
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Perron eigendata by shifted power iteration
// ---------------------------------------------------------------------------

struct EigenData {
    double log_lambda = kNegInf;
    std::vector<double> right;  // scaled so sum = 1
    std::vector<double> left;   // scaled so left . right = 1
    std::size_t iterations = 0;
    double residual = 0.0;
};

namespace detail {

// Power iteration on exp(logw - W) + I with all-ones start; the +I shift makes
// periodic transition structures converge, W prevents overflow.
inline std::pair<double, std::vector<double>> power_leading(
    const std::vector<std::vector<MarkovModel::Edge>>& rows, double W, std::size_t& iters,
    double& resid) {
    std::size_t k = rows.size();
    std::vector<double> x(k, 1.0 / double(k)), y(k);
    double s = 0.0;
    const std::size_t cap = 1000000;
    for (iters = 1; iters <= cap; ++iters) {
        for (std::size_t i = 0; i < k; ++i) {
            double acc = x[i];  // the +I shift
            for (const auto& e : rows[i]) acc += std::exp(e.logw - W) * x[e.to];
            y[i] = acc;
        }
        s = 0.0;
        for (double v : y) s += v;
        double worst = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            worst = std::max(worst, std::fabs(y[i] - s * x[i]));
            x[i] = y[i] / s;
        }
        resid = worst / s;
        if (resid <= 1e-13) return {s - 1.0, x};
    }
    throw NoConvergence("power iteration did not reach tolerance");
}

}  // namespace detail

inline EigenData leading_eigendata(const MarkovModel& m) {
    if (!m.stra.irreducible())
        throw NotIrreducible("state transition graph is not strongly connected");
    double W = kNegInf;
    for (const auto& row : m.out_edges)
        for (const auto& e : row) W = std::max(W, e.logw);
    if (W == kNegInf) throw NotIrreducible("model has no edges");

    EigenData ed;
    std::size_t it_r = 0, it_l = 0;
    double res_r = 0.0, res_l = 0.0;
    auto [lam_r, right] = detail::power_leading(m.out_edges, W, it_r, res_r);
    auto [lam_l, left] = detail::power_leading(m.in_edges, W, it_l, res_l);
    (void)lam_l;
    if (!(lam_r > 0.0))
        throw NoConvergence("leading eigenvalue not positive after shift removal");
    ed.log_lambda = W + std::log(lam_r);
    ed.right = std::move(right);
    ed.left = std::move(left);
    double dot = 0.0;
    for (std::size_t i = 0; i < ed.right.size(); ++i) dot += ed.left[i] * ed.right[i];
    for (double& v : ed.left) v /= dot;
    ed.iterations = it_r + it_l;
    ed.residual = std::max(res_r, res_l);
    return ed;
}

// log of the spectral radius of M_ij = transition_ij e^{w_ij}; equals the
// topological pressure of the cylinder potential on the subshift.
inline double sft_pressure(const MarkovModel& m) { return leading_eigendata(m).log_lambda; }

// ---------------------------------------------------------------------------
// Gibbs (Markov) measures
// ---------------------------------------------------------------------------

struct GibbsMeasure {
    MarkovModel model;
    double log_lambda = 0.0;
    double pressure = 0.0;
    double entropy = 0.0;
    std::vector<double> pi;  // stationary vector over states
    // stochastic matrix rows aligned with model.out_edges
    std::vector<std::vector<double>> p_rows;

    // Measure of the cylinder [w] (any word length >= 1).
    double cylinder_mass(const Word& w) const {
        std::size_t q = model.depth - 1;
        if (w.size() < q) {
            double acc = 0.0;
            for (std::size_t s = 0; s < model.states.size(); ++s) {
                bool pref = true;
                for (std::size_t i = 0; i < w.size() && pref; ++i)
                    pref = (model.states[s][i] == w[i]);
                if (pref) acc += pi[s];
            }
            return acc;
        }
        int32_t cur = state_at(w, 0);
        if (cur < 0) return 0.0;
        double mass = pi[cur];
        for (std::size_t j = 0; j + q < w.size(); ++j) {
            int32_t nxt = state_at(w, j + 1);
            if (nxt < 0) return 0.0;
            double step = transition_prob(cur, nxt);
            if (step == 0.0) return 0.0;
            mass *= step;
            cur = nxt;
        }
        return mass;
    }

    // integral of a cylinder potential psi
    double mean_cylinder(const Potential& psi) const {
        auto words = admissible_words(model.base, psi.depth());
        double acc = 0.0;
        for (const Word& w : words) acc += psi.table_entry(w) * cylinder_mass(w);
        return acc;
    }

    // stationary probability that a coordinate carries `symbol`
    double symbol_marginal(std::size_t symbol) const {
        double acc = 0.0;
        for (std::size_t s = 0; s < model.states.size(); ++s)
            if (model.states[s][0] == symbol) acc += pi[s];
        return acc;
    }

    double transition_prob(std::size_t u, std::size_t v) const {
        const auto& row = model.out_edges[u];
        for (std::size_t e = 0; e < row.size(); ++e)
            if (row[e].to == v) return p_rows[u][e];
        return 0.0;
    }

private:
    int32_t state_at(const Word& w, std::size_t offset) const {
        // non-cyclic state read; requires offset + depth-1 <= |w|
        std::size_t code = 0;
        for (std::size_t i = 0; i + 1 < model.depth; ++i)
            code = code * model.base_alphabet + w[offset + i];
        return model.state_index[code];
    }
};

inline GibbsMeasure sft_gibbs(const MarkovModel& m) {
    EigenData ed = leading_eigendata(m);
    GibbsMeasure g;
    g.model = m;
    g.log_lambda = ed.log_lambda;
    g.pressure = ed.log_lambda;
    g.pi.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) g.pi[i] = ed.left[i] * ed.right[i];
    // P_ij = M_ij r_j / (lambda r_i), computed in log space
    g.p_rows.resize(m.size());
    double mean_w = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        g.p_rows[i].resize(m.out_edges[i].size());
        double rowsum = 0.0;
        for (std::size_t e = 0; e < m.out_edges[i].size(); ++e) {
            const auto& edge = m.out_edges[i][e];
            double p = std::exp(edge.logw - ed.log_lambda) * ed.right[edge.to] / ed.right[i];
            g.p_rows[i][e] = p;
            rowsum += p;
        }
        // remove the tiny power-iteration residue so rows are exactly stochastic
        if (rowsum > 0.0)
            for (double& p : g.p_rows[i]) p /= rowsum;
        for (std::size_t e = 0; e < m.out_edges[i].size(); ++e)
            mean_w += g.pi[i] * g.p_rows[i][e] * m.out_edges[i][e].logw;
    }
    g.entropy = g.log_lambda - mean_w;
    return g;
}

// ---------------------------------------------------------------------------
// Exact-oracle dispatch for concrete systems
// ---------------------------------------------------------------------------

// The symbolic transfer-matrix oracle is exact for subshifts and for maps
// whose coding is a full/Markov conjugacy: doubling, ManPo (degree-2 circle
// coverings with all periodic orbits repelling), and the full tent slope 2.
inline bool symbolically_exact(const SystemSpec& sys) {
    if (!sys.is_map()) return true;
    switch (sys.family()) {
        case systems::MapFamily::Doubling:
        case systems::MapFamily::ManPo:
            return true;
        case systems::MapFamily::Tent:
            return sys.parameter() == 2.0;
        default:
            return false;
    }
}

inline MarkovModel model_for(const SystemSpec& sys, const Potential& phi) {
    auto cyl = systems::as_cylinder(sys, phi);
    if (!cyl)
        throw OracleUnavailable("potential does not reduce to a cylinder table on " +
                                sys.name());
    if (!symbolically_exact(sys))
        throw OracleUnavailable("symbolic coding is not exact for " + sys.name());
    return model_from_cylinder(sys.transition(), *cyl);
}

// Exact topological pressure, or OracleUnavailable.
inline double oracle_pressure(const SystemSpec& sys, const Potential& phi) {
    return sft_pressure(model_for(sys, phi));
}

inline GibbsMeasure oracle_gibbs(const SystemSpec& sys, const Potential& phi) {
    return sft_gibbs(model_for(sys, phi));
}

// Exact topological entropy for the built-in families.
inline double oracle_h_top(const SystemSpec& sys) {
    if (sys.is_map()) {
        switch (sys.family()) {
            case systems::MapFamily::Doubling:
            case systems::MapFamily::ManPo:
                return std::log(2.0);
            case systems::MapFamily::Tent:
                return std::log(sys.parameter());
            default:
                throw OracleUnavailable("no entropy formula for this map");
        }
    }
    return oracle_pressure(sys, Potential::constant(0.0));
}

// ---------------------------------------------------------------------------
// Separated-set pressure (greedy maximal sets on a fixed grid)
// ---------------------------------------------------------------------------

struct SeparatedSetData {
    double pressure;      // growth-rate estimate log Z_n - log Z_{n-1}
    double literal_rate;  // (1/n) log Z_n
    double log_z_n;
    double log_z_prev;
    std::size_t card_n;
    std::size_t card_prev;
    std::size_t grid_log2_used;  // grid depth after resolution-driven deepening
};

namespace detail {

inline double point_metric(const SystemSpec& sys, double a, double b) {
    double d = std::fabs(a - b);
    if (sys.is_circle()) d = std::min(d, 1.0 - d);
    return d;
}

inline double birkhoff_at_point(const SystemSpec& sys, const Potential& phi, double x,
                                std::size_t n) {
    double acc = 0.0;
    switch (phi.kind()) {
        case PotentialKind::Constant:
            return double(n) * phi.constant_value();
        case PotentialKind::CylinderLocallyConstant: {
            std::size_t m = phi.depth();
            std::vector<uint8_t> syms(n + m - 1);
            double z = x;
            for (std::size_t i = 0; i < n + m - 1; ++i) {
                syms[i] = static_cast<uint8_t>(sys.branch_of(z));
                z = sys.apply(z).image;
            }
            Word window(m);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < m; ++j) window[j] = syms[i + j];
                acc += phi.table_entry(window);
            }
            return acc;
        }
        case PotentialKind::GeometricFamily: {
            double z = x;
            for (std::size_t i = 0; i < n; ++i) {
                for (double bad : sys.nondifferentiable_points())
                    if (z == bad)
                        throw DerivativeUnavailable("orbit hits a non-differentiable point");
                auto mi = sys.apply(z);
                acc += std::log(std::fabs(mi.derivative));
                z = mi.image;
            }
            return -phi.geometric_t() * acc;
        }
        case PotentialKind::Analytic: {
            double z = x;
            for (std::size_t i = 0; i < n; ++i) {
                acc += phi.analytic_value(z);
                z = sys.apply(z).image;
            }
            return acc;
        }
    }
    throw InvalidSpec("unreachable potential kind");
}

// The greedy pass below keeps roughly every ceil(eps * 2^g / L^{n-1})-th grid
// point, where L bounds |f'|; integer rounding of that stride perturbs the
// one-step ratio log Z_n - log Z_{n-1} by O(1/stride). Deepen the grid until
// the stride is at least 64 so the perturbation stays below ~0.01, capping the
// deepening at 2^24 points to bound memory. An explicit caller request above
// the cap is honored as given.
inline std::size_t resolved_grid_log2(const SystemSpec& sys, std::size_t n, double eps,
                                      std::size_t requested) {
    constexpr std::size_t kAutoCap = 24;
    if (!sys.is_map() || n < 2 || requested >= kAutoCap) return requested;
    double lip = 1.0;
    for (std::size_t b = 0; b < sys.branches().size(); ++b)
        lip = std::max(lip, sys.abs_derivative_range(b).second);
    double need = std::log2(64.0 / eps) + double(n - 1) * std::log2(lip);
    if (need <= double(requested)) return requested;
    return std::min(kAutoCap, static_cast<std::size_t>(std::ceil(need)));
}

// Greedy maximal (n, eps)-separated subset of the 2^grid_log2 uniform grid,
// scanned in ascending order; returns log sum of exp(S_n phi) over the set.
inline std::pair<double, std::size_t> greedy_separated_logsum(const SystemSpec& sys,
                                                              const Potential& phi,
                                                              std::size_t n, double eps,
                                                              std::size_t grid_log2) {
    if (!sys.is_map()) throw NotAMap("separated sets live on map systems");
    if (!(eps > 0.0)) throw InvalidSpec("separation scale must be positive");
    const std::size_t grid = std::size_t(1) << grid_log2;
    const std::size_t cells = static_cast<std::size_t>(std::ceil(1.0 / eps));

    std::vector<double> orbits;  // kept orbits, flattened (kept * n)
    std::vector<double> first, last;
    std::unordered_map<uint64_t, std::vector<uint32_t>> buckets;
    auto cell_of = [&](double v) {
        auto c = static_cast<std::size_t>(v / eps);
        return std::min(c, cells - 1);
    };
    LogSumAcc z;
    std::vector<double> pts(n);

    std::size_t kept = 0;
    for (std::size_t j = 0; j < grid; ++j) {
        double x = double(j) / double(grid);
        double zpt = x;
        for (std::size_t i = 0; i < n; ++i) {
            pts[i] = zpt;
            zpt = sys.apply(zpt).image;
        }
        // conflict iff some kept point is eps-close in every coordinate
        bool conflict = false;
        std::size_t c0 = cell_of(pts[0]), cl = cell_of(pts[n - 1]);
        for (int d0 = -1; d0 <= 1 && !conflict; ++d0) {
            for (int dl = -1; dl <= 1 && !conflict; ++dl) {
                auto wrapc = [&](std::size_t c, int d) -> std::optional<std::size_t> {
                    long long v = static_cast<long long>(c) + d;
                    if (sys.is_circle()) {
                        return static_cast<std::size_t>((v + cells) % cells);
                    }
                    if (v < 0 || v >= static_cast<long long>(cells)) return std::nullopt;
                    return static_cast<std::size_t>(v);
                };
                auto a = wrapc(c0, d0), b = wrapc(cl, dl);
                if (!a || !b) continue;
                auto it = buckets.find(uint64_t(*a) * cells + *b);
                if (it == buckets.end()) continue;
                for (uint32_t idx : it->second) {
                    const double* o = &orbits[std::size_t(idx) * n];
                    bool close = true;
                    for (std::size_t i = n; i-- > 0;) {
                        if (point_metric(sys, pts[i], o[i]) > eps) {
                            close = false;
                            break;
                        }
                    }
                    if (close) {
                        conflict = true;
                        break;
                    }
                }
            }
        }
        if (conflict) continue;

        if ((kept + 1) * n > (std::size_t(1) << 23))
            throw BudgetExceeded("separated-set construction exceeds its memory budget",
                                 static_cast<unsigned long long>(kept));
        orbits.insert(orbits.end(), pts.begin(), pts.end());
        buckets[uint64_t(c0) * cells + cl].push_back(static_cast<uint32_t>(kept));
        ++kept;
        z.add(birkhoff_at_point(sys, phi, x, n));
    }
    return {z.value(), kept};
}

}  // namespace detail

// Pressure from maximal (n,eps)-separated sets. The partition sums carry an
// eps-dependent prefactor, so the exponential growth rate is read off as the
// one-step ratio log Z_n - log Z_{n-1}; (1/n) log Z_n is kept as a diagnostic.
inline SeparatedSetData separated_set_detail(const SystemSpec& sys, const Potential& phi,
                                             std::size_t n, double eps,
                                             std::size_t grid_log2 = 20) {
    if (n == 0) throw InvalidSpec("separated-set pressure needs n >= 1");
    SeparatedSetData out{};
    const std::size_t g = detail::resolved_grid_log2(sys, n, eps, grid_log2);
    out.grid_log2_used = g;
    auto [lz, cn] = detail::greedy_separated_logsum(sys, phi, n, eps, g);
    out.log_z_n = lz;
    out.card_n = cn;
    out.literal_rate = lz / double(n);
    if (n == 1) {
        out.pressure = out.literal_rate;
        out.log_z_prev = kNegInf;
        out.card_prev = 0;
    } else {
        auto [lzp, cp] = detail::greedy_separated_logsum(sys, phi, n - 1, eps, g);
        out.log_z_prev = lzp;
        out.card_prev = cp;
        out.pressure = lz - lzp;
    }
    return out;
}

inline double separated_set_pressure(const SystemSpec& sys, const Potential& phi,
                                     std::size_t n, double eps, std::size_t grid_log2 = 20) {
    return separated_set_detail(sys, phi, n, eps, grid_log2).pressure;
}

// ---------------------------------------------------------------------------
// Cycle means (Karp) and Legendre-transform entropy under a mean constraint
// ---------------------------------------------------------------------------

namespace detail {

// Maximum cycle mean of edge values on the model graph (Karp's algorithm).
inline double max_cycle_mean(const MarkovModel& m, const std::vector<std::vector<double>>& val) {
    std::size_t k = m.size();
    if (k > 512) throw InvalidSpec("cycle-mean oracle limited to 512 states");
    const double ninf = kNegInf;
    // dp[t][v] = max value of a t-edge walk ending at v
    std::vector<std::vector<double>> dp(k + 1, std::vector<double>(k, ninf));
    for (std::size_t v = 0; v < k; ++v) dp[0][v] = 0.0;
    for (std::size_t t = 1; t <= k; ++t)
        for (std::size_t u = 0; u < k; ++u) {
            if (dp[t - 1][u] == ninf) continue;
            for (std::size_t e = 0; e < m.out_edges[u].size(); ++e) {
                std::size_t v = m.out_edges[u][e].to;
                double cand = dp[t - 1][u] + val[u][e];
                if (cand > dp[t][v]) dp[t][v] = cand;
            }
        }
    double best = ninf;
    for (std::size_t v = 0; v < k; ++v) {
        if (dp[k][v] == ninf) continue;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < k; ++t) {
            if (dp[t][v] == ninf) continue;
            worst = std::min(worst, (dp[k][v] - dp[t][v]) / double(k - t));
        }
        best = std::max(best, worst);
    }
    if (best == ninf) throw NotIrreducible("graph has no cycles");
    return best;
}

struct LegendreWorkspace {
    MarkovModel model;                    // structure (weights overwritten per t)
    std::vector<std::vector<double>> fe;  // potential edge values
    std::vector<std::vector<double>> ge;  // observable edge values

    void set_t(double t) {
        for (std::size_t u = 0; u < model.size(); ++u)
            for (std::size_t e = 0; e < model.out_edges[u].size(); ++e) {
                double w = fe[u][e] + t * ge[u][e];
                model.out_edges[u][e].logw = w;
            }
        for (std::size_t v = 0; v < model.size(); ++v)
            for (auto& edge : model.in_edges[v]) {
                // mirror the out-edge weight
                for (std::size_t e = 0; e < model.out_edges[edge.to].size(); ++e)
                    if (model.out_edges[edge.to][e].to == v)
                        edge.logw = model.out_edges[edge.to][e].logw;
            }
    }

    // pressure P(phi + t g) and the Gibbs mean of g at that parameter
    std::pair<double, double> pressure_and_mean(double t) {
        set_t(t);
        GibbsMeasure gm = sft_gibbs(model);
        double mean = 0.0;
        for (std::size_t u = 0; u < model.size(); ++u)
            for (std::size_t e = 0; e < model.out_edges[u].size(); ++e)
                mean += gm.pi[u] * gm.p_rows[u][e] * ge[u][e];
        return {gm.pressure, mean};
    }
};

inline LegendreWorkspace make_legendre_workspace(const Transition& base, const Potential& phi,
                                                 const Potential& g) {
    auto usable = [](const Potential& p) {
        return p.kind() == PotentialKind::Constant ||
               p.kind() == PotentialKind::CylinderLocallyConstant;
    };
    if (!usable(phi) || !usable(g))
        throw InvalidSpec("constrained-entropy oracle needs constant or cylinder inputs");
    std::size_t d = std::max({phi.depth(), g.depth(), std::size_t(2)});
    // model skeleton built with the observable's depth extended to d
    std::vector<double> zero_vals;
    auto words = admissible_words(base, d);
    zero_vals.assign(words.size(), 0.0);
    Potential skeleton = Potential::cylinder_on_admissible(base, d, zero_vals);
    LegendreWorkspace ws;
    ws.model = model_from_cylinder(base, skeleton);
    ws.fe.resize(ws.model.size());
    ws.ge.resize(ws.model.size());
    auto edge_val = [&](const Potential& p, std::size_t u, std::size_t v) {
        if (p.kind() == PotentialKind::Constant) return p.constant_value();
        Word w = ws.model.edge_word(u, v);
        return p.table_entry(w);
    };
    for (std::size_t u = 0; u < ws.model.size(); ++u) {
        ws.fe[u].resize(ws.model.out_edges[u].size());
        ws.ge[u].resize(ws.model.out_edges[u].size());
        for (std::size_t e = 0; e < ws.model.out_edges[u].size(); ++e) {
            std::size_t v = ws.model.out_edges[u][e].to;
            ws.fe[u][e] = edge_val(phi, u, v);
            ws.ge[u][e] = edge_val(g, u, v);
        }
    }
    return ws;
}

}  // namespace detail

struct LegendreResult {
    double value;           // sup{ h + int phi : int g = c }
    double t_star;          // minimizing parameter
    double achievable_min;  // cycle-mean range of g
    double achievable_max;
    bool boundary_capped;   // target at the edge of the range; t was capped
};

// Means of g realizable by invariant measures: [min, max] cycle mean (Karp).
inline std::pair<double, double> achievable_mean_range(const Transition& base,
                                                       const Potential& g) {
    auto ws = detail::make_legendre_workspace(base, Potential::constant(0.0), g);
    double mx = detail::max_cycle_mean(ws.model, ws.ge);
    auto neg = ws.ge;
    for (auto& row : neg)
        for (double& v : row) v = -v;
    double mn = -detail::max_cycle_mean(ws.model, neg);
    return {mn, mx};
}

// Constrained equilibrium value via convex duality:
//   sup{ h_nu + int phi dnu : int g dnu = c } = inf_t ( P(phi + t g) - t c ).
inline LegendreResult legendre_rate(const Transition& base, const Potential& phi,
                                    const Potential& g, double c) {
    auto ws = detail::make_legendre_workspace(base, phi, g);
    LegendreResult out{};
    out.achievable_max = detail::max_cycle_mean(ws.model, ws.ge);
    {
        auto neg = ws.ge;
        for (auto& row : neg)
            for (double& v : row) v = -v;
        out.achievable_min = -detail::max_cycle_mean(ws.model, neg);
    }
    if (c < out.achievable_min - 1e-12 || c > out.achievable_max + 1e-12)
        throw TargetUnachievable("target mean " + fmt17(c) + " outside [" +
                                 fmt17(out.achievable_min) + ", " +
                                 fmt17(out.achievable_max) + "]");

    // bracket t with P'(lo) <= c <= P'(hi); P' is increasing
    double span = 64.0;
    double lo = -span, hi = span;
    const double t_cap = double(1 << 20);
    auto mean_at = [&](double t) { return ws.pressure_and_mean(t).second; };
    while (mean_at(hi) < c && hi < t_cap) hi *= 2.0;
    while (mean_at(lo) > c && lo > -t_cap) lo *= 2.0;
    out.boundary_capped = (mean_at(hi) < c) || (mean_at(lo) > c);
    if (!out.boundary_capped) {
        while (hi - lo > 1e-10) {
            double mid = 0.5 * (lo + hi);
            (mean_at(mid) < c ? lo : hi) = mid;
        }
    }
    out.t_star = out.boundary_capped ? (mean_at(hi) < c ? hi : lo) : 0.5 * (lo + hi);
    auto [p, mean] = ws.pressure_and_mean(out.t_star);
    (void)mean;
    out.value = p - out.t_star * c;
    return out;
}

// ---------------------------------------------------------------------------
// Combinatorial counting oracle (full 2-shift)
// ---------------------------------------------------------------------------

inline unsigned long long binomial_coefficient(std::size_t n, std::size_t k) {
    if (n > 64) throw InvalidSpec("binomial oracle limited to n <= 64");
    if (k > n) return 0;
    // Pascal recurrence in exact 64-bit arithmetic
    std::vector<unsigned long long> row(n + 1, 0);
    row[0] = 1;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = std::min(i, k); j > 0; --j) row[j] += row[j - 1];
    return row[k];
}

// The deviation predicate shared verbatim with the periodic-orbit counting
// path, so integer agreement is bit-for-bit: both sides compute the same
// division and the same comparison.
inline bool mean_deviates(double mean, double v, double delta) {
    return std::fabs(mean - v) >= delta;
}

inline bool frequency_deviates(std::size_t k, std::size_t n, double v, double delta) {
    return mean_deviates(double(k) / double(n), v, delta);
}

// Count binary words of length n whose zero-count satisfies the predicate.
inline unsigned long long binomial_count(std::size_t n,
                                         const std::function<bool(std::size_t)>& zero_count_ok) {
    unsigned long long total = 0;
    for (std::size_t k = 0; k <= n; ++k) {
        if (!zero_count_ok(k)) continue;
        unsigned long long c = binomial_coefficient(n, k);
        if (c > ~0ull - total) throw Error("binomial count overflow");
        total += c;
    }
    return total;
}

inline unsigned long long binomial_deviation_count(std::size_t n, double v, double delta) {
    return binomial_count(n, [&](std::size_t k) { return frequency_deviates(k, n, v, delta); });
}

// Closed-form count for the doubling map: period-n points correspond to the
// 2^n binary words minus the all-ones word, because on the circle the words
// 0^n and 1^n both code the fixed point at the origin (card Fix = 2^n - 1).
// The all-ones word carries zero-count k = 0.
inline unsigned long long doubling_deviation_count(std::size_t n, double v, double delta) {
    unsigned long long c = binomial_deviation_count(n, v, delta);
    if (frequency_deviates(0, n, v, delta)) c -= 1;
    return c;
}

// ---------------------------------------------------------------------------
// Weighted Ulam discretization (approximate oracle; first-order biased)
// ---------------------------------------------------------------------------

struct UlamResult {
    double pressure;
    std::size_t bins;
    std::size_t iterations;
    double residual;
    bool first_order_method = true;  // accuracy flag: midpoint-weighted Ulam
};

// U_ab = e^{phi(mid a)} * m(f(B_a) cap B_b) / m(B_b): the matrix acts like the
// transfer operator, so column sums at phi = 0 equal the local covering degree
// and log(leading eigenvalue) approximates the pressure. `parts` are summed
// pointwise (for pressure differences under a shared discretization).
inline UlamResult ulam_pressure(const SystemSpec& sys, const std::vector<Potential>& parts,
                                std::size_t bins) {
    if (!sys.is_map()) throw NotAMap("the Ulam oracle needs a map system");
    if (bins < 2 || bins > (std::size_t(1) << 14))
        throw InvalidSpec("ulam bins must lie in [2, 16384]");
    const double h = 1.0 / double(bins);

    std::vector<std::vector<std::pair<uint32_t, double>>> rows(bins);
    for (std::size_t a = 0; a < bins; ++a) {
        double alo = double(a) * h, ahi = double(a + 1) * h;
        double lw = 0.0;
        for (const Potential& phi : parts)
            lw += systems::evaluate_potential(phi, sys, (alo + ahi) * 0.5);
        double wgt = std::exp(lw);
        // split [alo, ahi) at branch boundaries
        std::vector<double> cuts{alo};
        for (const auto& br : sys.branches())
            if (br.lo > alo && br.lo < ahi) cuts.push_back(br.lo);
        cuts.push_back(ahi);
        std::sort(cuts.begin(), cuts.end());
        auto& row = rows[a];
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            double u = cuts[p], v = cuts[p + 1];
            if (!(v > u)) continue;
            std::size_t b = sys.branch_of(u);
            double iu = sys.branch_value(b, u).image;
            double iv = sys.branch_value(b, v).image;
            double ilo = std::min(iu, iv), ihi = std::max(iu, iv);
            ihi = std::min(ihi, 1.0);
            ilo = std::max(ilo, 0.0);
            std::size_t b0 = std::min(static_cast<std::size_t>(ilo / h), bins - 1);
            std::size_t b1 = std::min(static_cast<std::size_t>(ihi / h), bins - 1);
            for (std::size_t t = b0; t <= b1; ++t) {
                double ov = std::min(ihi, double(t + 1) * h) - std::max(ilo, double(t) * h);
                if (ov <= 0.0) continue;
                row.emplace_back(static_cast<uint32_t>(t), wgt * ov / h);
            }
        }
        // merge duplicate column entries for a clean sparse row
        std::sort(row.begin(), row.end());
        std::size_t w = 0;
        for (std::size_t r = 0; r < row.size(); ++r) {
            if (w > 0 && row[w - 1].first == row[r].first)
                row[w - 1].second += row[r].second;
            else
                row[w++] = row[r];
        }
        row.resize(w);
    }

    // shifted power iteration, deterministic all-ones start
    std::vector<double> x(bins, 1.0 / double(bins)), y(bins);
    double s = 0.0, resid = 0.0;
    std::size_t it = 0;
    const std::size_t cap = 200000;
    for (it = 1; it <= cap; ++it) {
        for (std::size_t i = 0; i < bins; ++i) {
            double acc = x[i];
            for (const auto& [j, w] : rows[i]) acc += w * x[j];
            y[i] = acc;
        }
        s = 0.0;
        for (double v : y) s += v;
        double worst = 0.0;
        for (std::size_t i = 0; i < bins; ++i) {
            worst = std::max(worst, std::fabs(y[i] - s * x[i]));
            x[i] = y[i] / s;
        }
        resid = worst / s;
        if (resid <= 1e-12) break;
    }
    if (it > cap) throw NoConvergence("ulam power iteration did not settle");
    UlamResult out;
    out.pressure = std::log(s - 1.0);
    out.bins = bins;
    out.iterations = it;
    out.residual = resid;
    return out;
}

inline UlamResult ulam_pressure(const SystemSpec& sys, const Potential& phi,
                                std::size_t bins) {
    return ulam_pressure(sys, std::vector<Potential>{phi}, bins);
}

}  // namespace oracle
}  // namespace perorbit

#endif  // PERORBIT_ORACLE_HPP
