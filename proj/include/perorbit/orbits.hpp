#ifndef PERORBIT_ORBITS_HPP
#define PERORBIT_ORBITS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "perorbit/errors.hpp"
#include "perorbit/systems.hpp"
#include "perorbit/words.hpp"

namespace perorbit {
namespace orbits {

using systems::Potential;
using systems::PotentialKind;
using systems::SystemSpec;

// (lambda_1(x), ell_min) certifying the k-step expansion lower bound
// |(f^k)'(f^i x)| >= (1/ell) e^{k alpha} for all k >= 1, 0 <= i < n.
struct ExpansionCertificate {
    static constexpr unsigned long long kInfinite =
        std::numeric_limits<unsigned long long>::max();

    double alpha = std::numeric_limits<double>::quiet_NaN();
    unsigned long long ell_min = 0;  // 0 = not yet certified
    double log_c = std::numeric_limits<double>::quiet_NaN();  // log of the min constant

    bool certified() const { return ell_min != 0; }
    bool infinite() const { return ell_min == kInfinite; }
};

struct PeriodicPointRecord {
    Word word;                 // itinerary of length n
    std::optional<double> x;   // coordinate (absent on subshifts)
    double err_radius = 0.0;   // bound on |x - exact point| where available
    std::vector<double> log_deriv_per_step;  // log|f'(f^i x)|; empty if unavailable
    double lyapunov = std::numeric_limits<double>::quiet_NaN();
    // S_n phi per potential, index-aligned with the potential list passed to
    // the enumeration call; NaN marks "undefined along this orbit".
    std::vector<double> birkhoff;
    ExpansionCertificate certificate;
    std::size_t multiplicity = 1;  // #distinct rotations represented (orbits-only mode)

    std::size_t period() const { return word.size(); }
};

// ---------------------------------------------------------------------------
// Certification: finite reduction of the all-k condition.
//
// For a period-n point with lambda_1 >= alpha, writing k = q n + r reduces the
// condition to 1 <= k <= n; the binding constant is
//   C = min_{0<=i<n, 1<=k<=n} |(f^k)'(f^i x)| e^{-k alpha},  ell_min = ceil(1/C).
// A 1e-9 slack absorbs float ties at equality cases (e.g. alpha = log 2 on the
// doubling map) and preserves monotonicity in alpha.
// ---------------------------------------------------------------------------
class Certifier {
public:
    ExpansionCertificate run(const std::vector<double>& log_derivs, double alpha) {
        std::size_t n = log_derivs.size();
        if (n == 0)
            throw DerivativeUnavailable("certificate requires per-step derivative data");
        prefix_.resize(2 * n + 1);
        prefix_[0] = 0.0;
        for (std::size_t i = 0; i < 2 * n; ++i)
            prefix_[i + 1] = prefix_[i] + log_derivs[i % n];
        if (kalpha_.size() != n + 1 || alpha_ != alpha) {
            alpha_ = alpha;
            kalpha_.resize(n + 1);
            for (std::size_t k = 0; k <= n; ++k) kalpha_[k] = double(k) * alpha;
        }

        ExpansionCertificate cert;
        cert.alpha = alpha;
        double lyap = prefix_[n] / double(n);
        if (lyap < alpha - 1e-9) {
            cert.ell_min = ExpansionCertificate::kInfinite;
            return cert;
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double pi = prefix_[i];
            for (std::size_t k = 1; k <= n; ++k) {
                double v = prefix_[i + k] - pi - kalpha_[k];
                if (v < best) best = v;
            }
        }
        cert.log_c = best;
        double inv_c = std::exp(-best) - 1e-9;
        if (inv_c <= 1.0) {
            cert.ell_min = 1;
        } else if (inv_c >= 9e18) {
            cert.ell_min = ExpansionCertificate::kInfinite - 1;  // saturated, still finite
        } else {
            cert.ell_min = static_cast<unsigned long long>(std::ceil(inv_c));
        }
        return cert;
    }

private:
    std::vector<double> prefix_;
    std::vector<double> kalpha_;
    double alpha_ = std::numeric_limits<double>::quiet_NaN();
};

inline ExpansionCertificate certify(const PeriodicPointRecord& rec, double alpha) {
    Certifier c;
    return c.run(rec.log_deriv_per_step, alpha);
}

// ---------------------------------------------------------------------------
// Periodic point location for maps
// ---------------------------------------------------------------------------

namespace detail {

// One full pullback sweep: the composed inverse branches of the word applied
// to y; maps [0,1) into the word's cylinder.
inline double pullback_sweep(const SystemSpec& sys, const Word& w, double y) {
    for (std::size_t i = w.size(); i-- > 0;) y = sys.inverse_in_branch(w[i], y);
    return y;
}

struct OrbitData {
    double residual = 0.0;        // wrapped f^n(x) - x
    double signed_product = 1.0;  // (f^n)'(x) with orientation
};

// Iterate n steps from y, filling orbit points and |log f'| when requested.
inline OrbitData orbit_pass(const SystemSpec& sys, double y, std::size_t n,
                            std::vector<double>* points, std::vector<double>* logd) {
    OrbitData od;
    double z = y;
    for (std::size_t i = 0; i < n; ++i) {
        if (points) (*points)[i] = z;
        systems::MapImage mi = sys.apply(z);
        if (logd) (*logd)[i] = std::log(std::fabs(mi.derivative));
        od.signed_product *= mi.derivative;
        z = mi.image;
    }
    double r = z - y;
    if (sys.is_circle()) r -= std::round(r);
    od.residual = r;
    return od;
}

inline double residual_tolerance(double signed_product) {
    return std::max(1e-12, std::fabs(signed_product) * std::pow(2.0, -50));
}

// Core locator; returns nullopt when the word codes no periodic point (the
// degenerate all-right word on circle maps whose fixed point collapses to
// x = 1 == 0, or an empty cylinder on non-full-branch slopes).
inline std::optional<double> try_locate(const SystemSpec& sys, const Word& w) {
    if (!sys.is_map()) throw NotAMap("locate_periodic requires a map system");
    if (w.empty()) throw InvalidSpec("locate_periodic needs a nonempty word");
    for (uint8_t c : w)
        if (c >= sys.branches().size()) throw InvalidSpec("word symbol is not a branch index");
    const std::size_t n = w.size();

    auto zero_candidate = [&]() -> std::optional<double> {
        // the origin is fixed for every built-in family; adopt it iff it codes w
        if (systems::itinerary(sys, 0.0, n) == w) return 0.0;
        return std::nullopt;
    };

    // Phase 0: if the origin is a fixed point coding w, it is the unique
    // periodic point of the cylinder; return it exactly (this keeps neutral
    // fixed points at 0.0 rather than at a Newton-residue-sized offset).
    if (sys.apply(0.0).image == 0.0) {
        if (auto z = zero_candidate()) return z;
    }

    // Phase 1: contraction sweeps through the composed inverse branches.
    double y = 0.5;
    for (int sweep = 0; sweep < 200; ++sweep) {
        double prev = y;
        y = pullback_sweep(sys, w, y);
        if (sys.is_circle() && y >= 1.0 - 1e-12) return zero_candidate();
        if (y == prev || std::fabs(y - prev) <= 1e-17) break;
    }
    if (y <= 1e-13) {
        auto z = zero_candidate();
        if (z) return z;
    }

    // Phase 2: Newton polish on h(x) = f^n(x) - x (circle-wrapped).
    std::vector<double> pts(n);
    bool newton_ok = false;
    OrbitData od;
    for (int it = 0; it < 50; ++it) {
        od = orbit_pass(sys, y, n, &pts, nullptr);
        if (std::fabs(od.residual) <= residual_tolerance(od.signed_product)) {
            newton_ok = true;
            break;
        }
        double denom = od.signed_product - 1.0;
        if (std::fabs(denom) < 1e-6) break;  // nearly neutral; bisection below
        double ynew = y - od.residual / denom;
        if (sys.is_circle()) {
            if (ynew >= 1.0 - 1e-12) return zero_candidate();
            if (ynew < 0.0) ynew = 0.0;
        } else {
            if (ynew < 0.0) ynew = 0.0;
            if (ynew > 1.0) ynew = 1.0;
        }
        if (ynew == y) break;
        y = ynew;
    }

    // Phase 3: monotone bisection on h(z) = G(z) - z over the leading branch
    // domain (G is one pullback sweep, a contraction, so h is decreasing).
    if (!newton_ok) {
        const auto& br = sys.branches()[w[0]];
        double lo = br.lo;
        double hi = sys.is_circle() ? std::nextafter(br.hi, 0.0) : br.hi;
        auto h = [&](double z) { return pullback_sweep(sys, w, z) - z; };
        double hlo = h(lo), hhi = h(hi);
        if (hlo == 0.0) {
            y = lo;
        } else if (hlo > 0.0 && hhi < 0.0) {
            for (int it = 0; it < 120; ++it) {
                double mid = 0.5 * (lo + hi);
                double hm = h(mid);
                if (hm == 0.0) { lo = hi = mid; break; }
                (hm > 0.0 ? lo : hi) = mid;
            }
            y = 0.5 * (lo + hi);
        }
        if (y <= 1e-13) {
            auto z = zero_candidate();
            if (z) return z;
        }
        od = orbit_pass(sys, y, n, &pts, nullptr);
        for (int it = 0; it < 10 && std::fabs(od.residual) >
                                        residual_tolerance(od.signed_product); ++it) {
            double denom = od.signed_product - 1.0;
            if (std::fabs(denom) < 1e-9) break;
            double ynew = y - od.residual / denom;
            if (ynew < 0.0) ynew = 0.0;
            if (ynew >= 1.0) break;
            y = ynew;
            od = orbit_pass(sys, y, n, &pts, nullptr);
        }
        if (std::fabs(od.residual) > residual_tolerance(od.signed_product)) {
            // On maps with pruned symbolic dynamics (tent slope < 2) the
            // pullback clamps at a branch boundary when the cylinder holds no
            // periodic point; the itinerary check rejects those. A stall on a
            // word the candidate still codes is a genuine numerical failure.
            if (systems::itinerary(sys, y, n) == w)
                throw NoConvergence("periodic point refinement stalled for word " +
                                    word_to_string(w));
            return std::nullopt;
        }
    }

    // Phase 4: the point must code the requested word, else the cylinder holds
    // no periodic point (degenerate identification or empty cylinder).
    if (systems::itinerary(sys, y, n) != w) return std::nullopt;
    return y;
}

}  // namespace detail

// The unique x with itinerary `word` and f^n(x) = x.
inline double locate_periodic(const SystemSpec& sys, const Word& word) {
    auto x = detail::try_locate(sys, word);
    if (!x)
        throw NoConvergence("word " + word_to_string(word) +
                            " codes no periodic point (degenerate or empty cylinder)");
    return *x;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

constexpr unsigned long long kDefaultBudget = 1ull << 24;

// Number of candidate periodic words of length n (trace of the transition
// power); guards enumeration cost before any work happens.
inline unsigned long long candidate_count(const SystemSpec& sys, std::size_t n,
                                          unsigned long long budget = kDefaultBudget) {
    unsigned long long count;
    try {
        count = sys.transition().trace_power(n);
    } catch (const Error&) {
        throw BudgetExceeded("admissible word count overflows 64 bits",
                             std::numeric_limits<unsigned long long>::max());
    }
    if (count > budget)
        throw BudgetExceeded("admissible word count " + std::to_string(count) +
                                 " exceeds budget " + std::to_string(budget),
                             count);
    return count;
}

namespace detail {

inline bool min_rotation_representative(const Word& w) {
    for (std::size_t r = 1; r < w.size(); ++r) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            uint8_t a = w[(i + r) % w.size()];
            if (a != w[i]) {
                if (a < w[i]) return false;  // a strictly smaller rotation exists
                break;
            }
        }
    }
    return true;
}

// Fill the per-potential Birkhoff sums of a record whose word/orbit data are
// already set. Symbolic kinds are summed from the word (exact); geometric and
// analytic kinds use the orbit.
inline void fill_birkhoff(const SystemSpec& sys, const std::vector<Potential>& pots,
                          const std::vector<double>& orbit_pts, PeriodicPointRecord& rec) {
    const std::size_t n = rec.word.size();
    rec.birkhoff.assign(pots.size(), 0.0);
    for (std::size_t p = 0; p < pots.size(); ++p) {
        const Potential& phi = pots[p];
        double s = 0.0;
        switch (phi.kind()) {
            case PotentialKind::Constant:
                s = double(n) * phi.constant_value();
                break;
            case PotentialKind::CylinderLocallyConstant:
                for (std::size_t i = 0; i < n; ++i) s += phi.table_entry(rec.word, i);
                break;
            case PotentialKind::GeometricFamily: {
                if (sys.is_map()) {
                    bool bad = false;
                    for (double bp : sys.nondifferentiable_points())
                        for (std::size_t i = 0; i < n && !bad; ++i)
                            if (orbit_pts[i] == bp) bad = true;
                    if (bad) {
                        s = std::numeric_limits<double>::quiet_NaN();
                    } else {
                        double acc = 0.0;
                        for (double ld : rec.log_deriv_per_step) acc += ld;
                        s = -phi.geometric_t() * acc;
                    }
                } else {
                    double acc = 0.0;
                    for (double ld : rec.log_deriv_per_step) acc += ld;
                    s = -phi.geometric_t() * acc;
                }
                break;
            }
            case PotentialKind::Analytic:
                for (std::size_t i = 0; i < n; ++i) s += phi.analytic_value(orbit_pts[i]);
                break;
        }
        rec.birkhoff[p] = s;
    }
}

}  // namespace detail

// Stream one PeriodicPointRecord per fixed point of f^n (or per orbit in
// orbits-only mode), in lexicographic word order. The record reference passed
// to the visitor is reused between calls; copy what must outlive the call.
// The visitor returns false to stop early.
inline void visit_fixed(const SystemSpec& sys, std::size_t n,
                        const std::vector<Potential>& potentials,
                        const std::function<bool(const PeriodicPointRecord&)>& visit,
                        unsigned long long budget = kDefaultBudget,
                        bool orbits_only = false) {
    if (n == 0) throw InvalidSpec("enumeration needs n >= 1");
    candidate_count(sys, n, budget);

    // fail fast on potential kinds that cannot be evaluated on this system
    for (const Potential& p : potentials) {
        if (!sys.is_map() && p.kind() == PotentialKind::Analytic)
            throw NotAMap("analytic potentials need coordinates");
        if (!sys.is_map() && p.kind() == PotentialKind::GeometricFamily &&
            !sys.geom_weights())
            throw DerivativeUnavailable("subshift carries no expansion weights");
    }

    PeriodicPointRecord rec;
    std::vector<double> orbit_pts(n);
    bool stop = false;

    visit_cyclic_words(sys.transition(), n, [&](const Word& w) -> bool {
        if (orbits_only && !detail::min_rotation_representative(w)) return true;

        rec.word = w;
        rec.multiplicity = orbits_only ? primitive_period(w) : 1;
        rec.certificate = ExpansionCertificate{};

        if (sys.is_map()) {
            auto x = detail::try_locate(sys, w);
            if (!x) return true;  // degenerate identification / empty cylinder
            rec.x = *x;
            rec.log_deriv_per_step.resize(n);
            auto od = detail::orbit_pass(sys, *x, n, &orbit_pts, &rec.log_deriv_per_step);
            double denom = std::fabs(od.signed_product) - 1.0;
            rec.err_radius = denom > 0.5 ? std::fabs(od.residual) / denom
                                         : std::numeric_limits<double>::quiet_NaN();
            double acc = 0.0;
            for (double ld : rec.log_deriv_per_step) acc += ld;
            rec.lyapunov = acc / double(n);
        } else {
            rec.x.reset();
            rec.err_radius = 0.0;
            if (sys.geom_weights()) {
                rec.log_deriv_per_step.resize(n);
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    rec.log_deriv_per_step[i] = (*sys.geom_weights())[w[i]];
                    acc += rec.log_deriv_per_step[i];
                }
                rec.lyapunov = acc / double(n);
            } else {
                rec.log_deriv_per_step.clear();
                rec.lyapunov = std::numeric_limits<double>::quiet_NaN();
            }
        }

        detail::fill_birkhoff(sys, potentials, orbit_pts, rec);
        if (!visit(rec)) {
            stop = true;
            return false;
        }
        return true;
    });
    (void)stop;
}

inline std::vector<PeriodicPointRecord> enumerate_fixed(
    const SystemSpec& sys, std::size_t n, const std::vector<Potential>& potentials,
    unsigned long long budget = kDefaultBudget, bool orbits_only = false) {
    std::vector<PeriodicPointRecord> out;
    visit_fixed(
        sys, n, potentials,
        [&](const PeriodicPointRecord& r) {
            out.push_back(r);
            return true;
        },
        budget, orbits_only);
    return out;
}

// Stream only the records certified into EFix(f^n, alpha, ell); the record's
// certificate field is filled. ell = ExpansionCertificate::kInfinite selects
// EFix(f^n, alpha).
inline void visit_efix(const SystemSpec& sys, std::size_t n, double alpha,
                       unsigned long long ell, const std::vector<Potential>& potentials,
                       const std::function<bool(const PeriodicPointRecord&)>& visit,
                       unsigned long long budget = kDefaultBudget) {
    Certifier certifier;
    visit_fixed(
        sys, n, potentials,
        [&](const PeriodicPointRecord& r) {
            ExpansionCertificate cert = certifier.run(r.log_deriv_per_step, alpha);
            if (cert.infinite() || cert.ell_min > ell) return true;
            // the shared record is const for visitors; copy-in the certificate
            auto& mut = const_cast<PeriodicPointRecord&>(r);
            mut.certificate = cert;
            return visit(r);
        },
        budget, false);
}

inline std::vector<PeriodicPointRecord> efix(const SystemSpec& sys, std::size_t n,
                                             double alpha, unsigned long long ell,
                                             const std::vector<Potential>& potentials,
                                             unsigned long long budget = kDefaultBudget) {
    std::vector<PeriodicPointRecord> out;
    visit_efix(
        sys, n, alpha, ell, potentials,
        [&](const PeriodicPointRecord& r) {
            out.push_back(r);
            return true;
        },
        budget);
    return out;
}

}  // namespace orbits
}  // namespace perorbit

#endif  // PERORBIT_ORBITS_HPP
