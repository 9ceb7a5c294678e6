#ifndef PERORBIT_MEASURES_HPP
#define PERORBIT_MEASURES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perorbit/errors.hpp"
#include "perorbit/logsum.hpp"
#include "perorbit/oracle.hpp"
#include "perorbit/orbits.hpp"
#include "perorbit/systems.hpp"

namespace perorbit {
namespace measures {

using systems::Potential;
using systems::PotentialKind;
using systems::SystemSpec;

// ---------------------------------------------------------------------------
// Atomic measures on periodic orbits
// ---------------------------------------------------------------------------

enum class ProvenanceKind { SigmaN, OmegaX, MuN, Reference };

struct Provenance {
    ProvenanceKind kind = ProvenanceKind::Reference;
    std::string detail;
};

struct Atom {
    Word word;  // periodic itinerary; may be empty for raw point atoms
    double x = std::numeric_limits<double>::quiet_NaN();  // NaN on subshifts
    double weight = 0.0;
};

namespace detail {

inline double eval_atom(const SystemSpec& sys, const Potential& psi, const Atom& atom) {
    switch (psi.kind()) {
        case PotentialKind::Constant:
            return psi.constant_value();
        case PotentialKind::CylinderLocallyConstant:
            // the cyclic extension of a periodic itinerary is exact; falling
            // back to the point's computed itinerary risks boundary flips
            if (!atom.word.empty()) return psi.table_entry(atom.word);
            return systems::evaluate_potential(psi, sys, atom.x);
        case PotentialKind::GeometricFamily:
            if (!sys.is_map()) return systems::evaluate_potential(psi, sys, atom.word);
            return systems::evaluate_potential(psi, sys, atom.x);
        case PotentialKind::Analytic:
            if (!sys.is_map()) throw NotAMap("analytic test functions need coordinates");
            return psi.analytic_value(atom.x);
    }
    throw InvalidSpec("unreachable potential kind");
}

}  // namespace detail

struct WeightedOrbitMeasure {
    std::vector<Atom> atoms;
    Provenance provenance;
    double log_normalizer = 0.0;  // log of the partition sum for SigmaN

    double total_weight() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight;
        return s;
    }

    double integral(const SystemSpec& sys, const Potential& psi) const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight * detail::eval_atom(sys, psi, a);
        return s;
    }
};

inline double integrate(const SystemSpec& sys, const WeightedOrbitMeasure& mu,
                        const Potential& psi) {
    return mu.integral(sys, psi);
}

// ---------------------------------------------------------------------------
// sigma_n: normalized exp(S_n phi)-weighted sums over certified periodic points
// ---------------------------------------------------------------------------

inline WeightedOrbitMeasure sigma_n(const SystemSpec& sys, const Potential& phi, std::size_t n,
                                    double alpha, unsigned long long ell,
                                    unsigned long long budget = orbits::kDefaultBudget) {
    if (n == 0) throw InvalidSpec("sigma_n needs n >= 1");
    WeightedOrbitMeasure mu;
    mu.provenance = {ProvenanceKind::SigmaN,
                     "sigma_n(n=" + std::to_string(n) + ",alpha=" + fmt17(alpha) +
                         ",ell=" + std::to_string(ell) + ",phi=" + phi.id() + ")"};
    std::vector<Potential> pots{phi};
    std::vector<double> sums;
    LogSumAcc za;
    orbits::visit_efix(
        sys, n, alpha, ell, pots,
        [&](const orbits::PeriodicPointRecord& rec) {
            double s = rec.birkhoff[0];
            if (std::isnan(s))
                throw DerivativeUnavailable(
                    "potential undefined on a certified orbit through a kink");
            Atom a;
            a.word = rec.word;
            if (rec.x) a.x = *rec.x;
            mu.atoms.push_back(std::move(a));
            sums.push_back(s);
            za.add(s);
            return true;
        },
        budget);
    if (mu.atoms.empty())
        throw EmptySetError("EFix(f^" + std::to_string(n) + ", alpha=" + fmt17(alpha) +
                            ", ell=" + std::to_string(ell) + ") is empty");
    mu.log_normalizer = za.value();
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
        mu.atoms[i].weight = std::exp(sums[i] - mu.log_normalizer);
    return mu;
}

// ---------------------------------------------------------------------------
// omega_x: uniform measure on the orbit of the periodic point coded by `word`
// ---------------------------------------------------------------------------

inline WeightedOrbitMeasure omega_x(const SystemSpec& sys, const Word& word) {
    if (word.empty()) throw InvalidSpec("omega_x needs a nonempty word");
    const std::size_t n = word.size();
    WeightedOrbitMeasure mu;
    mu.provenance = {ProvenanceKind::OmegaX, "omega_x(word=" + word_to_string(word) + ")"};

    std::map<Word, Atom> merged;  // rotations of a non-primitive word coincide
    if (sys.is_map()) {
        double x = orbits::locate_periodic(sys, word);
        double z = x;
        for (std::size_t i = 0; i < n; ++i) {
            Word rw = rotate_word(word, i);
            auto [it, fresh] = merged.try_emplace(rw);
            if (fresh) {
                it->second.word = rw;
                it->second.x = z;
            }
            it->second.weight += 1.0 / double(n);
            z = sys.apply(z).image;
        }
    } else {
        if (!sys.transition().cyclically_admissible(word))
            throw InvalidSpec("word is not cyclically admissible");
        for (std::size_t i = 0; i < n; ++i) {
            Word rw = rotate_word(word, i);
            auto [it, fresh] = merged.try_emplace(rw);
            if (fresh) it->second.word = rw;
            it->second.weight += 1.0 / double(n);
        }
    }
    for (auto& [w, a] : merged) mu.atoms.push_back(a);
    return mu;
}

// ---------------------------------------------------------------------------
// mu_n: time average (1/n) sum of pushforwards, with atom coalescing
// ---------------------------------------------------------------------------

inline WeightedOrbitMeasure mu_n_time_average(const SystemSpec& sys,
                                              const WeightedOrbitMeasure& nu, std::size_t n) {
    if (n == 0) throw InvalidSpec("mu_n needs n >= 1");
    WeightedOrbitMeasure mu;
    mu.provenance = {ProvenanceKind::MuN,
                     "mu_n(n=" + std::to_string(n) + ",base=" + nu.provenance.detail + ")"};

    std::map<Word, Atom> by_word;       // exact coalescing for itinerary-carrying atoms
    std::vector<Atom> loose;            // point atoms without words
    for (const auto& a : nu.atoms) {
        double z = a.x;
        for (std::size_t i = 0; i < n; ++i) {
            Atom pushed;
            pushed.weight = a.weight / double(n);
            if (!a.word.empty()) {
                pushed.word = rotate_word(a.word, i % a.word.size());
                pushed.x = z;
                auto [it, fresh] = by_word.try_emplace(pushed.word);
                if (fresh) {
                    it->second.word = pushed.word;
                    it->second.x = pushed.x;
                }
                it->second.weight += pushed.weight;
            } else {
                pushed.x = z;
                loose.push_back(pushed);
            }
            if (sys.is_map()) z = sys.apply(z).image;
        }
    }
    for (auto& [w, a] : by_word) mu.atoms.push_back(a);
    if (!loose.empty()) {
        std::sort(loose.begin(), loose.end(),
                  [](const Atom& a, const Atom& b) { return a.x < b.x; });
        for (const auto& a : loose) {
            if (!mu.atoms.empty() && mu.atoms.back().word.empty() &&
                std::fabs(mu.atoms.back().x - a.x) <= 1e-12) {
                mu.atoms.back().weight += a.weight;
            } else {
                mu.atoms.push_back(a);
            }
        }
    }
    return mu;
}

// ---------------------------------------------------------------------------
// Reference measures with exact integrals (no sampling)
// ---------------------------------------------------------------------------

class ReferenceMeasure {
public:
    enum class Kind { Lebesgue, Gibbs };

    static ReferenceMeasure lebesgue() {
        ReferenceMeasure r;
        r.kind_ = Kind::Lebesgue;
        r.name_ = "lebesgue";
        return r;
    }

    // Equilibrium (Gibbs/Markov) state of phi via the transfer-matrix oracle.
    static ReferenceMeasure gibbs(const SystemSpec& sys, const Potential& phi) {
        ReferenceMeasure r;
        r.kind_ = Kind::Gibbs;
        r.gm_ = oracle::oracle_gibbs(sys, phi);
        r.name_ = "gibbs(" + phi.id() + " on " + sys.name() + ")";
        return r;
    }

    // Product (Bernoulli) measure on the full 2-shift coding.
    static ReferenceMeasure bernoulli(double p) {
        if (!(p > 0.0) || !(p < 1.0)) throw InvalidSpec("bernoulli needs p in (0,1)");
        ReferenceMeasure r;
        r.kind_ = Kind::Gibbs;
        Transition full(2, true);
        // depth-1 weights (log p, log 1-p): pressure 0, Gibbs = the product measure
        Potential phi = Potential::cylinder_on_admissible(full, 1,
                                                          {std::log(p), std::log(1.0 - p)});
        r.gm_ = oracle::sft_gibbs(oracle::model_from_cylinder(full, phi));
        r.name_ = "bernoulli(p=" + fmt17(p) + ")";
        return r;
    }

    const std::string& name() const { return name_; }
    Kind kind() const { return kind_; }

    // Exact mass of the itinerary cylinder [w].
    double cylinder_mass(const SystemSpec& sys, const Word& w) const {
        if (kind_ == Kind::Gibbs) return gm_->cylinder_mass(w);
        // Lebesgue: the cylinder is an interval; pull [0,1] back through the
        // branch inverses and measure its length
        if (!sys.is_map()) throw InvalidSpec("lebesgue reference lives on map systems");
        double lo = 0.0, hi = 1.0;
        for (std::size_t i = w.size(); i-- > 0;) {
            const auto& br = sys.branches()[w[i]];
            auto ends = sys.abs_image_range(w[i]);
            double ilo = std::max(lo, ends.first), ihi = std::min(hi, ends.second);
            if (!(ihi > ilo)) return 0.0;
            double a = sys.inverse_in_branch(w[i], ilo);
            double b = sys.inverse_in_branch(w[i], ihi);
            lo = std::min(a, b);
            hi = std::max(a, b);
            lo = std::max(lo, br.lo);
            hi = std::min(hi, br.hi);
        }
        return std::max(0.0, hi - lo);
    }

    double integral(const SystemSpec& sys, const Potential& psi) const {
        switch (psi.kind()) {
            case PotentialKind::Constant:
                return psi.constant_value();
            case PotentialKind::CylinderLocallyConstant: {
                auto words = admissible_words(sys.transition(), psi.depth());
                double acc = 0.0;
                for (const Word& w : words) acc += psi.table_entry(w) * cylinder_mass(sys, w);
                return acc;
            }
            case PotentialKind::GeometricFamily: {
                auto cyl = systems::as_cylinder(sys, psi);
                if (!cyl)
                    throw OracleUnavailable(
                        "no exact integral for this geometric potential");
                return integral(sys, *cyl);
            }
            case PotentialKind::Analytic: {
                // exact means of the built-in bases where closed forms exist
                double base_mean;
                if (kind_ == Kind::Lebesgue) {
                    if (psi.formula() == "x")
                        base_mean = 0.5;
                    else  // cos2pi / sin2pi integrate to zero over a period
                        base_mean = 0.0;
                } else if (psi.formula() == "x" && sys.is_map() &&
                           sys.family() == systems::MapFamily::Doubling) {
                    // binary expansion: E[x] = sum 2^{-(i+1)} P(symbol_i = 1)
                    base_mean = gm_->symbol_marginal(1);
                } else {
                    throw OracleUnavailable("no exact mean of " + psi.id() + " under " +
                                            name_);
                }
                return psi.analytic_a() * base_mean + psi.analytic_b();
            }
        }
        throw InvalidSpec("unreachable potential kind");
    }

private:
    Kind kind_ = Kind::Lebesgue;
    std::string name_;
    std::optional<oracle::GibbsMeasure> gm_;
};

// ---------------------------------------------------------------------------
// Test-function families and the truncated weak* metric
// ---------------------------------------------------------------------------

struct TestFunction {
    Potential psi;
    double sup_norm = 1.0;
    std::string label;
};

struct TestFunctionFamily {
    std::vector<TestFunction> fns;

    // Truncating the countable series at M terms costs at most sum_{i>M} 2/2^i.
    double truncation_bound() const { return std::ldexp(2.0, -static_cast<int>(fns.size())); }

    // Default family: the identity coordinate (maps), then cylinder indicators
    // of depth 1..max_depth in shortlex order. All sup-norms are 1.
    static TestFunctionFamily standard(const SystemSpec& sys, std::size_t max_depth = 4,
                                       std::optional<bool> include_identity = std::nullopt) {
        TestFunctionFamily fam;
        bool with_id = include_identity.value_or(sys.is_map());
        if (with_id) {
            if (!sys.is_map())
                throw InvalidSpec("identity test function needs a map system");
            fam.fns.push_back({Potential::analytic("x"), 1.0, "x"});
        }
        for (std::size_t d = 1; d <= max_depth; ++d) {
            auto words = admissible_words(sys.transition(), d);
            for (std::size_t i = 0; i < words.size(); ++i) {
                std::vector<double> table(words.size(), 0.0);
                table[i] = 1.0;
                fam.fns.push_back({Potential::cylinder_on_admissible(sys.transition(), d, table),
                                   1.0, "1[" + word_to_string(words[i]) + "]"});
            }
        }
        return fam;
    }
};

// d(mu, nu) = sum_i |int psi_i dmu - int psi_i dnu| / (2^i ||psi_i||); works
// for any pair of measure types exposing integral(sys, psi).
template <class M1, class M2>
double weak_star_distance(const SystemSpec& sys, const M1& mu, const M2& nu,
                          const TestFunctionFamily& family) {
    double d = 0.0, pw = 1.0;
    for (const auto& fn : family.fns) {
        pw *= 0.5;
        d += pw * std::fabs(mu.integral(sys, fn.psi) - nu.integral(sys, fn.psi)) / fn.sup_norm;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Bowen-property convergence report
// ---------------------------------------------------------------------------

struct BowenRow {
    std::size_t n = 0;
    unsigned long long ell = 0;
    bool empty = false;  // EFix was empty: recorded as a gap
    double log_normalizer = 0.0;
    double distance = 0.0;
    std::vector<double> integrals;  // per test function, for the emitted table
};

struct BowenReport {
    std::vector<BowenRow> rows;
    std::vector<std::string> family_labels;
    std::vector<double> reference_integrals;
    double truncation_bound = 0.0;
    bool diagonal_decreasing = true;  // strictly decreasing over non-empty rows
};

// Diagonal schedule: row i pairs n_schedule[i] with ell_schedule[i] (a shorter
// list is extended by repeating its last entry).
inline BowenReport bowen_convergence_report(const SystemSpec& sys, const Potential& phi,
                                            double alpha,
                                            std::vector<unsigned long long> ell_schedule,
                                            std::vector<std::size_t> n_schedule,
                                            const ReferenceMeasure& reference,
                                            const TestFunctionFamily& family,
                                            unsigned long long budget = orbits::kDefaultBudget) {
    if (n_schedule.empty() || ell_schedule.empty())
        throw InvalidSpec("bowen report needs nonempty schedules");
    std::size_t len = std::max(n_schedule.size(), ell_schedule.size());
    while (n_schedule.size() < len) n_schedule.push_back(n_schedule.back());
    while (ell_schedule.size() < len) ell_schedule.push_back(ell_schedule.back());

    BowenReport rep;
    rep.truncation_bound = family.truncation_bound();
    for (const auto& fn : family.fns) {
        rep.family_labels.push_back(fn.label);
        rep.reference_integrals.push_back(reference.integral(sys, fn.psi));
    }

    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < len; ++i) {
        BowenRow row;
        row.n = n_schedule[i];
        row.ell = ell_schedule[i];
        try {
            auto mu = sigma_n(sys, phi, row.n, alpha, row.ell, budget);
            row.log_normalizer = mu.log_normalizer;
            for (const auto& fn : family.fns)
                row.integrals.push_back(mu.integral(sys, fn.psi));
            row.distance = 0.0;
            double pw = 1.0;
            for (std::size_t j = 0; j < family.fns.size(); ++j) {
                pw *= 0.5;
                row.distance += pw *
                                std::fabs(row.integrals[j] - rep.reference_integrals[j]) /
                                family.fns[j].sup_norm;
            }
            if (row.distance >= prev) rep.diagonal_decreasing = false;
            prev = row.distance;
        } catch (const EmptySetError&) {
            row.empty = true;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The expanding-measure diagnostic
// ---------------------------------------------------------------------------

struct ExpandingTestResult {
    std::vector<bool> per_atom;
    std::vector<double> exponents;  // (1/(q p)) sum of log |(f^q)'| over the orbit
    bool all_pass = true;
};

// For each atom's periodic orbit, checks whether the orbit mean of
// (1/q) log |(f^q)'| reaches beta.
inline ExpandingTestResult f_expanding_test(const SystemSpec& sys,
                                            const WeightedOrbitMeasure& mu, std::size_t q,
                                            double beta) {
    if (q == 0) throw InvalidSpec("f_expanding_test needs q >= 1");
    ExpandingTestResult res;
    for (const auto& a : mu.atoms) {
        std::size_t p = a.word.size();
        std::vector<double> logd(p);
        if (sys.is_map()) {
            if (p == 0) throw InvalidSpec("atom carries no period information");
            double z = a.x;
            for (std::size_t i = 0; i < p; ++i) {
                auto mi = sys.apply(z);
                logd[i] = std::log(std::fabs(mi.derivative));
                z = mi.image;
            }
        } else {
            if (!sys.geom_weights())
                throw NotAMap("expansion test needs derivatives: subshift has no weights");
            for (std::size_t i = 0; i < p; ++i) logd[i] = (*sys.geom_weights())[a.word[i]];
        }
        double total = 0.0;
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < q; ++k) total += logd[(j + k) % p];
        double expo = total / double(q * p);
        res.exponents.push_back(expo);
        bool pass = expo >= beta;
        res.per_atom.push_back(pass);
        if (!pass) res.all_pass = false;
    }
    return res;
}

}  // namespace measures
}  // namespace perorbit

#endif  // PERORBIT_MEASURES_HPP
