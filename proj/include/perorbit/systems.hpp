#ifndef PERORBIT_SYSTEMS_HPP
#define PERORBIT_SYSTEMS_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perorbit/errors.hpp"
#include "perorbit/words.hpp"

namespace perorbit {

// %.17g rendering used for ids and all numeric text output.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

namespace systems {

enum class SystemKind { IntervalMarkovMap, SubshiftFiniteType };
enum class MapFamily { None, Doubling, Tent, ManPo };

// One strictly monotone branch f|[lo,hi) : x -> g(x) - wrap.
struct BranchSpec {
    double lo;
    double hi;
    int wrap;         // integer part removed by the mod-1 reduction
    bool increasing;  // orientation of the branch
};

struct MapImage {
    double image;
    double derivative;  // signed f'(x) from the branch containing x
};

class SystemSpec {
public:
    // --- factories -------------------------------------------------------
    static SystemSpec doubling() {
        SystemSpec s;
        s.kind_ = SystemKind::IntervalMarkovMap;
        s.family_ = MapFamily::Doubling;
        s.circle_ = true;
        s.modulus_ = 1.0;
        s.branches_ = {{0.0, 0.5, 0, true}, {0.5, 1.0, 1, true}};
        s.transition_ = Transition(2, true);
        s.name_ = "doubling";
        return s;
    }

    // tent_s(x) = s * min(x, 1-x) on [0,1]; full Markov structure at s = 2.
    static SystemSpec tent(double slope) {
        if (!(slope > 1.0) || !(slope <= 2.0))
            throw InvalidSpec("tent slope must lie in (1, 2]");
        SystemSpec s;
        s.kind_ = SystemKind::IntervalMarkovMap;
        s.family_ = MapFamily::Tent;
        s.circle_ = false;
        s.param_ = slope;
        s.modulus_ = 1.0;
        s.branches_ = {{0.0, 0.5, 0, true}, {0.5, 1.0, 0, false}};
        s.transition_ = Transition(2, true);
        s.name_ = "tent_" + fmt17(slope);
        return s;
    }

    // ManPo_s(x) = x + x^{1+s} mod 1; neutral fixed point at 0.
    static SystemSpec manpo(double s_exp) {
        if (!(s_exp > 0.0) || !(s_exp < 1.0))
            throw InvalidSpec("manpo exponent must lie in (0, 1)");
        SystemSpec s;
        s.kind_ = SystemKind::IntervalMarkovMap;
        s.family_ = MapFamily::ManPo;
        s.circle_ = true;
        s.param_ = s_exp;
        s.modulus_ = s_exp;
        double c = branch_point(s_exp);
        s.branches_ = {{0.0, c, 0, true}, {c, 1.0, 1, true}};
        s.transition_ = Transition(2, true);
        s.name_ = "manpo_" + fmt17(s_exp);
        return s;
    }

    // Subshift of finite type; optional per-symbol log-expansion weights let
    // symbolic systems flow through the same expansion-certificate machinery.
    static SystemSpec sft(const Transition& t,
                          std::optional<std::vector<double>> geom_weights = std::nullopt,
                          std::string name = "sft") {
        std::size_t k = t.alphabet_size();
        if (k == 0) throw InvalidSpec("sft needs a nonempty alphabet");
        for (std::size_t i = 0; i < k; ++i) {
            bool row = false, col = false;
            for (std::size_t j = 0; j < k; ++j) {
                row = row || t.allowed(i, j);
                col = col || t.allowed(j, i);
            }
            if (!row || !col) throw InvalidSpec("transition has a stranded symbol");
        }
        if (geom_weights && geom_weights->size() != k)
            throw InvalidSpec("geometric weight vector size mismatch");
        SystemSpec s;
        s.kind_ = SystemKind::SubshiftFiniteType;
        s.family_ = MapFamily::None;
        s.modulus_ = 1.0;
        s.transition_ = t;
        s.geom_weights_ = std::move(geom_weights);
        s.name_ = std::move(name);
        return s;
    }

    static SystemSpec golden_mean_sft(std::optional<std::vector<double>> geom_weights = std::nullopt) {
        Transition t(2, true);
        t.set(1, 1, false);  // forbid the 11 block
        return sft(t, std::move(geom_weights), "sft_golden");
    }

    // --- structure -------------------------------------------------------
    SystemKind kind() const { return kind_; }
    MapFamily family() const { return family_; }
    bool is_map() const { return kind_ == SystemKind::IntervalMarkovMap; }
    bool is_circle() const { return circle_; }
    double parameter() const { return param_; }
    double modulus() const { return modulus_; }
    const std::string& name() const { return name_; }
    const Transition& transition() const { return transition_; }
    const std::vector<BranchSpec>& branches() const { return branches_; }
    std::size_t alphabet_size() const {
        return is_map() ? branches_.size() : transition_.alphabet_size();
    }
    const std::optional<std::vector<double>>& geom_weights() const { return geom_weights_; }

    // --- map dynamics ----------------------------------------------------
    // Left-closed branch membership; x = 1 belongs to the last branch on
    // interval (non-circle) maps, where it arises as an image (tent_2(1/2)=1).
    std::size_t branch_of(double x) const {
        require_map();
        if (!(x >= 0.0) || x > 1.0 || (circle_ && x >= 1.0))
            throw OutOfDomain("point outside phase space: " + fmt17(x));
        if (!circle_ && x == 1.0) return branches_.size() - 1;
        for (std::size_t b = branches_.size(); b-- > 0;)
            if (x >= branches_[b].lo) return b;
        throw OutOfDomain("point not covered by any branch: " + fmt17(x));
    }

    MapImage apply(double x) const {
        std::size_t b = branch_of(x);
        MapImage out = branch_value(b, x);
        if (circle_ && out.image >= 1.0) out.image -= 1.0;  // guard roundoff at wrap
        if (out.image < 0.0) out.image = 0.0;
        return out;
    }

    // Branch formula without domain checks (used for one-sided limits).
    MapImage branch_value(std::size_t b, double x) const {
        require_map();
        const BranchSpec& br = branches_[b];
        switch (family_) {
            case MapFamily::Doubling:
                return {2.0 * x - br.wrap, 2.0};
            case MapFamily::Tent:
                return br.increasing ? MapImage{param_ * x, param_}
                                     : MapImage{param_ * (1.0 - x), -param_};
            case MapFamily::ManPo: {
                double p = std::pow(x, param_);
                return {x + x * p - br.wrap, 1.0 + (1.0 + param_) * p};
            }
            default:
                throw NotAMap("no branch formulas on a subshift");
        }
    }

    // Inverse of branch b at image y (y + wrap in the branch's lifted range).
    double inverse_in_branch(std::size_t b, double y) const {
        require_map();
        const BranchSpec& br = branches_[b];
        switch (family_) {
            case MapFamily::Doubling:
                return (y + br.wrap) / 2.0;
            case MapFamily::Tent:
                return br.increasing ? y / param_ : 1.0 - y / param_;
            case MapFamily::ManPo: {
                // solve x + x^{1+s} = y + wrap; g is increasing and convex,
                // so Newton from the right endpoint descends monotonically.
                double target = y + br.wrap;
                double x = br.hi;
                for (int it = 0; it < 80; ++it) {
                    double p = std::pow(x, param_);
                    double g = x + x * p - target;
                    double dg = 1.0 + (1.0 + param_) * p;
                    double step = g / dg;
                    x -= step;
                    if (x < 0.0) x = 0.0;
                    if (std::fabs(step) <= 1e-17) break;
                }
                return x;
            }
            default:
                throw NotAMap("no inverse branches on a subshift");
        }
    }

    // Points where the one-sided derivatives disagree (kinks / circle seam).
    const std::vector<double>& nondifferentiable_points() const {
        if (!nondiff_ready_) {
            nondiff_.clear();
            if (is_map()) {
                for (std::size_t b = 1; b < branches_.size(); ++b) {
                    double x = branches_[b].lo;
                    double dl = branch_value(b - 1, x).derivative;
                    double dr = branch_value(b, x).derivative;
                    if (!close(dl, dr)) nondiff_.push_back(x);
                }
                if (circle_) {
                    double dl = branch_value(branches_.size() - 1, 1.0).derivative;
                    double dr = branch_value(0, 0.0).derivative;
                    if (!close(dl, dr)) nondiff_.push_back(0.0);
                }
            }
            nondiff_ready_ = true;
        }
        return nondiff_;
    }

    // |f'| range over one branch domain (closure values at the endpoints);
    // exact because every family's derivative is monotone on a branch.
    std::pair<double, double> abs_derivative_range(std::size_t b) const {
        require_map();
        double dl = std::fabs(branch_value(b, branches_[b].lo).derivative);
        double dr = std::fabs(branch_value(b, branches_[b].hi).derivative);
        return {std::min(dl, dr), std::max(dl, dr)};
    }

    // Closure of the branch image as a sorted interval in [0,1]; exact because
    // every family is continuous and monotone on a branch.
    std::pair<double, double> abs_image_range(std::size_t b) const {
        require_map();
        double il = branch_value(b, branches_[b].lo).image;
        double ir = branch_value(b, branches_[b].hi).image;
        double lo = std::min(il, ir), hi = std::max(il, ir);
        return {std::max(0.0, lo), std::min(1.0, hi)};
    }

private:
    static bool close(double a, double b) {
        return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
    }
    void require_map() const {
        if (!is_map()) throw NotAMap("operation requires an interval/circle map");
    }
    // root of c + c^{1+s} = 1 in (0,1)
    static double branch_point(double s) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (mid + std::pow(mid, 1.0 + s) < 1.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    SystemKind kind_ = SystemKind::IntervalMarkovMap;
    MapFamily family_ = MapFamily::None;
    bool circle_ = false;
    double param_ = 0.0;
    double modulus_ = 1.0;
    std::vector<BranchSpec> branches_;
    Transition transition_;
    std::optional<std::vector<double>> geom_weights_;
    std::string name_;
    mutable std::vector<double> nondiff_;
    mutable bool nondiff_ready_ = false;
};

// image = f(x), derivative = f'(x) taken from the (left-closed) branch of x.
inline MapImage evaluate_map(const SystemSpec& sys, double x) { return sys.apply(x); }

// Symbolic itinerary: symbol k is the branch containing f^k(x).
inline Word itinerary(const SystemSpec& sys, double x, std::size_t n) {
    if (n == 0) throw InvalidSpec("itinerary needs n >= 1");
    Word w;
    w.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t b = sys.branch_of(x);
        w.push_back(static_cast<uint8_t>(b));
        if (k + 1 < n) x = sys.apply(x).image;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

enum class PotentialKind { Constant, CylinderLocallyConstant, GeometricFamily, Analytic };

class Potential {
public:
    static Potential constant(double c) {
        Potential p;
        p.kind_ = PotentialKind::Constant;
        p.c_ = c;
        p.id_ = "const(" + fmt17(c) + ")";
        return p;
    }

    // Dense table over all k^m words; entries for inadmissible words are NaN.
    static Potential cylinder(std::size_t alphabet, std::size_t depth,
                              std::vector<double> dense_table) {
        if (depth == 0) throw InvalidSpec("cylinder depth must be >= 1");
        std::size_t want = ipow(alphabet, depth);
        if (dense_table.size() != want)
            throw InvalidSpec("cylinder table size must be alphabet^depth");
        Potential p;
        p.kind_ = PotentialKind::CylinderLocallyConstant;
        p.alphabet_ = alphabet;
        p.depth_ = depth;
        p.table_ = std::move(dense_table);
        p.id_ = "cyl(m=" + std::to_string(depth) + ",h=" + table_hash(p.table_) + ")";
        return p;
    }

    // Table given only on admissible words (lexicographic order).
    static Potential cylinder_on_admissible(const Transition& t, std::size_t depth,
                                            const std::vector<double>& values) {
        auto words = admissible_words(t, depth);
        if (words.size() != values.size())
            throw InvalidSpec("cylinder value count must match admissible word count");
        std::size_t k = t.alphabet_size();
        std::vector<double> dense(ipow(k, depth), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < words.size(); ++i)
            dense[word_code(words[i], k)] = values[i];
        return cylinder(k, depth, std::move(dense));
    }

    static Potential geometric(double t) {
        Potential p;
        p.kind_ = PotentialKind::GeometricFamily;
        p.t_ = t;
        p.id_ = "geom(" + fmt17(t) + ")";
        return p;
    }

    // phi(x) = a * base(x) + b with base one of: x, cos2pi, sin2pi.
    static Potential analytic(const std::string& formula, double a = 1.0, double b = 0.0) {
        if (formula != "x" && formula != "cos2pi" && formula != "sin2pi")
            throw InvalidSpec("unknown analytic formula: " + formula);
        Potential p;
        p.kind_ = PotentialKind::Analytic;
        p.formula_ = formula;
        p.a_ = a;
        p.b_ = b;
        p.id_ = "ana(" + formula + "," + fmt17(a) + "," + fmt17(b) + ")";
        return p;
    }

    PotentialKind kind() const { return kind_; }
    double constant_value() const { return c_; }
    double geometric_t() const { return t_; }
    std::size_t depth() const { return depth_; }
    std::size_t alphabet() const { return alphabet_; }
    const std::vector<double>& table() const { return table_; }
    const std::string& id() const { return id_; }
    const std::string& formula() const { return formula_; }
    double analytic_a() const { return a_; }
    double analytic_b() const { return b_; }

    double analytic_value(double x) const {
        if (formula_ == "x") return a_ * x + b_;
        if (formula_ == "cos2pi") return a_ * std::cos(2.0 * M_PI * x) + b_;
        return a_ * std::sin(2.0 * M_PI * x) + b_;
    }

    double table_entry(const Word& w, std::size_t offset = 0) const {
        std::size_t code = 0;
        for (std::size_t i = 0; i < depth_; ++i) {
            std::size_t sym = w[(offset + i) % w.size()];
            if (sym >= alphabet_) throw InvalidSpec("word symbol outside potential alphabet");
            code = code * alphabet_ + sym;
        }
        double v = table_[code];
        if (std::isnan(v)) throw InvalidSpec("cylinder potential queried on an inadmissible word");
        return v;
    }

    static std::size_t word_code(const Word& w, std::size_t k) {
        std::size_t code = 0;
        for (uint8_t c : w) code = code * k + c;
        return code;
    }

private:
    static std::size_t ipow(std::size_t b, std::size_t e) {
        std::size_t r = 1;
        for (std::size_t i = 0; i < e; ++i) {
            if (r > (std::size_t(1) << 24)) throw InvalidSpec("cylinder table too large");
            r *= b;
        }
        return r;
    }
    static std::string table_hash(const std::vector<double>& t) {
        uint64_t h = 1469598103934665603ull;  // FNV-1a over the table bytes
        for (double d : t) {
            uint64_t bits;
            static_assert(sizeof(bits) == sizeof(d));
            __builtin_memcpy(&bits, &d, sizeof(d));
            for (int i = 0; i < 8; ++i) {
                h ^= (bits >> (8 * i)) & 0xff;
                h *= 1099511628211ull;
            }
        }
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return std::string(buf);
    }

    PotentialKind kind_ = PotentialKind::Constant;
    double c_ = 0.0;
    double t_ = 0.0;
    std::size_t depth_ = 0;
    std::size_t alphabet_ = 0;
    std::vector<double> table_;
    std::string formula_;
    double a_ = 1.0, b_ = 0.0;
    std::string id_ = "const(0)";
};

// Evaluate at a point of a map system.
inline double evaluate_potential(const Potential& phi, const SystemSpec& sys, double x) {
    switch (phi.kind()) {
        case PotentialKind::Constant:
            return phi.constant_value();
        case PotentialKind::CylinderLocallyConstant: {
            if (!sys.is_map()) throw NotAMap("point evaluation requires a map system");
            Word w = itinerary(sys, x, phi.depth());
            return phi.table_entry(w);
        }
        case PotentialKind::GeometricFamily: {
            if (!sys.is_map()) throw NotAMap("point evaluation requires a map system");
            for (double bad : sys.nondifferentiable_points())
                if (x == bad)
                    throw DerivativeUnavailable("derivative undefined at x = " + fmt17(x));
            double d = sys.apply(x).derivative;
            return -phi.geometric_t() * std::log(std::fabs(d));
        }
        case PotentialKind::Analytic:
            if (!sys.is_map()) throw NotAMap("analytic potentials need coordinates");
            return phi.analytic_value(x);
    }
    throw InvalidSpec("unreachable potential kind");
}

// Evaluate at a symbolic sequence that starts with (a cyclic repetition of) w.
inline double evaluate_potential(const Potential& phi, const SystemSpec& sys, const Word& w,
                                 std::size_t offset = 0) {
    switch (phi.kind()) {
        case PotentialKind::Constant:
            return phi.constant_value();
        case PotentialKind::CylinderLocallyConstant:
            return phi.table_entry(w, offset);
        case PotentialKind::GeometricFamily: {
            if (sys.is_map())
                throw InvalidSpec("geometric potentials on maps evaluate at points, not words");
            if (!sys.geom_weights())
                throw DerivativeUnavailable("subshift carries no expansion weights");
            return -phi.geometric_t() * (*sys.geom_weights())[w[offset % w.size()]];
        }
        case PotentialKind::Analytic:
            throw NotAMap("analytic potentials need coordinates");
    }
    throw InvalidSpec("unreachable potential kind");
}

// Exact (or grid-refined, for analytic formulas) range of phi over the space.
struct PotentialRange {
    double min;
    double max;
    bool exact;
};

inline PotentialRange potential_range(const SystemSpec& sys, const Potential& phi) {
    switch (phi.kind()) {
        case PotentialKind::Constant:
            return {phi.constant_value(), phi.constant_value(), true};
        case PotentialKind::CylinderLocallyConstant: {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            // restrict to words admissible under the system's transition
            auto words = admissible_words(sys.transition(), phi.depth());
            for (const Word& w : words) {
                double v = phi.table_entry(w);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (words.empty()) throw InvalidSpec("no admissible words for cylinder potential");
            return {lo, hi, true};
        }
        case PotentialKind::GeometricFamily: {
            double t = phi.geometric_t();
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            if (sys.is_map()) {
                for (std::size_t b = 0; b < sys.branches().size(); ++b) {
                    auto [dmin, dmax] = sys.abs_derivative_range(b);
                    for (double d : {dmin, dmax}) {
                        double v = -t * std::log(d);
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                }
            } else {
                if (!sys.geom_weights())
                    throw DerivativeUnavailable("subshift carries no expansion weights");
                for (double w : *sys.geom_weights()) {
                    lo = std::min(lo, -t * w);
                    hi = std::max(hi, -t * w);
                }
            }
            return {lo, hi, true};
        }
        case PotentialKind::Analytic: {
            if (!sys.is_map()) throw NotAMap("analytic potentials need coordinates");
            const std::size_t grid = std::size_t(1) << 16;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            double arg_lo = 0.0, arg_hi = 0.0;
            for (std::size_t j = 0; j < grid; ++j) {
                double x = double(j) / double(grid);
                double v = phi.analytic_value(x);
                if (v < lo) { lo = v; arg_lo = x; }
                if (v > hi) { hi = v; arg_hi = x; }
            }
            double h = 1.0 / double(grid);
            auto refine = [&](double center, int sign) {
                double a = std::max(0.0, center - h), b = std::min(1.0, center + h);
                // golden-section to tolerance 1e-9 on the bracketing cell pair
                const double gr = 0.6180339887498949;
                double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
                double f1 = sign * phi.analytic_value(x1), f2 = sign * phi.analytic_value(x2);
                while (b - a > 1e-9) {
                    if (f1 < f2) {
                        b = x2; x2 = x1; f2 = f1;
                        x1 = b - gr * (b - a);
                        f1 = sign * phi.analytic_value(x1);
                    } else {
                        a = x1; x1 = x2; f1 = f2;
                        x2 = a + gr * (b - a);
                        f2 = sign * phi.analytic_value(x2);
                    }
                }
                return sign * phi.analytic_value(0.5 * (a + b));
            };
            lo = std::min(lo, refine(arg_lo, +1));
            hi = std::max(hi, -refine(arg_hi, -1));
            return {lo, hi, false};
        }
    }
    throw InvalidSpec("unreachable potential kind");
}

// phi + psi as a single cylinder potential when both reduce to one
// (constants, cylinder tables, geometric on branchwise-constant |f'|).
inline std::optional<Potential> as_cylinder(const SystemSpec& sys, const Potential& phi) {
    std::size_t k = sys.alphabet_size();
    switch (phi.kind()) {
        case PotentialKind::Constant:
            return Potential::cylinder(k, 1, std::vector<double>(k, phi.constant_value()));
        case PotentialKind::CylinderLocallyConstant:
            return phi;
        case PotentialKind::GeometricFamily: {
            std::vector<double> vals(k);
            if (sys.is_map()) {
                for (std::size_t b = 0; b < k; ++b) {
                    auto [dmin, dmax] = sys.abs_derivative_range(b);
                    if (std::fabs(dmin - dmax) > 1e-12 * std::max(1.0, dmax))
                        return std::nullopt;  // |f'| varies inside a branch
                    vals[b] = -phi.geometric_t() * std::log(dmax);
                }
            } else {
                if (!sys.geom_weights()) return std::nullopt;
                for (std::size_t b = 0; b < k; ++b)
                    vals[b] = -phi.geometric_t() * (*sys.geom_weights())[b];
            }
            return Potential::cylinder(k, 1, std::move(vals));
        }
        case PotentialKind::Analytic:
            return std::nullopt;
    }
    return std::nullopt;
}

inline std::optional<Potential> potential_sum_as_cylinder(const SystemSpec& sys,
                                                          const Potential& a,
                                                          const Potential& b) {
    auto ca = as_cylinder(sys, a);
    auto cb = as_cylinder(sys, b);
    if (!ca || !cb) return std::nullopt;
    std::size_t m = std::max(ca->depth(), cb->depth());
    auto words = admissible_words(sys.transition(), m);
    std::vector<double> vals(words.size());
    for (std::size_t i = 0; i < words.size(); ++i)
        vals[i] = ca->table_entry(words[i]) + cb->table_entry(words[i]);
    return Potential::cylinder_on_admissible(sys.transition(), m, vals);
}

}  // namespace systems
}  // namespace perorbit

#endif  // PERORBIT_SYSTEMS_HPP
