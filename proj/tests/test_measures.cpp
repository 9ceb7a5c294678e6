#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "perorbit/measures.hpp"

using namespace perorbit;
using systems::Potential;
using systems::SystemSpec;

TEST_CASE("normalized orbit sums weight points by their Birkhoff exponentials") {
    auto dbl = SystemSpec::doubling();
    auto s5 = measures::sigma_n(dbl, Potential::constant(0.0), 5, 0.5, 1);
    REQUIRE(s5.atoms.size() == 31);
    REQUIRE(s5.total_weight() == Catch::Approx(1.0).margin(1e-12));
    // uniform weights for a constant potential
    for (const auto& a : s5.atoms)
        REQUIRE(a.weight == Catch::Approx(1.0 / 31.0).margin(1e-14));
    // mean of the identity over all period-5 points: sum k/31 / 31 = 15/31
    REQUIRE(s5.integral(dbl, Potential::analytic("x")) ==
            Catch::Approx(15.0 / 31.0).margin(1e-12));
    REQUIRE(s5.log_normalizer == Catch::Approx(std::log(31.0)).margin(1e-12));

    // weighting by the indicator of [0] tilts mass toward zero-heavy words
    Potential ind = Potential::cylinder_on_admissible(dbl.transition(), 1, {1.0, 0.0});
    auto t5 = measures::sigma_n(dbl, ind, 5, 0.5, 1);
    double hand = 0.0, norm = 0.0;
    for (const auto& a : t5.atoms) {
        double zeros = 0.0;
        for (auto c : a.word) zeros += (c == 0) ? 1 : 0;
        norm += std::exp(zeros);
        (void)hand;
    }
    REQUIRE(t5.log_normalizer == Catch::Approx(std::log(norm)).margin(1e-10));
    // empty families raise
    REQUIRE_THROWS_AS(measures::sigma_n(dbl, Potential::constant(0.0), 5, 1.0, 1),
                      EmptySetError);
}

TEST_CASE("periodic-orbit measures average the orbit uniformly") {
    auto dbl = SystemSpec::doubling();
    auto om = measures::omega_x(dbl, {0, 1, 0});
    REQUIRE(om.atoms.size() == 3);
    REQUIRE(om.total_weight() == Catch::Approx(1.0).margin(1e-15));
    Potential ind = Potential::cylinder_on_admissible(dbl.transition(), 1, {1.0, 0.0});
    // orbit {2/7, 4/7, 1/7}: two of three points sit in [0, 1/2)
    REQUIRE(om.integral(dbl, ind) == Catch::Approx(2.0 / 3.0).margin(1e-12));
    REQUIRE(om.integral(dbl, Potential::analytic("x")) ==
            Catch::Approx((2.0 / 7.0 + 4.0 / 7.0 + 1.0 / 7.0) / 3.0).margin(1e-12));

    // a non-primitive word coalesces onto its primitive orbit
    auto om2 = measures::omega_x(dbl, {0, 1, 0, 1});
    REQUIRE(om2.atoms.size() == 2);
    REQUIRE(om2.integral(dbl, ind) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("time averaging spreads each atom over its forward orbit") {
    auto dbl = SystemSpec::doubling();
    // a single periodic orbit is invariant under time averaging
    auto om = measures::omega_x(dbl, {0, 1});
    auto avg = measures::mu_n_time_average(dbl, om, 4);
    REQUIRE(avg.total_weight() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(avg.atoms.size() == 2);
    Potential ind = Potential::cylinder_on_admissible(dbl.transition(), 1, {1.0, 0.0});
    REQUIRE(avg.integral(dbl, ind) == Catch::Approx(om.integral(dbl, ind)).margin(1e-12));

    // averaging sigma_n keeps total mass and the invariance defect shrinks
    auto s6 = measures::sigma_n(dbl, Potential::constant(0.0), 6, 0.5, 1);
    auto a6 = measures::mu_n_time_average(dbl, s6, 6);
    REQUIRE(a6.total_weight() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("reference measure cylinder masses") {
    auto dbl = SystemSpec::doubling();
    auto leb = measures::ReferenceMeasure::lebesgue();
    REQUIRE(leb.cylinder_mass(dbl, {0}) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(leb.cylinder_mass(dbl, {0, 1}) == Catch::Approx(0.25).margin(1e-15));
    REQUIRE(leb.cylinder_mass(dbl, {1, 1, 0}) == Catch::Approx(0.125).margin(1e-15));

    // tent at slope 2: dyadic cylinders again
    auto tent = SystemSpec::tent(2.0);
    REQUIRE(leb.cylinder_mass(tent, {1}) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(leb.cylinder_mass(tent, {1, 0}) == Catch::Approx(0.25).margin(1e-12));

    // at slope s < 2 the attractor misses part of [0,1]: [11] words shrink
    auto t15 = SystemSpec::tent(1.5);
    double m11 = leb.cylinder_mass(t15, {1, 1});
    REQUIRE(m11 > 0.0);
    REQUIRE(m11 < 0.25);

    // masses of depth-d cylinders tile the interval
    for (std::size_t d = 1; d <= 6; ++d) {
        double tot = 0.0;
        for (const Word& w : admissible_words(dbl.transition(), d))
            tot += leb.cylinder_mass(dbl, w);
        REQUIRE(tot == Catch::Approx(1.0).margin(1e-12));
    }

    auto bern = measures::ReferenceMeasure::bernoulli(0.3);
    REQUIRE(bern.cylinder_mass(dbl, {0, 1}) == Catch::Approx(0.3 * 0.7).margin(1e-12));
    double h = -(0.3 * std::log(0.3) + 0.7 * std::log(0.7));
    (void)h;

    // exact first moments
    REQUIRE(leb.integral(dbl, Potential::analytic("x")) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(leb.integral(dbl, Potential::analytic("cos2pi")) ==
            Catch::Approx(0.0).margin(1e-15));
    // E[x] under a product measure via binary digits: sum 2^-(i+1) P(digit=1)
    REQUIRE(bern.integral(dbl, Potential::analytic("x")) ==
            Catch::Approx(0.7).margin(1e-12));
}

TEST_CASE("weak-star distance is a metric-like gauge on test families") {
    auto dbl = SystemSpec::doubling();
    auto fam = measures::TestFunctionFamily::standard(dbl);
    REQUIRE(fam.fns.size() == 31);  // identity + 2 + 4 + 8 + 16 indicators
    REQUIRE(fam.truncation_bound() == Catch::Approx(std::ldexp(2.0, -31)).margin(1e-18));

    auto leb = measures::ReferenceMeasure::lebesgue();
    auto s5 = measures::sigma_n(dbl, Potential::constant(0.0), 5, 0.5, 1);
    auto s9 = measures::sigma_n(dbl, Potential::constant(0.0), 9, 0.5, 1);

    REQUIRE(measures::weak_star_distance(dbl, s5, s5, fam) == 0.0);
    double d5 = measures::weak_star_distance(dbl, s5, leb, fam);
    double d9 = measures::weak_star_distance(dbl, s9, leb, fam);
    REQUIRE(d5 > 0.0);
    REQUIRE(d9 < d5);  // convergence toward Lebesgue (the phi=0 equilibrium)

    // symmetry
    REQUIRE(measures::weak_star_distance(dbl, s5, leb, fam) ==
            Catch::Approx(measures::weak_star_distance(dbl, leb, s5, fam)).margin(1e-18));

    // golden-mean family skips the identity and counts admissible cylinders
    auto gold = SystemSpec::golden_mean_sft();
    auto gfam = measures::TestFunctionFamily::standard(gold);
    REQUIRE(gfam.fns.size() == 2 + 3 + 5 + 8);
}

TEST_CASE("bowen convergence report structure") {
    auto dbl = SystemSpec::doubling();
    auto leb = measures::ReferenceMeasure::lebesgue();
    auto fam = measures::TestFunctionFamily::standard(dbl, 3);
    auto rep = measures::bowen_convergence_report(dbl, Potential::constant(0.0), 0.5,
                                                  {1, 1, 1}, {4, 7, 10}, leb, fam);
    REQUIRE(rep.rows.size() == 3);
    REQUIRE(rep.family_labels.size() == fam.fns.size());
    REQUIRE(rep.reference_integrals.size() == fam.fns.size());
    for (const auto& row : rep.rows) REQUIRE_FALSE(row.empty);
    REQUIRE(rep.diagonal_decreasing);
    REQUIRE(rep.rows[2].distance < rep.rows[0].distance);

    // a schedule through an empty family records a gap row instead of failing
    auto gap = measures::bowen_convergence_report(dbl, Potential::constant(0.0), 1.0,
                                                  {1}, {4, 6}, leb, fam);
    REQUIRE(gap.rows[0].empty);
    REQUIRE(gap.rows[1].empty);
}

TEST_CASE("gibbs reference matches the periodic-orbit limit for weighted potentials") {
    // sigma_n for a depth-1 potential converges weak* to the Gibbs state
    auto dbl = SystemSpec::doubling();
    Potential phi = Potential::cylinder_on_admissible(dbl.transition(), 1, {0.4, -0.2});
    auto gib = measures::ReferenceMeasure::gibbs(dbl, phi);
    auto fam = measures::TestFunctionFamily::standard(dbl, 3, false);
    auto s6 = measures::sigma_n(dbl, phi, 6, 0.5, 1);
    auto s12 = measures::sigma_n(dbl, phi, 12, 0.5, 1);
    double d6 = measures::weak_star_distance(dbl, s6, gib, fam);
    double d12 = measures::weak_star_distance(dbl, s12, gib, fam);
    REQUIRE(d12 < d6);
    REQUIRE(d12 < 0.01);
}

TEST_CASE("expanding-measure diagnostic") {
    auto dbl = SystemSpec::doubling();
    auto s5 = measures::sigma_n(dbl, Potential::constant(0.0), 5, 0.5, 1);
    REQUIRE(measures::f_expanding_test(dbl, s5, 1, 0.5).all_pass);
    REQUIRE(measures::f_expanding_test(dbl, s5, 2, 0.69).all_pass);
    REQUIRE_FALSE(measures::f_expanding_test(dbl, s5, 1, 0.7).all_pass);

    auto mp = SystemSpec::manpo(0.5);
    auto om0 = measures::omega_x(mp, {0});
    auto res = measures::f_expanding_test(mp, om0, 1, 0.01);
    REQUIRE_FALSE(res.all_pass);
    REQUIRE(res.exponents[0] == 0.0);  // neutral orbit: exactly zero exponent

    REQUIRE_THROWS_AS(measures::f_expanding_test(dbl, s5, 0, 0.5), InvalidSpec);
}
