#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ggethermo/numtheory.hpp"

using namespace ggethermo;

namespace {

Rational rat(long long n, long long d) { return Rational(BigInt(n), BigInt(d)); }

// Oracle: scan every irreducible fraction with denominator <= max_den and
// keep the closest one under the documented tie rules.
Rational brute_best_approx(const Rational& target, long long max_den) {
    BigInt lo_int = target.floor() - 1, hi_int = target.floor() + 2;
    bool have = false;
    Rational best, best_dist;
    for (long long d = 1; d <= max_den; ++d) {
        for (BigInt n = lo_int * d; n <= hi_int * d; ++n) {
            if (boost::multiprecision::gcd(n < 0 ? BigInt(-n) : n, BigInt(d)) != 1) continue;
            Rational cand(n, d);
            Rational dist = (target - cand).abs();
            if (!have || dist < best_dist ||
                (dist == best_dist && (cand.den() < best.den() ||
                                       (cand.den() == best.den() && cand < best)))) {
                have = true;
                best = cand;
                best_dist = dist;
            }
        }
    }
    return best;
}

}  // namespace

TEST_SUITE("numtheory") {

TEST_CASE("rational parsing handles decimals, exponents and fractions") {
    CHECK(Rational::from_string("0.1") == rat(1, 10));
    CHECK(Rational::from_string("1e-3") == rat(1, 1000));
    CHECK(Rational::from_string("-0.25") == rat(-1, 4));
    CHECK(Rational::from_string("7/10") == rat(7, 10));
    CHECK(Rational::from_string("6.02e2") == Rational(602));
    CHECK(Rational::from_string("+3") == Rational(3));
    CHECK(Rational::from_string("-7/10") == rat(-7, 10));
    CHECK_THROWS_AS(Rational::from_string("abc"), ConfigError);
    CHECK_THROWS_AS(Rational::from_string("1/0"), ConfigError);
    CHECK_THROWS_AS(Rational::from_string(""), ConfigError);
    CHECK_THROWS_AS(Rational::from_string("1.2.3"), ConfigError);
}

TEST_CASE("rational arithmetic is exact and normalized") {
    CHECK(rat(1, 3) + rat(1, 6) == rat(1, 2));
    CHECK(rat(2, 4) == rat(1, 2));
    CHECK(rat(-2, -4) == rat(1, 2));
    CHECK(rat(1, 2) - rat(2, 3) == rat(-1, 6));
    CHECK(rat(3, 7) * rat(7, 3) == Rational(1));
    CHECK(rat(1, 3) / rat(2, 9) == rat(3, 2));
    CHECK(rat(-5, 3).floor() == -2);
    CHECK(rat(5, 3).floor() == 1);
    CHECK(rat(-6, 3).floor() == -2);
    CHECK(rat(1, 3) < rat(2, 5));
    CHECK(rat(-1, 2) < rat(1, 3));
    CHECK(rat(22, 7).to_double() == doctest::Approx(22.0 / 7.0).epsilon(1e-15));
    CHECK(rat(7, 10).to_string() == "7/10");
    CHECK(Rational(4).to_string() == "4");
}

TEST_CASE("from_double is the exact binary expansion") {
    CHECK(Rational::from_double(0.5) == rat(1, 2));
    CHECK(Rational::from_double(-0.75) == rat(-3, 4));
    Rational tenth = Rational::from_double(0.1);
    CHECK(tenth.num() == BigInt("3602879701896397"));
    CHECK(tenth.den() == BigInt("36028797018963968"));
    CHECK(tenth != rat(1, 10));
    CHECK(Rational::from_double(0.0) == Rational(0));
}

TEST_CASE("bezout canonical pairs") {
    BezoutPair p = bezout(3, 5);
    CHECK(p.dn1 == 2);
    CHECK(p.dn2 == -1);
    p = bezout(1, 7);
    CHECK(p.dn1 == 1);
    CHECK(p.dn2 == 0);
    p = bezout(7, 1);
    CHECK(p.dn1 == 0);
    CHECK(p.dn2 == 1);
    p = bezout(1, 1);
    CHECK(p.dn1 == 0);
    CHECK(p.dn2 == 1);
    p = bezout(5, 8);
    CHECK(5 * p.dn1 + 8 * p.dn2 == 1);
    CHECK(std::llabs(p.dn1) * 2 <= 8);
    CHECK_THROWS_AS(bezout(4, 6), InvariantError);
    CHECK_THROWS_AS(bezout(0, 5), InvariantError);
}

TEST_CASE("bezout fuzz: identity, minimality and bounds") {
    std::mt19937_64 gen(987);
    std::uniform_int_distribution<long long> dist(1, 1000000000LL);
    int done = 0;
    while (done < 1000000) {
        long long a = dist(gen), b = dist(gen);
        long long g = std::gcd(a, b);
        long long u = a / g, v = b / g;
        BezoutPair p = bezout(u, v);
        // identity in 128-bit arithmetic
        __int128 acc = static_cast<__int128>(u) * p.dn1 + static_cast<__int128>(v) * p.dn2;
        if (acc != 1) {
            CHECK(false);
            break;
        }
        if (u >= 2 && v >= 2) {
            if (!(std::llabs(p.dn1) < v && std::llabs(p.dn2) < u)) {
                CHECK(false);
                break;
            }
            // minimal |dn1| means |dn1| <= v/2
            if (2 * std::llabs(p.dn1) > v) {
                CHECK(false);
                break;
            }
        }
        ++done;
    }
    CHECK(done == 1000000);
}

TEST_CASE("farey sequence of order 5 has the standard eleven terms") {
    auto f5 = farey_sequence(5);
    std::vector<Rational> expect = {rat(0, 1), rat(1, 5), rat(1, 4), rat(1, 3),
                                    rat(2, 5), rat(1, 2), rat(3, 5), rat(2, 3),
                                    rat(3, 4), rat(4, 5), rat(1, 1)};
    REQUIRE(f5.size() == expect.size());
    for (size_t i = 0; i < expect.size(); ++i) CHECK(f5[i] == expect[i]);
}

TEST_CASE("farey sequences are ascending with unimodular neighbors") {
    for (int n : {1, 2, 8, 13, 40}) {
        auto f = farey_sequence(n);
        CHECK(f.front() == Rational(0));
        CHECK(f.back() == Rational(1));
        for (size_t i = 0; i + 1 < f.size(); ++i) {
            CHECK(f[i] < f[i + 1]);
            BigInt det = f[i + 1].num() * f[i].den() - f[i].num() * f[i + 1].den();
            CHECK(det == 1);
        }
    }
    CHECK(farey_sequence(8).size() == 23);
    CHECK_THROWS_AS(farey_sequence(0), InvariantError);
    CHECK_THROWS_AS(farey_sequence(100000), ResourceError);
}

TEST_CASE("nearest farey fraction: worked values") {
    CHECK(nearest_farey(rat(7, 10), 5) == rat(2, 3));
    CHECK(nearest_farey(rat(7, 10), 3) == rat(2, 3));
    CHECK(nearest_farey(rat(1, 2), 5) == rat(1, 2));
    // 5/12 is equidistant from 1/3 and 1/2; the smaller denominator wins.
    CHECK(nearest_farey(rat(5, 12), 3) == rat(1, 2));
    CHECK(nearest_farey(rat(0, 1), 4) == rat(0, 1));
    CHECK(nearest_farey(rat(1, 1), 4) == rat(1, 1));
    CHECK_THROWS_AS(nearest_farey(rat(3, 2), 4), InvariantError);
}

TEST_CASE("best bounded approximation agrees with brute enumeration") {
    std::mt19937_64 gen(555);
    std::uniform_int_distribution<long long> num(0, 10000);
    std::uniform_int_distribution<long long> den(1, 10000);
    std::uniform_int_distribution<long long> bound(1, 50);
    for (int t = 0; t < 200; ++t) {
        long long n = num(gen), d = den(gen);
        Rational target = rat(n % (d + 1), d);  // in [0, 1]
        long long b = bound(gen);
        Rational fast = best_rational_approx(target, BigInt(b));
        Rational brute = brute_best_approx(target, b);
        CHECK(fast == brute);
    }
}

TEST_CASE("float_to_rational recovers classic approximations") {
    Rational pi = float_to_rational(M_PI, 120);
    CHECK(pi == rat(355, 113));
    CHECK(float_to_rational(0.25, 100) == rat(1, 4));
    CHECK(float_to_rational(-1.5, 10) == rat(-3, 2));
    std::mt19937_64 gen(777);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    std::uniform_int_distribution<long long> bound(1, 40);
    for (int t = 0; t < 100; ++t) {
        double v = val(gen);
        long long b = bound(gen);
        CHECK(float_to_rational(v, b) == brute_best_approx(Rational::from_double(v), b));
    }
}

TEST_CASE("farey interval around 2/3 with eps 3/10 and y 1") {
    FareyInterval iv = farey_interval(rat(2, 3), rat(3, 10), Rational(1));
    CHECK(iv.half_width == rat(1, 10));
    CHECK(iv.lo() == rat(17, 30));
    CHECK(iv.hi() == rat(23, 30));
    CHECK(iv.excludes_center);
    CHECK_FALSE(iv.contains(rat(2, 3)));
    CHECK(iv.contains(rat(7, 10)));
    CHECK_FALSE(iv.contains(rat(4, 5)));
    // halved |y| doubles the width
    CHECK(farey_interval(rat(2, 3), rat(3, 10), rat(1, 2)).half_width == rat(1, 5));
}

TEST_CASE("coverage verification: adjacent punctured intervals overlap") {
    CoverageReport rep = verify_coverage(3, rat(3, 10), Rational(1));
    CHECK(rep.ok);
    CHECK(rep.checked_pairs == 4);
    CHECK(rep.min_margin > Rational(0));

    // eps far below 1/(order+1): gaps open up and the check reports them.
    CoverageReport bad = verify_coverage(3, rat(1, 10), Rational(1));
    CHECK_FALSE(bad.ok);
    CHECK(bad.min_margin < Rational(0));

    for (int n = 1; n <= 30; ++n) {
        CoverageReport r = verify_coverage(n, Rational(BigInt(2), BigInt(2 * n + 1)), Rational(1));
        CHECK(r.ok);
    }
}

TEST_CASE("robust selection: worked example at 7/10") {
    RobustResult res = robust_select(rat(7, 10), rat(1, 1000), rat(3, 10), Rational(1));
    REQUIRE(selection_succeeded(res));
    const auto& sel = std::get<RobustSelection>(res);
    CHECK(sel.order == 3);
    CHECK(sel.nearest == rat(2, 3));
    CHECK(sel.dn1 == 3);
    CHECK(sel.dn2 == -2);
    CHECK(sel.interval.half_width == rat(1, 10));
    // |x dn1 + y dn2| at the measured ratio, exactly
    Rational combo = (rat(7, 10) * Rational(sel.dn1) + Rational(sel.dn2)).abs();
    CHECK(combo == rat(1, 10));
    CHECK(combo < rat(3, 10));
    CHECK(sel.combo_bound < rat(3, 10));
    CHECK(combo <= sel.combo_bound);
}

TEST_CASE("robust selection translates ratios outside the unit interval") {
    RobustResult res = robust_select(rat(17, 10), rat(1, 1000), rat(3, 10), Rational(1));
    REQUIRE(selection_succeeded(res));
    const auto& sel = std::get<RobustSelection>(res);
    CHECK(sel.floor_part == 1);
    CHECK(sel.nearest == rat(2, 3));
    CHECK(sel.dn1 == 3);
    CHECK(sel.dn2 == -5);
    CHECK((rat(17, 10) * Rational(sel.dn1) + Rational(sel.dn2)).abs() == rat(1, 10));

    RobustResult neg = robust_select(rat(-3, 10), rat(1, 1000), rat(3, 10), Rational(1));
    REQUIRE(selection_succeeded(neg));
    const auto& nsel = std::get<RobustSelection>(neg);
    CHECK(nsel.floor_part == -1);
    CHECK(nsel.dn1 == 3);
    CHECK(nsel.dn2 == 1);
    CHECK((rat(-3, 10) * Rational(nsel.dn1) + Rational(nsel.dn2)).abs() == rat(1, 10));
}

TEST_CASE("robust selection refusals") {
    // measured exactly on the excluded center
    RobustResult hit = robust_select(rat(2, 3), rat(1, 1000), rat(3, 10), Rational(1));
    REQUIRE_FALSE(selection_succeeded(hit));
    CHECK(std::get<RespecifyRequired>(hit).reason == RespecifyRequired::Reason::center_hit);

    // window cannot be separated from the center
    RobustResult close = robust_select(rat(2, 3) + rat(1, 10000), rat(1, 1000), rat(3, 10),
                                       Rational(1));
    REQUIRE_FALSE(selection_succeeded(close));
    CHECK(std::get<RespecifyRequired>(close).reason == RespecifyRequired::Reason::center_hit);

    // center separable (dist 1/15 > delta 1/25) but the window pokes out of
    // the tolerance interval: 1/15 + 1/25 = 8/75 > 1/10
    RobustResult wide = robust_select(rat(11, 15), rat(1, 25), rat(3, 10), Rational(1));
    REQUIRE_FALSE(selection_succeeded(wide));
    CHECK(std::get<RespecifyRequired>(wide).reason ==
          RespecifyRequired::Reason::window_escapes);

    // a window swallowing the center reports the center, not the width
    RobustResult swallowed = robust_select(rat(7, 10), rat(1, 2), rat(3, 10), Rational(1));
    REQUIRE_FALSE(selection_succeeded(swallowed));
    CHECK(std::get<RespecifyRequired>(swallowed).reason ==
          RespecifyRequired::Reason::center_hit);

    CHECK_THROWS_AS(robust_select(rat(7, 10), rat(1, 100), Rational(0), Rational(1)),
                    InvariantError);
    CHECK_THROWS_AS(robust_select(rat(7, 10), rat(1, 100), rat(3, 10), Rational(0)),
                    InvariantError);
}

TEST_CASE("robust selection soundness fuzz") {
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<long long> num(-5000, 5000);
    std::uniform_int_distribution<long long> den(1, 5000);
    std::uniform_int_distribution<int> eps_den(2, 60);
    int successes = 0;
    for (int t = 0; t < 200; ++t) {
        Rational measured = rat(num(gen), den(gen));
        Rational delta = rat(1, 100000);
        Rational eps = rat(1, eps_den(gen));
        Rational y = rat(1 + (t % 5), 1 + (t % 3));
        RobustResult res = robust_select(measured, delta, eps, y);
        if (!selection_succeeded(res)) continue;
        ++successes;
        const auto& sel = std::get<RobustSelection>(res);
        Rational x = measured * y;
        Rational combo = (x * Rational(sel.dn1) + y * Rational(sel.dn2)).abs();
        CHECK(combo < eps);
        CHECK(combo > Rational(0));
        CHECK(combo <= sel.combo_bound);
    }
    CHECK(successes > 50);
}

}  // TEST_SUITE
