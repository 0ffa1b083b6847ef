#pragma once

// Exact rational arithmetic and the number-theoretic layer behind robust
// bath-pair selection: Bezout pairs, Farey sequences, punctured tolerance
// intervals, coverage verification and the measurement-window selector.

#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ggethermo/errors.hpp"

namespace ggethermo {

using BigInt = boost::multiprecision::cpp_int;

// Arbitrary-precision rational, always normalized (den > 0, gcd(num, den) = 1).
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}  // NOLINT: implicit by design
    Rational(BigInt n, BigInt d);

    // Accepts "3", "-0.25", "1e-3", "6.02e23", "7/10".
    static Rational from_string(const std::string& text);
    // Exact binary expansion of the double (no rounding).
    static Rational from_double(double value);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ == 0 ? 0 : (num_ > 0 ? 1 : -1); }

    Rational operator-() const;
    Rational abs() const;
    BigInt floor() const;
    double to_double() const;
    std::string to_string() const;  // "num/den", or "num" when den = 1

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b);
    friend bool operator!=(const Rational& a, const Rational& b);
    friend bool operator<(const Rational& a, const Rational& b);
    friend bool operator<=(const Rational& a, const Rational& b);
    friend bool operator>(const Rational& a, const Rational& b);
    friend bool operator>=(const Rational& a, const Rational& b);

private:
    BigInt num_, den_;
    void normalize();
};

struct BezoutPair {
    long long dn1 = 0;
    long long dn2 = 0;
};

// Canonical solution of u*dn1 + v*dn2 = 1 for positive coprime (u, v):
// minimal |dn1|, ties broken toward positive dn1. For u, v >= 2 the result
// satisfies |dn1| < v and |dn2| < u; (1,1) -> (0,1) is the degenerate case.
BezoutPair bezout(long long u, long long v);

// Irreducible fractions in [0, 1] with denominator <= order, ascending.
std::vector<Rational> farey_sequence(int order);

// Closest irreducible fraction to target with denominator <= max_den;
// ties prefer the smaller denominator, then the smaller value.
Rational best_rational_approx(const Rational& target, const BigInt& max_den);

// best_rational_approx restricted to targets in [0, 1].
Rational nearest_farey(const Rational& target, int order);

// Best rational approximation of a double with bounded denominator.
Rational float_to_rational(double value, long long max_den);

// Open interval (center - eps/(|y| v), center + eps/(|y| v)) with the center
// itself excluded; v is the denominator of center.
struct FareyInterval {
    Rational center;
    Rational half_width;
    bool excludes_center = true;
    Rational lo() const { return center - half_width; }
    Rational hi() const { return center + half_width; }
    bool contains(const Rational& t) const;
};

FareyInterval farey_interval(const Rational& center, const Rational& epsilon,
                             const Rational& y);

// Checks that the punctured intervals of adjacent order-n Farey fractions
// overlap, so only the centers themselves escape coverage.
struct CoverageReport {
    int order = 0;
    long long checked_pairs = 0;
    bool ok = false;
    Rational min_margin;  // smallest pairwise overlap margin (positive iff ok)
};

CoverageReport verify_coverage(int order, const Rational& epsilon, const Rational& y);

// Successful selection: an integer pair with |x*dn1 + y*dn2| < epsilon
// guaranteed for every true ratio inside the measurement window.
struct RobustSelection {
    long long dn1 = 0;
    long long dn2 = 0;
    long long order = 0;
    Rational nearest;       // u*/v* approximating the translated ratio
    BigInt floor_part;      // integer translation applied to measured
    Rational translated;    // measured - floor_part, in [0, 1)
    FareyInterval interval;
    Rational combo_bound;   // exact bound on |x*dn1 + y*dn2| over the window
};

// The measurement window cannot be separated from the excluded center, or
// escapes the tolerance interval; a tighter measurement is needed.
struct RespecifyRequired {
    enum class Reason { center_hit, window_escapes };
    Reason reason = Reason::center_hit;
    long long order = 0;
    Rational nearest;
    Rational translated;
    std::string message() const;
};

using RobustResult = std::variant<RobustSelection, RespecifyRequired>;

// measured = best estimate of x/y, known to within +-delta; epsilon is the
// combo tolerance and y the second coefficient. Picks the Farey order
// max(1, floor(|y|/epsilon)), the nearest fraction u*/v* to the translated
// ratio, and returns dn = (v*, -(u* + floor*v*)) when the whole window sits
// inside the punctured interval of u*/v*.
RobustResult robust_select(const Rational& measured, const Rational& delta,
                           const Rational& epsilon, const Rational& y);

bool selection_succeeded(const RobustResult& r);

}  // namespace ggethermo
