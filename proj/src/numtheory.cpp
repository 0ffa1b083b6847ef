#include "ggethermo/numtheory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace ggethermo {

namespace {

BigInt big_abs(const BigInt& x) { return x < 0 ? BigInt(-x) : x; }

long long to_ll(const BigInt& x, const char* what) {
    if (x > std::numeric_limits<long long>::max() || x < std::numeric_limits<long long>::min())
        throw ResourceError(std::string(what) + ": value exceeds 64-bit integer range");
    return x.convert_to<long long>();
}

BigInt pow10(size_t k) {
    BigInt r = 1;
    for (size_t i = 0; i < k; ++i) r *= 10;
    return r;
}

// cpp_int's string constructor treats leading zeros as octal, so digits are
// stripped to a canonical decimal form first.
BigInt digits_to_int(const std::string& digits) {
    size_t first = digits.find_first_not_of('0');
    if (first == std::string::npos) return BigInt(0);
    return BigInt(digits.substr(first));
}

BigInt parse_int(const std::string& text, const char* what) {
    if (text.empty()) throw ConfigError(std::string(what) + ": empty integer");
    size_t pos = (text[0] == '+' || text[0] == '-') ? 1 : 0;
    if (pos == text.size()) throw ConfigError(std::string(what) + ": sign without digits");
    for (size_t i = pos; i < text.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(text[i])))
            throw ConfigError(std::string(what) + ": bad integer '" + text + "'");
    BigInt v = digits_to_int(text.substr(pos));
    return text[0] == '-' ? BigInt(-v) : v;
}

}  // namespace

Rational::Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) {
    if (den_ == 0) throw InvariantError("Rational: zero denominator");
    normalize();
}

void Rational::normalize() {
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    if (num_ == 0) {
        den_ = 1;
        return;
    }
    BigInt g = boost::multiprecision::gcd(big_abs(num_), den_);
    num_ /= g;
    den_ /= g;
}

Rational Rational::from_string(const std::string& text) {
    if (text.empty()) throw ConfigError("Rational: empty string");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt n = parse_int(text.substr(0, slash), "Rational");
        BigInt d = parse_int(text.substr(slash + 1), "Rational");
        if (d == 0) throw ConfigError("Rational: zero denominator in '" + text + "'");
        return Rational(n, d);
    }
    size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string digits;
    size_t frac_len = 0;
    bool any_digit = false, seen_dot = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            any_digit = true;
            if (seen_dot) ++frac_len;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (c == 'e' || c == 'E') {
            break;
        } else {
            throw ConfigError("Rational: bad decimal '" + text + "'");
        }
    }
    if (!any_digit) throw ConfigError("Rational: no digits in '" + text + "'");
    long long exp10 = 0;
    if (pos < text.size()) {
        exp10 = to_ll(parse_int(text.substr(pos + 1), "Rational exponent"), "Rational exponent");
        if (std::llabs(exp10) > 100000)
            throw ConfigError("Rational: exponent out of range in '" + text + "'");
    }
    BigInt num = digits_to_int(digits);
    BigInt den = pow10(frac_len);
    if (exp10 > 0)
        num *= pow10(static_cast<size_t>(exp10));
    else if (exp10 < 0)
        den *= pow10(static_cast<size_t>(-exp10));
    if (negative) num = -num;
    return Rational(std::move(num), std::move(den));
}

Rational Rational::from_double(double value) {
    if (!std::isfinite(value)) throw InvariantError("Rational::from_double: non-finite value");
    if (value == 0.0) return Rational();
    int exp = 0;
    double mant = std::frexp(value, &exp);
    auto mant_int = static_cast<long long>(std::ldexp(mant, 53));
    int e2 = exp - 53;
    BigInt num = mant_int, den = 1;
    if (e2 >= 0)
        num <<= e2;
    else
        den <<= -e2;
    return Rational(std::move(num), std::move(den));
}

Rational Rational::operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
}

Rational Rational::abs() const { return num_ < 0 ? -*this : *this; }

BigInt Rational::floor() const {
    if (num_ >= 0) return num_ / den_;
    return -((-num_ + den_ - 1) / den_);
}

double Rational::to_double() const {
    if (num_ == 0) return 0.0;
    BigInt n = num_, d = den_;
    auto bits = [](const BigInt& x) {
        return x == 0 ? 0 : static_cast<long>(boost::multiprecision::msb(big_abs(x))) + 1;
    };
    long excess = std::max(bits(n), bits(d)) - 900;
    if (excess > 0) {
        n >>= excess;
        d >>= excess;
        if (d == 0) return n < 0 ? -std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::infinity();
    }
    return n.convert_to<double>() / d.convert_to<double>();
}

std::string Rational::to_string() const {
    if (den_ == 1) return num_.str();
    return num_.str() + "/" + den_.str();
}

Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}
Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw InvariantError("Rational: division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
}
bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
}
bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
bool operator<(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
}
bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
bool operator>(const Rational& a, const Rational& b) { return b < a; }
bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

BezoutPair bezout(long long u, long long v) {
    if (u < 1 || v < 1) throw InvariantError("bezout: operands must be positive");
    BigInt old_r = u, r = v, old_s = 1, s = 0;
    while (r != 0) {
        BigInt q = old_r / r;
        BigInt tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
    }
    if (old_r != 1) throw InvariantError("bezout: operands are not coprime");
    BigInt m = old_s % v;
    if (m < 0) m += v;
    BigInt cand1 = m, cand2 = m - v;
    BigInt pick;
    if (big_abs(cand1) < big_abs(cand2))
        pick = cand1;
    else if (big_abs(cand2) < big_abs(cand1))
        pick = cand2;
    else
        pick = cand1 > 0 ? cand1 : cand2;
    BigInt dn2 = (BigInt(1) - BigInt(u) * pick) / v;
    return BezoutPair{to_ll(pick, "bezout"), to_ll(dn2, "bezout")};
}

std::vector<Rational> farey_sequence(int order) {
    if (order < 1) throw InvariantError("farey_sequence: order must be >= 1");
    if (order > 2000)
        throw ResourceError("farey_sequence: order beyond enumeration cap 2000");
    std::vector<Rational> out;
    long long a = 0, b = 1, c = 1, d = order;
    out.emplace_back(Rational(BigInt(a), BigInt(b)));
    while (!(a == 1 && b == 1)) {
        long long k = (order + b) / d;
        long long a2 = k * c - a, b2 = k * d - b;
        a = c;
        b = d;
        c = a2;
        d = b2;
        out.emplace_back(Rational(BigInt(a), BigInt(b)));
    }
    return out;
}

Rational best_rational_approx(const Rational& target, const BigInt& max_den) {
    if (max_den < 1) throw InvariantError("best_rational_approx: max_den must be >= 1");
    if (target.den() <= max_den) return target;
    BigInt a0 = target.floor();
    Rational f = target - Rational(a0, 1);
    BigInt p = f.num(), q = f.den();
    BigInt h_mm = 0, k_mm = 1, h_m = 1, k_m = 0;
    Rational cand1, cand2;
    while (true) {
        // q cannot reach 0 before the bound triggers: den(target) > max_den.
        BigInt a = p / q;
        BigInt tmp = p - a * q;
        p = q;
        q = tmp;
        BigInt h = a * h_m + h_mm;
        BigInt k = a * k_m + k_mm;
        if (k > max_den) {
            BigInt j = (max_den - k_mm) / k_m;
            cand1 = Rational(h_m, k_m);
            cand2 = Rational(h_mm + j * h_m, k_mm + j * k_m);
            break;
        }
        h_mm = h_m;
        k_mm = k_m;
        h_m = h;
        k_m = k;
    }
    Rational d1 = (f - cand1).abs();
    Rational d2 = (f - cand2).abs();
    Rational best;
    if (d1 < d2)
        best = cand1;
    else if (d2 < d1)
        best = cand2;
    else if (cand1.den() != cand2.den())
        best = cand1.den() < cand2.den() ? cand1 : cand2;
    else
        best = cand1 < cand2 ? cand1 : cand2;
    return best + Rational(a0, 1);
}

Rational nearest_farey(const Rational& target, int order) {
    if (order < 1) throw InvariantError("nearest_farey: order must be >= 1");
    if (target < Rational(0) || target > Rational(1))
        throw InvariantError("nearest_farey: target outside [0, 1]");
    return best_rational_approx(target, BigInt(order));
}

Rational float_to_rational(double value, long long max_den) {
    if (max_den < 1) throw InvariantError("float_to_rational: max_den must be >= 1");
    return best_rational_approx(Rational::from_double(value), BigInt(max_den));
}

bool FareyInterval::contains(const Rational& t) const {
    if (excludes_center && t == center) return false;
    return lo() < t && t < hi();
}

FareyInterval farey_interval(const Rational& center, const Rational& epsilon,
                             const Rational& y) {
    if (!(epsilon > Rational(0))) throw InvariantError("farey_interval: epsilon must be positive");
    if (y.is_zero()) throw InvariantError("farey_interval: y must be nonzero");
    Rational hw = epsilon / (y.abs() * Rational(center.den(), 1));
    return FareyInterval{center, hw, true};
}

CoverageReport verify_coverage(int order, const Rational& epsilon, const Rational& y) {
    if (!(epsilon > Rational(0))) throw InvariantError("verify_coverage: epsilon must be positive");
    if (y.is_zero()) throw InvariantError("verify_coverage: y must be nonzero");
    auto seq = farey_sequence(order);
    CoverageReport rep;
    rep.order = order;
    rep.ok = true;
    Rational ratio = epsilon / y.abs();
    bool first = true;
    for (size_t i = 0; i + 1 < seq.size(); ++i) {
        const Rational& lft = seq[i];
        const Rational& rgt = seq[i + 1];
        Rational vl(lft.den(), 1), vr(rgt.den(), 1);
        // Overlap length of adjacent punctured intervals:
        // eps/|y| (1/v + 1/v') - (u'/v' - u/v), the gap term being 1/(v v').
        Rational margin = ratio * (Rational(1) / vl + Rational(1) / vr) - (rgt - lft);
        if (first || margin < rep.min_margin) {
            rep.min_margin = margin;
            first = false;
        }
        if (!(margin > Rational(0))) rep.ok = false;
        ++rep.checked_pairs;
    }
    return rep;
}

std::string RespecifyRequired::message() const {
    std::string base = "robust selection needs a tighter measurement: ";
    if (reason == Reason::center_hit)
        return base + "the window cannot be separated from the excluded center " +
               nearest.to_string();
    return base + "the window escapes the tolerance interval around " + nearest.to_string();
}

RobustResult robust_select(const Rational& measured, const Rational& delta,
                           const Rational& epsilon, const Rational& y) {
    if (!(epsilon > Rational(0))) throw InvariantError("robust_select: epsilon must be positive");
    if (y.is_zero()) throw InvariantError("robust_select: y must be nonzero");
    if (delta < Rational(0)) throw InvariantError("robust_select: delta must be nonnegative");

    BigInt order = (y.abs() / epsilon).floor();
    if (order < 1) order = 1;
    if (order > BigInt(1000000000000000LL))
        throw ResourceError("robust_select: Farey order exceeds practical range");

    BigInt f = measured.floor();
    Rational t = measured - Rational(f, 1);
    Rational near = best_rational_approx(t, order);
    FareyInterval interval = farey_interval(near, epsilon, y);

    Rational dist = (t - near).abs();
    long long order_ll = to_ll(order, "robust_select order");
    if (dist <= delta) {
        return RespecifyRequired{RespecifyRequired::Reason::center_hit, order_ll, near, t};
    }
    if (!(dist + delta < interval.half_width)) {
        return RespecifyRequired{RespecifyRequired::Reason::window_escapes, order_ll, near, t};
    }

    RobustSelection sel;
    sel.order = order_ll;
    sel.nearest = near;
    sel.floor_part = f;
    sel.translated = t;
    sel.interval = interval;
    BigInt v = near.den(), u = near.num();
    sel.dn1 = to_ll(v, "robust_select dn1");
    sel.dn2 = to_ll(-(u + f * v), "robust_select dn2");
    sel.combo_bound = y.abs() * Rational(v, 1) * (dist + delta);
    return sel;
}

bool selection_succeeded(const RobustResult& r) {
    return std::holds_alternative<RobustSelection>(r);
}

}  // namespace ggethermo
