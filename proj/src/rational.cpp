#include "kignn/rational.hpp"

#include <cctype>

namespace kignn {

Rat parse_rational(const std::string& s) {
    size_t i = 0;
    bool neg = false;
    auto fail = [&]() { throw std::runtime_error("bad rational literal: '" + s + "'"); };
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = (s[i] == '-');
        ++i;
    }
    auto digits = [&](std::string& out) {
        size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) out += s[i++];
        if (i == start) fail();
    };
    std::string intpart;
    digits(intpart);
    Rat value;
    if (i < s.size() && s[i] == '/') {
        ++i;
        std::string den;
        digits(den);
        if (i != s.size()) fail();
        mpz_class d(den);
        if (d == 0) fail();
        value = Rat(mpz_class(intpart), d);
    } else if (i < s.size() && s[i] == '.') {
        ++i;
        std::string frac;
        digits(frac);
        if (i != s.size()) fail();
        mpz_class scale = 1;
        for (size_t k = 0; k < frac.size(); ++k) scale *= 10;
        value = Rat(mpz_class(intpart) * scale + mpz_class(frac), scale);
    } else {
        if (i != s.size()) fail();
        value = Rat(mpz_class(intpart));
    }
    value.canonicalize();
    if (neg) value = -value;
    return value;
}

std::string rat_string(const Rat& q) {
    Rat c = q;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

}  // namespace kignn
