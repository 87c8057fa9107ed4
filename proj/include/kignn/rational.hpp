#pragma once
#include <gmpxx.h>
#include <stdexcept>
#include <string>

namespace kignn {

using Rat = mpq_class;

/* Parses "-3", "1/2", "0.125" (decimal form is exact). Throws std::runtime_error. */
Rat parse_rational(const std::string& s);

/* Lowest-terms "p" or "p/q" form. */
std::string rat_string(const Rat& q);

inline double rat_double(const Rat& q) { return q.get_d(); }

}  // namespace kignn
