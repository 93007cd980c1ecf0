#include "gmp_overbound/format.hpp"

#include <cstdio>

namespace gmpbound {

namespace {

std::string fmt_g(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

}  // namespace

std::string fmt_machine(double value) { return fmt_g(value, 15); }
std::string fmt_human(double value) { return fmt_g(value, 6); }

}  // namespace gmpbound
