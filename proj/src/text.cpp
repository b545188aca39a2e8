#include "on2vec/text.hpp"

#include <charconv>

namespace on2vec {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

} // namespace on2vec
