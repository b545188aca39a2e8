#pragma once

#include <string>

namespace on2vec {

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

} // namespace on2vec
