#include "on2vec/log.hpp"

#include <iostream>
#include <utility>

namespace on2vec {

namespace {

WarningSink& sink() {
    static WarningSink current = [](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return current;
}

} // namespace

void warn(const std::string& message) {
    if (sink()) sink()(message);
}

WarningSink set_warning_sink(WarningSink next) {
    return std::exchange(sink(), std::move(next));
}

} // namespace on2vec
