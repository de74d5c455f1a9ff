#pragma once

#include <stdexcept>
#include <string>

namespace lsv {

// bad user input (files, config, quote data): CLI exit code 3
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// solver breakdown (singular system, non-finite values, quadrature failure): CLI exit code 4
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lsv
