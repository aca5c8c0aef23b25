#ifndef FAIRGDA_ERRORS_HPP
#define FAIRGDA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fairgda {

// Mismatched vector/matrix dimensions between arguments.
struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad or inconsistent configuration (CLI exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unusable input data: ingestion, split, generator preconditions (CLI exit code 3).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training blow-up: non-finite or absurd loss (CLI exit code 4).
struct divergence_error : std::runtime_error {
    divergence_error(const std::string& what, int iteration)
        : std::runtime_error(what), iteration(iteration) {}
    int iteration;
};

}  // namespace fairgda

#endif
