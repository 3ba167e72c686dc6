#ifndef GSI_ERRORS_HPP
#define GSI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsi {

/// Invalid argument, malformed configuration, or out-of-range data.
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No observation constrains rho: every margin lies outside (0, 1), so the
/// likelihood is constant and any rho would fit equally well.
class unidentifiable_rho : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A statistic is undefined for the given data (constant vector, all-zero
/// differences, single cluster, ...).
class degenerate_input : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed record stream; carries the 1-based line number.
class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A rating references a (participant, mode, trial) segment that has no
/// trajectory data, or vice versa.
class join_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gsi

#endif
