#pragma once

#include <stdexcept>
#include <string>

namespace emgrt {

/// Broad failure categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
    Parameter,  ///< caller supplied an invalid argument or configuration
    Data,       ///< input signal or dataset content is unusable
    Format,     ///< a file does not follow the expected grammar
    Numeric,    ///< a solver failed or a matrix was singular
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error parameter_error(const std::string& what) { return {ErrorKind::Parameter, what}; }
inline Error data_error(const std::string& what) { return {ErrorKind::Data, what}; }
inline Error format_error(const std::string& what) { return {ErrorKind::Format, what}; }
inline Error numeric_error(const std::string& what) { return {ErrorKind::Numeric, what}; }

}  // namespace emgrt
