#ifndef CNSM_ERROR_HPP
#define CNSM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cnsm {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ConflictError : Error {
    using Error::Error;
};
struct PreconditionError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct IncompatibleFilterError : Error {
    using Error::Error;
};
struct IrreparableColumnError : Error {
    using Error::Error;
};

}  // namespace cnsm

#endif
