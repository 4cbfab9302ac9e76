#ifndef QNOPS_ERRORS_HPP
#define QNOPS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qnops {

/// Invalid argument or value outside the mathematical domain
/// (e.g. a kernel point on or outside the unit circle).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// The requested computation cannot be certified at the current
/// truncation size; carries the minimum size that would suffice
/// when that is known (0 otherwise).
class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what, int required = 0)
        : std::runtime_error(what), required_size(required) {}
    int required_size;
};

/// A checker was invoked on an instance that belongs to the other
/// branch of a case split (dependent vs independent, etc.).
class BranchError : public std::logic_error {
public:
    explicit BranchError(const std::string& what) : std::logic_error(what) {}
};

/// Internal cross-validation failed: two routes that must agree did
/// not.  This signals tolerance misconfiguration or a genuine bug,
/// never a property of the input instance.
class ConsistencyAlarm : public std::runtime_error {
public:
    explicit ConsistencyAlarm(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qnops

#endif
