#pragma once

#include <stdexcept>
#include <string>

namespace hmc {

// Thrown when an operation is called outside its documented parameter range.
// The message names the violated precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw PreconditionError(what);
}

}  // namespace hmc
