#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ssml {

using index_t = std::size_t;

/// Thrown on any contract violation (bad shapes, bad arguments, malformed input).
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void fail(std::string_view msg) { throw error(std::string(msg)); }

template <typename... Args>
[[noreturn]] inline void failf(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    throw error(os.str());
}

}  // namespace detail

inline void require(bool cond, std::string_view msg) {
    if (!cond) detail::fail(msg);
}

}  // namespace ssml
