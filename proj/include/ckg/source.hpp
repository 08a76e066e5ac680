#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace ckg {

/// Half-open byte range [begin, end) plus the 1-based line/column of `begin`.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t line = 1;
    std::size_t column = 1;

    auto operator<=>(const SourceSpan&) const = default;

    bool contains(const SourceSpan& inner) const {
        return begin <= inner.begin && inner.end <= end;
    }
    std::string to_string() const {
        return std::to_string(begin) + ":" + std::to_string(end) + ":" +
               std::to_string(line) + ":" + std::to_string(column);
    }
};

/// Non-fatal diagnostic attached to a source location.
struct Warning {
    std::string message;
    SourceSpan span;
};

using Warnings = std::vector<Warning>;

} // namespace ckg
