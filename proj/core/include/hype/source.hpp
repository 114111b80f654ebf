#pragma once

#include <cstddef>
#include <string>

namespace hype {

struct SourceSpan {
    std::string file;
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t length = 0;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

/// Source location attached to a model construct. Locations never take part
/// in structural comparison, so a reparsed model compares equal to the
/// original even though every construct moved.
struct NodeSpan {
    SourceSpan value;

    friend bool operator==(const NodeSpan&, const NodeSpan&) noexcept { return true; }
};

} // namespace hype
