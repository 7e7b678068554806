#include "spinecho/types.hpp"

#include "spinecho/error.hpp"

#include <charconv>

namespace spinecho {

int Dimension::value() const {
    if (is_infinite()) {
        throw ConfigError("dimension is infinite");
    }
    return value_;
}

std::string Dimension::to_string() const {
    return is_infinite() ? std::string("inf") : std::to_string(value_);
}

Dimension Dimension::parse(std::string_view text) {
    if (text == "inf" || text == "infinite" || text == "infinity" || text == "INFINITE") {
        return infinite();
    }
    int d = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, d);
    if (ec != std::errc{} || ptr != end || d < 1) {
        throw ConfigError("invalid dimension '" + std::string(text) + "'");
    }
    return Dimension(d);
}

char axis_label(Axis axis) {
    switch (axis) {
        case Axis::X: return 'x';
        case Axis::Y: return 'y';
        case Axis::Z: return 'z';
    }
    return '?';
}

Axis parse_axis(std::string_view text) {
    if (text == "x" || text == "X") return Axis::X;
    if (text == "y" || text == "Y") return Axis::Y;
    if (text == "z" || text == "Z") return Axis::Z;
    throw ConfigError("invalid axis '" + std::string(text) + "'");
}

}  // namespace spinecho
