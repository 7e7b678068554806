#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

namespace spinecho {

using Complex = std::complex<double>;

/// Spatial dimensionality of the ensemble: a positive integer or infinity
/// (all-to-all uniform coupling).
class Dimension {
public:
    constexpr explicit Dimension(int d) : value_(d) {}

    static constexpr Dimension infinite() { return Dimension(kInfinite); }

    [[nodiscard]] constexpr bool is_infinite() const { return value_ == kInfinite; }
    [[nodiscard]] constexpr bool is_finite() const { return !is_infinite(); }

    /// Integer dimension; throws ConfigError for the infinite case.
    [[nodiscard]] int value() const;

    [[nodiscard]] std::string to_string() const;

    /// Accepts "inf", "infinite", "infinity" or a positive integer.
    static Dimension parse(std::string_view text);

    friend constexpr bool operator==(Dimension, Dimension) = default;

private:
    static constexpr int kInfinite = -1;
    int value_;
};

/// Orientation of the quantization axis for planar (d = 2) samples.
enum class AxisMode { NormalToPlane, InPlane };

enum class Axis { X, Y, Z };

[[nodiscard]] char axis_label(Axis axis);
[[nodiscard]] Axis parse_axis(std::string_view text);

}  // namespace spinecho
