#pragma once

#include <cmath>
#include <numbers>

namespace rdflow {

/// Complex electrical quantity (voltage, current, impedance or power).
///
/// Stored in rectangular form; the polar view is computed on demand. Angles
/// are radians in (-pi, pi].
class Phasor {
public:
    constexpr Phasor() = default;
    constexpr Phasor(double re, double im) : re_(re), im_(im) {}

    static Phasor from_polar(double magnitude, double angle_rad) {
        return {magnitude * std::cos(angle_rad), magnitude * std::sin(angle_rad)};
    }

    constexpr double re() const { return re_; }
    constexpr double im() const { return im_; }

    double magnitude() const { return std::hypot(re_, im_); }
    constexpr double magnitude_squared() const { return re_ * re_ + im_ * im_; }
    double angle() const { return wrap_angle(std::atan2(im_, re_)); }

    constexpr Phasor conj() const { return {re_, -im_}; }
    constexpr bool is_zero() const { return re_ == 0.0 && im_ == 0.0; }
    bool is_finite() const { return std::isfinite(re_) && std::isfinite(im_); }

    constexpr Phasor& operator+=(const Phasor& o) {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    constexpr Phasor& operator-=(const Phasor& o) {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }

    friend constexpr Phasor operator+(Phasor a, const Phasor& b) { return a += b; }
    friend constexpr Phasor operator-(Phasor a, const Phasor& b) { return a -= b; }
    friend constexpr Phasor operator-(const Phasor& a) { return {-a.re_, -a.im_}; }
    friend constexpr Phasor operator*(const Phasor& a, const Phasor& b) {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend constexpr Phasor operator*(double s, const Phasor& a) { return {s * a.re_, s * a.im_}; }
    friend constexpr Phasor operator*(const Phasor& a, double s) { return s * a; }
    friend constexpr Phasor operator/(const Phasor& a, double s) { return {a.re_ / s, a.im_ / s}; }

    // Throws SingularityError when b has zero magnitude.
    friend Phasor operator/(const Phasor& a, const Phasor& b);

    friend constexpr bool operator==(const Phasor&, const Phasor&) = default;

    /// Maps any angle onto (-pi, pi].
    static double wrap_angle(double rad) {
        constexpr double pi = std::numbers::pi;
        if (rad > -pi && rad <= pi) {
            return rad;
        }
        double r = std::remainder(rad, 2.0 * pi);
        return r <= -pi ? r + 2.0 * pi : r;
    }

private:
    double re_ = 0.0;
    double im_ = 0.0;
};

inline Phasor conj(const Phasor& p) { return p.conj(); }

inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace rdflow
