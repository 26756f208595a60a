#pragma once

#include <cmath>

namespace cotrain {

inline constexpr double kPi = 3.14159265358979323846;

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) noexcept {
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) {
        a += 2.0 * kPi;
    } else if (a > kPi) {
        a -= 2.0 * kPi;
    }
    return a;
}

inline double deg_to_rad(double d) noexcept { return d * (kPi / 180.0); }
inline double rad_to_deg(double r) noexcept { return r * (180.0 / kPi); }

// Planar rigid pose / transform. theta is kept wrapped into (-pi, pi].
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    static Pose2 identity() noexcept { return {}; }

    bool operator==(const Pose2&) const = default;
};

inline Pose2 make_pose(double x, double y, double theta) noexcept {
    return Pose2{x, y, wrap_angle(theta)};
}

// Apply b in a's frame. compose(p, identity) == p bit-exactly.
inline Pose2 compose(const Pose2& a, const Pose2& b) noexcept {
    const double c = std::cos(a.theta);
    const double s = std::sin(a.theta);
    return Pose2{a.x + c * b.x - s * b.y,
                 a.y + s * b.x + c * b.y,
                 wrap_angle(a.theta + b.theta)};
}

inline Pose2 inverse(const Pose2& p) noexcept {
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    return Pose2{-(c * p.x + s * p.y),
                 -(-s * p.x + c * p.y),
                 wrap_angle(-p.theta)};
}

// Transform a point (no orientation) by a pose.
inline void transform_point(const Pose2& t, double px, double py,
                            double& ox, double& oy) noexcept {
    const double c = std::cos(t.theta);
    const double s = std::sin(t.theta);
    ox = t.x + c * px - s * py;
    oy = t.y + s * px + c * py;
}

inline double sq(double v) noexcept { return v * v; }

inline double dist2(double ax, double ay, double bx, double by) noexcept {
    return sq(ax - bx) + sq(ay - by);
}

inline double dist(double ax, double ay, double bx, double by) noexcept {
    return std::sqrt(dist2(ax, ay, bx, by));
}

// Axis-aligned rectangle in meters.
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const noexcept { return x1 - x0; }
    double height() const noexcept { return y1 - y0; }
    double area() const noexcept { return width() * height(); }
    double cx() const noexcept { return 0.5 * (x0 + x1); }
    double cy() const noexcept { return 0.5 * (y0 + y1); }

    bool contains(double px, double py) const noexcept {
        return px >= x0 && px <= x1 && py >= y0 && py <= y1;
    }

    bool intersects(const Rect& o) const noexcept {
        return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
    }

    // Shrink by fraction f of each dimension on every side.
    Rect shrunk(double f) const noexcept {
        return Rect{x0 + f * width(), y0 + f * height(),
                    x1 - f * width(), y1 - f * height()};
    }

    bool operator==(const Rect&) const = default;
};

inline double intersection_area(const Rect& a, const Rect& b) noexcept {
    const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

}  // namespace cotrain
