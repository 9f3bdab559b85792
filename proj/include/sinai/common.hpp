#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sinai {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kHalfPi = 0.5 * kPi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    /// z-component of the 3D cross product; positive when `o` is
    /// counterclockwise from *this.
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }
    Vec2 normalized() const {
        double n = norm();
        return {x / n, y / n};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// ---------------------------------------------------------------------------
// Error hierarchy. Domain errors are exceptions; samplers catch
// GrazingCollision and resample, everything else propagates.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A traced ray found no scatterer within the table's horizon bound.
/// On a validated table this signals a geometry or numerics defect.
class NoCollisionWithinHorizon : public Error {
  public:
    using Error::Error;
};

/// Ray-circle intersection was tangential within tolerance; the collision
/// is ambiguous and the caller should resample.
class GrazingCollision : public Error {
  public:
    explicit GrazingCollision(const std::string& what, long step_ = -1)
        : Error(what), step(step_) {}
    long step; ///< iterate() fills in the failing step index
};

class OverlappingScatterers : public Error {
  public:
    using Error::Error;
};

/// An open corridor was found; carries the corridor direction.
class InfiniteHorizonDetected : public Error {
  public:
    InfiniteHorizonDetected(const std::string& what, int p_, int q_)
        : Error(what), p(p_), q(q_) {}
    int p;
    int q;
};

class InsufficientPairs : public Error {
  public:
    using Error::Error;
};

class ShapeMismatch : public Error {
  public:
    using Error::Error;
};

/// A functional evaluation exceeded its declared sup-norm bound,
/// signalling bad metadata.
class BoundViolation : public Error {
  public:
    using Error::Error;
};

class UnknownObservable : public Error {
  public:
    using Error::Error;
};

class FitFailed : public Error {
  public:
    using Error::Error;
};

class DegenerateVariance : public Error {
  public:
    using Error::Error;
};

/// The fitted autocovariance decay rate came out >= 1, so the Green-Kubo
/// series has no defensible truncation tail bound.
class NonSummableWarning : public Error {
  public:
    using Error::Error;
};

/// Grazing resample rate exceeded the abort threshold; a geometry bug is
/// more likely than this much bad luck.
class ExcessiveGrazing : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace sinai
