#pragma once

#include <stdexcept>
#include <string>

namespace bicatch {

// Orientation too close to the ZYX gimbal singularity (|pitch| near pi/2).
struct SingularOrientation : std::runtime_error {
  explicit SingularOrientation(const std::string& what) : std::runtime_error(what) {}
};

// Inertia matrix numerically non-invertible.
struct SingularInertia : std::runtime_error {
  explicit SingularInertia(const std::string& what) : std::runtime_error(what) {}
};

// Impact entry condition violated: contact-normal relative velocity >= 0.
struct NotApproaching : std::runtime_error {
  explicit NotApproaching(const std::string& what) : std::runtime_error(what) {}
};

// Slip-branch tangential rates requested with vanishing normal strain energy.
struct DegenerateNormalEnergy : std::runtime_error {
  explicit DegenerateNormalEnergy(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line_number)
      : std::runtime_error(what + " (line " + std::to_string(line_number) + ")"),
        line(line_number) {}
  int line;
};

// Interpolated vertex normal collapsed below the renormalization floor.
struct DegenerateNormal : std::runtime_error {
  explicit DegenerateNormal(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroStiffness : std::runtime_error {
  explicit ZeroStiffness(const std::string& what) : std::runtime_error(what) {}
};

// Predicted trajectory never enters the workspace sphere.
struct NoIntersection : std::runtime_error {
  explicit NoIntersection(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidModeSequence : std::runtime_error {
  explicit InvalidModeSequence(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bicatch
