#pragma once

#include <utility>
#include <vector>

#include "tiltalloc/trim.hpp"

namespace tiltalloc::alloc::detail {

/// Cruise trim with any number of channels pinned at fixed values.
/// Pins bypass the box (their bound rows are collapsed onto the pin), so
/// callers validate pin values themselves. Throws TrimNotFound like the
/// public wrapper.
TrimPoint cruise_trim_pinned(const VehicleParams& p, const RotorGeometry& g,
                             const ActuatorBounds& bounds, double airspeed,
                             const std::vector<std::pair<int, double>>& pins,
                             const Vec3& position);

}  // namespace tiltalloc::alloc::detail
