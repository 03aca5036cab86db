#pragma once

namespace mvclab {

// Shared floor for probability clamping ahead of log(), sqrt() stabilizers
// and cosine-similarity denominators.
inline constexpr double kClampFloor = 1e-12;

}  // namespace mvclab
