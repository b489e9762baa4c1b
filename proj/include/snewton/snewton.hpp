#pragma once

/// \file snewton.hpp
/// Bound states of the Schrodinger-Newton system in one and two dimensions
/// by shooting from the origin.

#include "analysis.hpp"
#include "bessel.hpp"
#include "core.hpp"
#include "error.hpp"
#include "integrate.hpp"
#include "io.hpp"
#include "physical.hpp"
#include "profile.hpp"
#include "quadrature.hpp"
#include "shoot.hpp"
#include "tail.hpp"

namespace snewton {

#ifdef SNEWTON_VERSION
inline constexpr const char* version = SNEWTON_VERSION;
#else
inline constexpr const char* version = "1.0.0";
#endif

} // namespace snewton
