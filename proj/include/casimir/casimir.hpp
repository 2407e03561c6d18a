#pragma once

#include "casimir/core.hpp"
#include "casimir/halfspace.hpp"
#include "casimir/kernels.hpp"
#include "casimir/macroscopic.hpp"
#include "casimir/material.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/slabs.hpp"

namespace casimir {
inline constexpr const char* version = "1.0.0";
}
