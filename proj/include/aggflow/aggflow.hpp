#pragma once

// Umbrella header: particle gradient flows for nonlocal interaction energies
// with nonsmooth lambda-convex kernels.

#include "aggflow/config.hpp"
#include "aggflow/convex_set.hpp"
#include "aggflow/dynamics.hpp"
#include "aggflow/energy.hpp"
#include "aggflow/io.hpp"
#include "aggflow/measure.hpp"
#include "aggflow/potential.hpp"
#include "aggflow/rng.hpp"
#include "aggflow/scenarios.hpp"
#include "aggflow/selection.hpp"
#include "aggflow/transport.hpp"
#include "aggflow/vec.hpp"
