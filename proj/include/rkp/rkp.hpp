// rkp/rkp.hpp
// Umbrella header pulling in the whole library.
#pragma once

#include "rkp/action_angle.hpp"
#include "rkp/core_dynamics.hpp"
#include "rkp/errors.hpp"
#include "rkp/half_integer.hpp"
#include "rkp/index_engine.hpp"
#include "rkp/moduli_space.hpp"
#include "rkp/orbit_catalog.hpp"
#include "rkp/regularization.hpp"
#include "rkp/sh_ledger.hpp"
#include "rkp/verify.hpp"
