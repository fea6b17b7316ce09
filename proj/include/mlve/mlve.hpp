#pragma once
// Umbrella header.

#include "mlve/bounds.hpp"
#include "mlve/combinatorics.hpp"
#include "mlve/engine.hpp"
#include "mlve/error.hpp"
#include "mlve/grassmann.hpp"
#include "mlve/identities.hpp"
#include "mlve/interpolation.hpp"
#include "mlve/mayer.hpp"
#include "mlve/model.hpp"
#include "mlve/numeric.hpp"
#include "mlve/oracle.hpp"
#include "mlve/quadrature.hpp"
#include "mlve/verify.hpp"
