#pragma once

#include "aperture.hpp"
#include "budget.hpp"
#include "caustics.hpp"
#include "core.hpp"
#include "obstacles.hpp"
#include "parallel.hpp"
#include "polychrome.hpp"
#include "propagate.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"
