#pragma once

#include "lentp/bessel.hpp"
#include "lentp/chaos.hpp"
#include "lentp/cylindrical.hpp"
#include "lentp/errors.hpp"
#include "lentp/extrapolation.hpp"
#include "lentp/kernel.hpp"
#include "lentp/lent_particle.hpp"
#include "lentp/mehler.hpp"
#include "lentp/monte_carlo.hpp"
#include "lentp/paths.hpp"
#include "lentp/rng.hpp"
#include "lentp/sde.hpp"
#include "lentp/step_function.hpp"
#include "lentp/time_grid.hpp"
#include "lentp/version.hpp"
