#pragma once

// Umbrella header.

#include "ibt/config.hpp"
#include "ibt/csv.hpp"
#include "ibt/density.hpp"
#include "ibt/errors.hpp"
#include "ibt/experiment.hpp"
#include "ibt/fourier.hpp"
#include "ibt/grid.hpp"
#include "ibt/moments.hpp"
#include "ibt/propagator.hpp"
#include "ibt/rdm.hpp"
#include "ibt/simplex.hpp"
#include "ibt/thermo_bogoliubov.hpp"
#include "ibt/units.hpp"
