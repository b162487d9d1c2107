#pragma once

// Umbrella header for the SI diffusion toolkit.

#include "sidiff/config.hpp"
#include "sidiff/dataio.hpp"
#include "sidiff/error.hpp"
#include "sidiff/estimate.hpp"
#include "sidiff/experiments.hpp"
#include "sidiff/grid.hpp"
#include "sidiff/model.hpp"
#include "sidiff/paths.hpp"
#include "sidiff/quadrature.hpp"
#include "sidiff/random.hpp"
#include "sidiff/rates.hpp"
#include "sidiff/report.hpp"
#include "sidiff/simulate.hpp"
#include "sidiff/spline.hpp"
#include "sidiff/stats.hpp"
