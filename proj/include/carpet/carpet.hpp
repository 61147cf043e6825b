#pragma once

// Umbrella header.
#include "carpet/error.hpp"
#include "carpet/polygon.hpp"
#include "carpet/geometry.hpp"
#include "carpet/carpet_io.hpp"
#include "carpet/raster.hpp"
#include "carpet/passage.hpp"
#include "carpet/qp.hpp"
#include "carpet/rng.hpp"
#include "carpet/parallel.hpp"
#include "carpet/modulus.hpp"
#include "carpet/potential.hpp"
#include "carpet/conjugate.hpp"
#include "carpet/layout.hpp"
#include "carpet/pipeline.hpp"
#include "carpet/svg.hpp"
