#pragma once

#include "ipd/bsm.hpp"
#include "ipd/calibration.hpp"
#include "ipd/csv.hpp"
#include "ipd/errors.hpp"
#include "ipd/grid_density.hpp"
#include "ipd/math.hpp"
#include "ipd/nnls.hpp"
#include "ipd/option_chain.hpp"
#include "ipd/recovery.hpp"
#include "ipd/spd_extract.hpp"
#include "ipd/state_transform.hpp"
#include "ipd/transform_smooth.hpp"
