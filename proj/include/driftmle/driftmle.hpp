#pragma once

#include "driftmle/continuous.hpp"
#include "driftmle/discrete.hpp"
#include "driftmle/errors.hpp"
#include "driftmle/experiment.hpp"
#include "driftmle/fft.hpp"
#include "driftmle/models.hpp"
#include "driftmle/path.hpp"
#include "driftmle/rng.hpp"
#include "driftmle/sim.hpp"
#include "driftmle/toeplitz.hpp"
