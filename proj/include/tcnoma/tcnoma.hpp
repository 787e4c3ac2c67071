#pragma once

#include "constellation.hpp"
#include "trellis.hpp"
#include "labeled_trellis.hpp"
#include "product_trellis.hpp"
#include "detectors.hpp"
#include "freedist.hpp"
#include "powalloc.hpp"
#include "channel_sim.hpp"
#include "experiment.hpp"
