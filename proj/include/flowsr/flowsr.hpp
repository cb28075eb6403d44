#pragma once

#include "flowsr/config.hpp"
#include "flowsr/error.hpp"
#include "flowsr/forward_model.hpp"
#include "flowsr/fsr_solver.hpp"
#include "flowsr/interp.hpp"
#include "flowsr/metrics.hpp"
#include "flowsr/phantom.hpp"
#include "flowsr/pipeline.hpp"
#include "flowsr/spectral.hpp"
#include "flowsr/volume.hpp"
#include "flowsr/volume_io.hpp"
