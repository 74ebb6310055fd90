#pragma once

#include "emdscale/breaktest.hpp"
#include "emdscale/emd.hpp"
#include "emdscale/error.hpp"
#include "emdscale/hurst.hpp"
#include "emdscale/json_io.hpp"
#include "emdscale/ols.hpp"
#include "emdscale/pipeline.hpp"
#include "emdscale/scale_analysis.hpp"
#include "emdscale/series_io.hpp"
#include "emdscale/spectral.hpp"
#include "emdscale/synth.hpp"
