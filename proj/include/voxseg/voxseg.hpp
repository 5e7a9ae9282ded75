// Umbrella header: the whole volumetric contouring toolkit.
#pragma once

#include "voxseg/core.hpp"
#include "voxseg/filters.hpp"
#include "voxseg/growing.hpp"
#include "voxseg/levelset.hpp"
#include "voxseg/metrics.hpp"
#include "voxseg/parallel.hpp"
#include "voxseg/phantom.hpp"
#include "voxseg/pipeline.hpp"
#include "voxseg/rng.hpp"
#include "voxseg/sdf.hpp"
#include "voxseg/vocal.hpp"
#include "voxseg/vol_io.hpp"
