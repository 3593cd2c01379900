#pragma once

#include "chessmix/composer.hpp"
#include "chessmix/dataset_io.hpp"
#include "chessmix/generate.hpp"
#include "chessmix/homography.hpp"
#include "chessmix/raster.hpp"
#include "chessmix/rng.hpp"
#include "chessmix/sampler.hpp"
#include "chessmix/stats_index.hpp"
#include "chessmix/transforms.hpp"
