#pragma once

#include "ambient.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "fusion.hpp"
#include "image.hpp"
#include "io.hpp"
#include "manifest.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "record.hpp"
#include "rng.hpp"
#include "water_optics.hpp"
