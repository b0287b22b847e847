#pragma once

// Umbrella header for the sketch-and-solve multi-label learning library.

#include "ssml/common.hpp"
#include "ssml/data.hpp"
#include "ssml/experiment.hpp"
#include "ssml/geom.hpp"
#include "ssml/lstsq.hpp"
#include "ssml/matrix.hpp"
#include "ssml/metrics.hpp"
#include "ssml/model.hpp"
#include "ssml/model_io.hpp"
#include "ssml/random.hpp"
#include "ssml/sketch.hpp"
#include "ssml/theory.hpp"
