#pragma once

#include "feedctl/control.hpp"
#include "feedctl/counter.hpp"
#include "feedctl/detection.hpp"
#include "feedctl/errors.hpp"
#include "feedctl/evaluation.hpp"
#include "feedctl/geometry.hpp"
#include "feedctl/image.hpp"
#include "feedctl/pipeline.hpp"
#include "feedctl/regressor.hpp"
#include "feedctl/rng.hpp"
#include "feedctl/stats.hpp"
#include "feedctl/synth.hpp"
#include "feedctl/texture.hpp"
#include "feedctl/training.hpp"
#include "feedctl/types.hpp"
