#pragma once

#include "rdad/errors.hpp"
#include "rdad/random.hpp"
#include "rdad/gaussian_core.hpp"
#include "rdad/rate_distortion.hpp"
#include "rdad/distinguishability.hpp"
#include "rdad/anomaly_sampling.hpp"
#include "rdad/compressors.hpp"
#include "rdad/detectors_eval.hpp"
#include "rdad/experiment.hpp"
