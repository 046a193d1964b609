#pragma once

#include "mixvar/band_linalg.hpp"
#include "mixvar/data_model.hpp"
#include "mixvar/distributions.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/forecast.hpp"
#include "mixvar/girf.hpp"
#include "mixvar/io.hpp"
#include "mixvar/latent_gibbs.hpp"
#include "mixvar/metrics.hpp"
#include "mixvar/model.hpp"
#include "mixvar/param_gibbs.hpp"
#include "mixvar/random.hpp"
#include "mixvar/sampler.hpp"
#include "mixvar/simulate.hpp"
#include "mixvar/truncated_hmc.hpp"
