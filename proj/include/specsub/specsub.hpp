#ifndef SPECSUB_SPECSUB_HPP
#define SPECSUB_SPECSUB_HPP

#include "specsub/config.hpp"
#include "specsub/control_variates.hpp"
#include "specsub/diagnostics.hpp"
#include "specsub/error.hpp"
#include "specsub/fft.hpp"
#include "specsub/groups.hpp"
#include "specsub/models.hpp"
#include "specsub/numeric.hpp"
#include "specsub/pacf.hpp"
#include "specsub/pipeline.hpp"
#include "specsub/sampler.hpp"
#include "specsub/series.hpp"
#include "specsub/spectral.hpp"
#include "specsub/target.hpp"
#include "specsub/whittle.hpp"

#endif
