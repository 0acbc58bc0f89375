#ifndef BAYESREGION_BAYESREGION_HPP
#define BAYESREGION_BAYESREGION_HPP

#include "bayesregion/common.hpp"
#include "bayesregion/specfun.hpp"
#include "bayesregion/statespace.hpp"
#include "bayesregion/model.hpp"
#include "bayesregion/mle.hpp"
#include "bayesregion/regions.hpp"
#include "bayesregion/mcvalidate.hpp"

#endif  // BAYESREGION_BAYESREGION_HPP
