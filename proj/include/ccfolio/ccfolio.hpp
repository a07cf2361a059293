#pragma once

#include "ccfolio/analysis.hpp"
#include "ccfolio/distributions.hpp"
#include "ccfolio/errors.hpp"
#include "ccfolio/fixtures.hpp"
#include "ccfolio/models.hpp"
#include "ccfolio/prices.hpp"
#include "ccfolio/random.hpp"
#include "ccfolio/simplex.hpp"
#include "ccfolio/solver.hpp"
#include "ccfolio/special_functions.hpp"
#include "ccfolio/stats.hpp"
