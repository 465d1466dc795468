// Umbrella header.
#pragma once

#include "olg/common.hpp"
#include "olg/config.hpp"
#include "olg/csv.hpp"
#include "olg/demographics.hpp"
#include "olg/emit.hpp"
#include "olg/equilibrium.hpp"
#include "olg/fiscal.hpp"
#include "olg/household.hpp"
#include "olg/io.hpp"
#include "olg/policy.hpp"
#include "olg/production.hpp"
#include "olg/welfare.hpp"
