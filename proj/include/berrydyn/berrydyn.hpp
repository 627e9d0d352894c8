#pragma once

#include "berrydyn/config.hpp"
#include "berrydyn/csv.hpp"
#include "berrydyn/effective.hpp"
#include "berrydyn/errors.hpp"
#include "berrydyn/fulldyn.hpp"
#include "berrydyn/geometry.hpp"
#include "berrydyn/linalg.hpp"
#include "berrydyn/model.hpp"
#include "berrydyn/quantum.hpp"
#include "berrydyn/scaling.hpp"
#include "berrydyn/scenarios.hpp"
#include "berrydyn/version.hpp"
