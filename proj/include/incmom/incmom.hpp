#pragma once

#include "incmom/analytic.hpp"
#include "incmom/bootstrap.hpp"
#include "incmom/compare.hpp"
#include "incmom/csv.hpp"
#include "incmom/errors.hpp"
#include "incmom/estimate.hpp"
#include "incmom/estimators.hpp"
#include "incmom/normal.hpp"
#include "incmom/report.hpp"
#include "incmom/rng.hpp"
#include "incmom/sample.hpp"
#include "incmom/simulation.hpp"
#include "incmom/streaming.hpp"
#include "incmom/summation.hpp"
