#pragma once

#include "koalition/config.hpp"
#include "koalition/date.hpp"
#include "koalition/electoral.hpp"
#include "koalition/error.hpp"
#include "koalition/forecast.hpp"
#include "koalition/parallel.hpp"
#include "koalition/poe_engine.hpp"
#include "koalition/poll_ingest.hpp"
#include "koalition/pooling.hpp"
#include "koalition/posterior.hpp"
#include "koalition/registry.hpp"
#include "koalition/report.hpp"
#include "koalition/rng.hpp"
#include "koalition/svg.hpp"
#include "koalition/viz.hpp"
