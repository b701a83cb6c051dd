#pragma once

// Umbrella header for the numeric core. fetch.hpp (HTTP) is opt-in.

#include "qlink/error.hpp"
#include "qlink/experiment.hpp"
#include "qlink/forecast.hpp"
#include "qlink/ingest.hpp"
#include "qlink/metrics.hpp"
#include "qlink/report.hpp"
#include "qlink/rng.hpp"
#include "qlink/signgen.hpp"
#include "qlink/volatility.hpp"
