#pragma once

#include "rswarm/consensus.hpp"
#include "rswarm/graph.hpp"
#include "rswarm/log.hpp"
#include "rswarm/qp.hpp"
#include "rswarm/random.hpp"
#include "rswarm/robustness.hpp"
#include "rswarm/safety.hpp"
#include "rswarm/scenario.hpp"
#include "rswarm/sigmoid.hpp"
#include "rswarm/sim.hpp"
#include "rswarm/smooth_cbf.hpp"
#include "rswarm/state.hpp"
#include "rswarm/trace_io.hpp"
