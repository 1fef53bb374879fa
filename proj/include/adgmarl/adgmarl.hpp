#pragma once

#include "adgmarl/ad_mpi.hpp"
#include "adgmarl/adg_builder.hpp"
#include "adgmarl/dp.hpp"
#include "adgmarl/error.hpp"
#include "adgmarl/experiment.hpp"
#include "adgmarl/game.hpp"
#include "adgmarl/graph.hpp"
#include "adgmarl/instances.hpp"
#include "adgmarl/io.hpp"
#include "adgmarl/optimality.hpp"
#include "adgmarl/policy.hpp"
