#pragma once

#include "modtune/graph.hpp"
#include "modtune/partition.hpp"
#include "modtune/rng.hpp"
#include "modtune/spectral.hpp"
#include "modtune/tuning.hpp"
#include "modtune/detector.hpp"
#include "modtune/ensemble.hpp"
#include "modtune/oracle.hpp"
#include "modtune/io.hpp"
