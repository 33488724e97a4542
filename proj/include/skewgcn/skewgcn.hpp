#pragma once

// Umbrella header.
#include "skewgcn/types.hpp"
#include "skewgcn/rng.hpp"
#include "skewgcn/graph.hpp"
#include "skewgcn/partition.hpp"
#include "skewgcn/sampling.hpp"
#include "skewgcn/estimation.hpp"
#include "skewgcn/training.hpp"
#include "skewgcn/sbm.hpp"
#include "skewgcn/dataset.hpp"
#include "skewgcn/experiment.hpp"
