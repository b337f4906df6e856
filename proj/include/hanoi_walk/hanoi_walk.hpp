#pragma once

// Umbrella header for the Hanoi-network quantum-walk search library.

#include "hanoi_walk/topology.hpp"
#include "hanoi_walk/engine.hpp"
#include "hanoi_walk/experiments.hpp"
#include "hanoi_walk/fitting.hpp"
#include "hanoi_walk/io.hpp"
