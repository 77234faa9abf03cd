#pragma once

#include "gl0/constraint.hpp"
#include "gl0/dataset.hpp"
#include "gl0/error.hpp"
#include "gl0/estimation.hpp"
#include "gl0/knapsack.hpp"
#include "gl0/problem.hpp"
#include "gl0/rng.hpp"
#include "gl0/smoothing.hpp"
#include "gl0/spa.hpp"
#include "gl0/tinynet.hpp"
#include "gl0/vecio.hpp"
