#pragma once

#include "pudq/error.hpp"
#include "pudq/core.hpp"
#include "pudq/geometry.hpp"
#include "pudq/graph.hpp"
#include "pudq/objective.hpp"
#include "pudq/bounds.hpp"
#include "pudq/rtr.hpp"
#include "pudq/random.hpp"
#include "pudq/init.hpp"
#include "pudq/datasets.hpp"
#include "pudq/metrics.hpp"
#include "pudq/io.hpp"
