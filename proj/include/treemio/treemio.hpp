#pragma once

#include "treemio/analysis.hpp"
#include "treemio/bench.hpp"
#include "treemio/constraint_parser.hpp"
#include "treemio/error.hpp"
#include "treemio/fixtures.hpp"
#include "treemio/formulations.hpp"
#include "treemio/mip_model.hpp"
#include "treemio/rng.hpp"
#include "treemio/simplex.hpp"
#include "treemio/solver.hpp"
#include "treemio/tree_model.hpp"
#include "treemio/verify.hpp"
