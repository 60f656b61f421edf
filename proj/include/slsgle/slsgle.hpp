#pragma once

#include "slsgle/adjacency.hpp"
#include "slsgle/errors.hpp"
#include "slsgle/glasso.hpp"
#include "slsgle/io.hpp"
#include "slsgle/laplacian.hpp"
#include "slsgle/linalg.hpp"
#include "slsgle/model_selection.hpp"
#include "slsgle/rng.hpp"
#include "slsgle/simlab.hpp"
#include "slsgle/solver.hpp"
#include "slsgle/tracker.hpp"
