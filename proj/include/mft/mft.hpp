#pragma once

#include "error.hpp"
#include "parallel.hpp"
#include "special.hpp"
#include "lattice_integrals.hpp"
#include "models.hpp"
#include "mf_solver.hpp"
#include "certification.hpp"
#include "fullspace_oracle.hpp"
#include "complete_graph_mc.hpp"
