#pragma once

#include "nlrate/errors.hpp"
#include "nlrate/quadrature.hpp"
#include "nlrate/kernel.hpp"
#include "nlrate/hamiltonian.hpp"
#include "nlrate/legendre.hpp"
#include "nlrate/ratefn.hpp"
#include "nlrate/solver.hpp"
#include "nlrate/study.hpp"
#include "nlrate/properties.hpp"
