/**
 * @file fvem.hpp
 * @brief Umbrella header for the bilinear finite volume element library.
 */
#pragma once

#include "fvem/analysis.hpp"
#include "fvem/assembly.hpp"
#include "fvem/expr.hpp"
#include "fvem/femspace.hpp"
#include "fvem/geometry.hpp"
#include "fvem/linalg.hpp"
#include "fvem/mesh.hpp"
#include "fvem/problem.hpp"
#include "fvem/quadrature.hpp"
#include "fvem/study.hpp"
#include "fvem/verify.hpp"
