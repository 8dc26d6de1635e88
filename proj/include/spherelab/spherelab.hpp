#pragma once

#include "spherelab/errors.hpp"
#include "spherelab/grid_function.hpp"
#include "spherelab/io.hpp"
#include "spherelab/lattice_counts.hpp"
#include "spherelab/ntt.hpp"
#include "spherelab/operators.hpp"
#include "spherelab/parallel.hpp"
#include "spherelab/point.hpp"
#include "spherelab/sharpness.hpp"
#include "spherelab/slice_family.hpp"
#include "spherelab/corpus.hpp"
