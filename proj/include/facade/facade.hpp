#pragma once

#include "facade/config.hpp"
#include "facade/error.hpp"
#include "facade/eval.hpp"
#include "facade/geometry.hpp"
#include "facade/gradcheck.hpp"
#include "facade/grammar.hpp"
#include "facade/grid.hpp"
#include "facade/instances.hpp"
#include "facade/labelmap.hpp"
#include "facade/losses.hpp"
#include "facade/mesh.hpp"
#include "facade/png_io.hpp"
#include "facade/raster.hpp"
#include "facade/symmetry.hpp"
#include "facade/synth.hpp"
