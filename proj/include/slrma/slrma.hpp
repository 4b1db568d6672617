#pragma once

#include "slrma/error.hpp"
#include "slrma/matrix.hpp"
#include "slrma/numerics.hpp"
#include "slrma/transforms.hpp"
#include "slrma/lrma.hpp"
#include "slrma/solver.hpp"
#include "slrma/quantize.hpp"
#include "slrma/range_coder.hpp"
#include "slrma/entropy.hpp"
#include "slrma/container.hpp"
#include "slrma/codec.hpp"
#include "slrma/datasets.hpp"
#include "slrma/metrics.hpp"
#include "slrma/sweep.hpp"
