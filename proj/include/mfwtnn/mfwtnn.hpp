#pragma once

#include "mfwtnn/cube_io.hpp"
#include "mfwtnn/errors.hpp"
#include "mfwtnn/format.hpp"
#include "mfwtnn/metrics.hpp"
#include "mfwtnn/noise.hpp"
#include "mfwtnn/parallel.hpp"
#include "mfwtnn/shrinkage.hpp"
#include "mfwtnn/solver.hpp"
#include "mfwtnn/tensor3.hpp"
#include "mfwtnn/weights.hpp"
