#pragma once

// Umbrella header for the texflow library.

#include "texflow/common.hpp"
#include "texflow/config.hpp"
#include "texflow/data/dataset.hpp"
#include "texflow/eval/metrics.hpp"
#include "texflow/grid.hpp"
#include "texflow/io/binary.hpp"
#include "texflow/io/ppm.hpp"
#include "texflow/lbm/boundary.hpp"
#include "texflow/lbm/d2q9.hpp"
#include "texflow/lbm/distribution.hpp"
#include "texflow/lbm/geometry.hpp"
#include "texflow/lbm/kernel.hpp"
#include "texflow/model/train.hpp"
#include "texflow/model/unet.hpp"
#include "texflow/nn/adam.hpp"
#include "texflow/nn/checkpoint.hpp"
#include "texflow/nn/functional.hpp"
#include "texflow/nn/grad_check.hpp"
#include "texflow/nn/ops.hpp"
#include "texflow/nn/params.hpp"
#include "texflow/nn/tape.hpp"
#include "texflow/nn/tensor.hpp"
#include "texflow/rng.hpp"
#include "texflow/sim/config.hpp"
#include "texflow/sim/manifest.hpp"
#include "texflow/sim/simulator.hpp"
#include "texflow/sim/snapshot.hpp"
