#pragma once

#include "gigvad/adagrad.hpp"
#include "gigvad/backbone.hpp"
#include "gigvad/checkpoint.hpp"
#include "gigvad/config.hpp"
#include "gigvad/dataset.hpp"
#include "gigvad/dataset_io.hpp"
#include "gigvad/dropout.hpp"
#include "gigvad/errors.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/grad_check.hpp"
#include "gigvad/inference.hpp"
#include "gigvad/io.hpp"
#include "gigvad/metrics.hpp"
#include "gigvad/model.hpp"
#include "gigvad/objectives.hpp"
#include "gigvad/ops.hpp"
#include "gigvad/reports.hpp"
#include "gigvad/rng.hpp"
#include "gigvad/selection.hpp"
#include "gigvad/smoothing.hpp"
#include "gigvad/spatial.hpp"
#include "gigvad/tape.hpp"
#include "gigvad/tensor.hpp"
#include "gigvad/training.hpp"
