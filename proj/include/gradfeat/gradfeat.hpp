#pragma once

// Umbrella header; every public module in one include.

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/format.hpp"
#include "gradfeat/core/hash.hpp"
#include "gradfeat/core/linalg.hpp"
#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/distort/distort.hpp"
#include "gradfeat/grad/backprop.hpp"
#include "gradfeat/grad/bundle.hpp"
#include "gradfeat/grad/finite_diff.hpp"
#include "gradfeat/io/base64.hpp"
#include "gradfeat/io/checkpoint.hpp"
#include "gradfeat/io/file_util.hpp"
#include "gradfeat/io/image_io.hpp"
#include "gradfeat/io/manifest.hpp"
#include "gradfeat/iqa/eval.hpp"
#include "gradfeat/iqa/logistic_fit.hpp"
#include "gradfeat/iqa/metrics.hpp"
#include "gradfeat/iqa/projection.hpp"
#include "gradfeat/iqa/score.hpp"
#include "gradfeat/models/activations.hpp"
#include "gradfeat/models/loss.hpp"
#include "gradfeat/models/params.hpp"
#include "gradfeat/models/sae.hpp"
#include "gradfeat/models/vae.hpp"
#include "gradfeat/ood/classifier.hpp"
#include "gradfeat/ood/experiment.hpp"
#include "gradfeat/ood/features.hpp"
#include "gradfeat/synthetic.hpp"
#include "gradfeat/train/optimizer.hpp"
#include "gradfeat/train/patches.hpp"
#include "gradfeat/train/resize.hpp"
#include "gradfeat/train/trainer.hpp"
#include "gradfeat/train/zca.hpp"
#include "gradfeat/version.hpp"
