/* Copyright 2026 The bcse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Umbrella header for the bcse keyword-spotting library.

#ifndef BCSE_BCSE_HPP_
#define BCSE_BCSE_HPP_

#include "bcse/attention.hpp"
#include "bcse/audio.hpp"
#include "bcse/batches.hpp"
#include "bcse/bc_block.hpp"
#include "bcse/checkpoint.hpp"
#include "bcse/conv.hpp"
#include "bcse/dataset.hpp"
#include "bcse/error.hpp"
#include "bcse/features.hpp"
#include "bcse/fft.hpp"
#include "bcse/gradcheck.hpp"
#include "bcse/loss.hpp"
#include "bcse/mode.hpp"
#include "bcse/model.hpp"
#include "bcse/noise.hpp"
#include "bcse/norm.hpp"
#include "bcse/ops.hpp"
#include "bcse/optim.hpp"
#include "bcse/parallel.hpp"
#include "bcse/random.hpp"
#include "bcse/tensor.hpp"
#include "bcse/train.hpp"

#endif  // BCSE_BCSE_HPP_
