// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pulse/absorption.hpp"
#include "pulse/adam_analysis.hpp"
#include "pulse/bf16.hpp"
#include "pulse/checkpoint.hpp"
#include "pulse/compression.hpp"
#include "pulse/container.hpp"
#include "pulse/cost_model.hpp"
#include "pulse/error.hpp"
#include "pulse/index_coding.hpp"
#include "pulse/latency_model.hpp"
#include "pulse/manifest.hpp"
#include "pulse/metrics.hpp"
#include "pulse/object_store.hpp"
#include "pulse/patch.hpp"
#include "pulse/patch_file.hpp"
#include "pulse/s3_store.hpp"
#include "pulse/sha256.hpp"
#include "pulse/sigv4.hpp"
#include "pulse/sync.hpp"
#include "pulse/synthetic.hpp"
#include "pulse/units.hpp"
#include "pulse/wire.hpp"
